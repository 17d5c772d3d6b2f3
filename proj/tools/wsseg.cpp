// Command-line front end: phantom generation, target generation and evaluation.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsseg/io.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/morphology.hpp"
#include "wsseg/phantom.hpp"
#include "wsseg/pipeline.hpp"
#include "wsseg/random_walker.hpp"

namespace fs = std::filesystem;
using namespace wsseg;

namespace {

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
};

void add_pipeline_args(CLI::App* cmd, PipelineArgs& a) {
  cmd->add_option("--config", a.config, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", a.overrides, "override one configuration key (key=value), repeatable");
}

/// Defaults, then the config file, then --set overrides, then explicit flags.
PipelineConfig resolve_config(const PipelineArgs& a) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_pipeline_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
}

std::vector<std::size_t> parse_triple_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("expected three comma-separated integers, got '" + s + "'");
    out.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != 3) throw ConfigError("expected three comma-separated integers, got '" + s + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scribble-to-dense target generation and Dice evaluation for tomography volumes"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every stochastic step")->capture_default_str();

  // phantom
  auto* ph_cmd = app.add_subcommand("phantom", "generate a synthetic screw-in-bone volume and scribbles");
  std::string ph_gray, ph_labels, ph_scribbles, ph_dims = "40,128,128";
  PhantomSpec spec;
  ScribbleOptions sopts;
  ph_cmd->add_option("--gray", ph_gray, "output gray volume")->required();
  ph_cmd->add_option("--labels", ph_labels, "output ground-truth label volume")->required();
  ph_cmd->add_option("--scribbles", ph_scribbles, "output scribble file");
  ph_cmd->add_option("--dims", ph_dims, "nz,ny,nx")->capture_default_str();
  ph_cmd->add_option("--r-screw", spec.r_screw)->capture_default_str();
  ph_cmd->add_option("--r-corrosion", spec.r_corrosion)->capture_default_str();
  ph_cmd->add_option("--r-bone", spec.r_bone)->capture_default_str();
  ph_cmd->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  ph_cmd->add_option("--holes", spec.bone_hole_count, "background-gray holes per plane in the bone")->capture_default_str();
  ph_cmd->add_option("--hole-radius", spec.hole_radius)->capture_default_str();
  ph_cmd->add_option("--z-stride", sopts.z_stride, "annotate every n-th plane")->capture_default_str();
  ph_cmd->add_option("--strokes", sopts.strokes_per_label, "strokes per label and plane")->capture_default_str();
  ph_cmd->add_option("--stroke-len", sopts.stroke_len)->capture_default_str();
  ph_cmd->add_option("--persistence", sopts.persistence, "probability a stroke keeps its direction")
      ->capture_default_str();

  // propagate
  auto* pr_cmd = app.add_subcommand("propagate", "random-walk propagation of scribbles on annotated planes");
  PipelineArgs pr_args;
  std::string pr_gray, pr_scribbles, pr_out;
  add_pipeline_args(pr_cmd, pr_args);
  pr_cmd->add_option("--gray", pr_gray)->required();
  pr_cmd->add_option("--scribbles", pr_scribbles)->required();
  pr_cmd->add_option("--out", pr_out, "output label volume")->required();
  std::optional<double> pr_beta;
  std::optional<unsigned> pr_threads;
  pr_cmd->add_option("--beta", pr_beta);
  pr_cmd->add_option("--threads", pr_threads);

  // close
  auto* cl_cmd = app.add_subcommand("close", "bone closing on every dense plane of a label volume");
  PipelineArgs cl_args;
  std::string cl_in, cl_out;
  std::optional<std::string> cl_shape;
  std::optional<int> cl_radius;
  add_pipeline_args(cl_cmd, cl_args);
  cl_cmd->add_option("--in", cl_in)->required();
  cl_cmd->add_option("--out", cl_out)->required();
  cl_cmd->add_option("--shape", cl_shape, "disk or square");
  cl_cmd->add_option("--radius", cl_radius);

  // targets
  auto* tg_cmd = app.add_subcommand("targets", "full target generation in one of the three modes");
  PipelineArgs tg_args;
  std::optional<std::string> tg_mode, tg_gray, tg_scribbles, tg_reference, tg_out;
  add_pipeline_args(tg_cmd, tg_args);
  tg_cmd->add_option("--mode", tg_mode, "dense-reference, random-walk or scribble-only");
  tg_cmd->add_option("--gray", tg_gray);
  tg_cmd->add_option("--scribbles", tg_scribbles);
  tg_cmd->add_option("--reference", tg_reference);
  tg_cmd->add_option("--output-dir", tg_out);
  bool tg_no_closing = false;
  tg_cmd->add_flag("--no-closing", tg_no_closing);

  // dice
  auto* di_cmd = app.add_subcommand("dice", "per-label Dice of a prediction against a reference");
  std::string di_pred, di_ref, di_out;
  di_cmd->add_option("--pred", di_pred)->required();
  di_cmd->add_option("--ref", di_ref)->required();
  di_cmd->add_option("--out", di_out, "report file");

  // cv-summary
  auto* cv_cmd = app.add_subcommand("cv-summary", "mean and std of Dice reports across folds");
  std::vector<std::string> cv_reports;
  cv_cmd->add_option("reports", cv_reports, "report files, one per fold")->required();

  // export-slice
  auto* ex_cmd = app.add_subcommand("export-slice", "write one axial plane as PGM (gray) or PPM (labels)");
  std::string ex_in, ex_out;
  std::size_t ex_z = 0;
  ex_cmd->add_option("--in", ex_in)->required();
  ex_cmd->add_option("--z", ex_z)->required();
  ex_cmd->add_option("--out", ex_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ph_cmd) {
      const auto d = parse_triple_sizes(ph_dims);
      spec.dims = {d[0], d[1], d[2]};
      spec.rng_seed = seed;
      sopts.rng_seed = seed;
      const auto ph = generate_phantom(spec);
      save_volume(ph.gray, ph_gray);
      save_volume(ph.labels, ph_labels);
      if (!ph_scribbles.empty()) {
        const auto gen = generate_scribbles(ph.labels, sopts);
        save_scribbles(gen.scribbles, ph_scribbles);
        print_warnings(gen.warnings);
        fmt::print("scribbles={} coverage={:.6f} planes={}\n", gen.scribbles.size(), gen.coverage,
                   gen.scribbles.annotated_planes().size());
      }
    } else if (*pr_cmd) {
      auto cfg = resolve_config(pr_args);
      if (pr_beta) cfg.rw.beta = *pr_beta;
      if (pr_threads) cfg.threads = *pr_threads;
      cfg.rw.validate();
      const auto gray = normalize_intensities(load_gray_volume(pr_gray));
      const auto scribbles = load_scribbles(pr_scribbles);
      const auto res = propagate_annotated_slices(gray, scribbles, cfg.rw, cfg.threads);
      save_volume(res.labels, pr_out);
      print_warnings(res.warnings);
      for (const auto& p : res.planes) fmt::print("plane {}: scribbles={} iterations={}\n", p.z, p.scribbles, p.iterations);
    } else if (*cl_cmd) {
      auto cfg = resolve_config(cl_args);
      if (cl_shape) cfg.closing.element.shape = parse_element_shape(*cl_shape);
      if (cl_radius) cfg.closing.element.radius = *cl_radius;
      auto labels = load_label_volume(cl_in);
      const auto changed = close_dense_planes(labels, cfg.closing.element);
      save_volume(labels, cl_out);
      for (const auto& [z, n] : changed) fmt::print("plane {}: relabeled={}\n", z, n);
    } else if (*tg_cmd) {
      auto cfg = resolve_config(tg_args);
      if (tg_mode) cfg.set("mode", *tg_mode);
      if (tg_gray) cfg.gray = *tg_gray;
      if (tg_scribbles) cfg.scribbles = *tg_scribbles;
      if (tg_reference) cfg.reference = *tg_reference;
      if (tg_out) cfg.output_dir = *tg_out;
      if (tg_no_closing) cfg.closing.enabled = false;
      const auto res = run_target_generation(cfg);
      print_warnings(res.warnings);
      fmt::print("targets={} manifest={}\n", (cfg.output_dir / "targets.vmeta").string(),
                 manifest_path_for(cfg.output_dir / "targets.vmeta").string());
    } else if (*di_cmd) {
      const auto rep = run_evaluation(di_pred, di_ref, di_out);
      fmt::print("{}", format_report_table(rep));
    } else if (*cv_cmd) {
      std::vector<fs::path> paths(cv_reports.begin(), cv_reports.end());
      fmt::print("{}", format_cv_summary(run_cv_summary(paths)));
    } else if (*ex_cmd) {
      const auto meta = read_volume_meta(ex_in);
      if (meta.kind == ValueKind::Gray)
        export_slice_image(extract_slice(load_gray_volume(ex_in), ex_z), ex_out);
      else
        export_slice_image(extract_slice(load_label_volume(ex_in), ex_z), ex_out);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
