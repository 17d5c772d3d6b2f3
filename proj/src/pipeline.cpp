#include "wsseg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "wsseg/io.hpp"
#include "wsseg/phantom.hpp"

namespace wsseg {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::out_of_range&) {
    }
  }
  throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(std::string(what) + " path is required for this mode");
}

void require_volume(const fs::path& p, std::string_view what) {
  require_file(p, what);
  const auto paths = volume_paths(p);
  if (!fs::exists(paths.sidecar) || !fs::exists(paths.payload))
    throw ConfigError(std::string(what) + " volume not found: " + p.string());
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

TargetMode parse_target_mode(std::string_view name) {
  if (name == "dense-reference") return TargetMode::DenseReference;
  if (name == "random-walk") return TargetMode::RandomWalk;
  if (name == "scribble-only") return TargetMode::ScribbleOnly;
  throw ConfigError("unknown target mode '" + std::string(name) + "'");
}

std::string_view to_string(TargetMode mode) {
  switch (mode) {
    case TargetMode::DenseReference: return "dense-reference";
    case TargetMode::RandomWalk: return "random-walk";
    case TargetMode::ScribbleOnly: return "scribble-only";
  }
  return "?";
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "gray")
    gray = value;
  else if (key == "scribbles")
    scribbles = value;
  else if (key == "reference")
    reference = value;
  else if (key == "output_dir")
    output_dir = value;
  else if (key == "mode")
    mode = parse_target_mode(value);
  else if (key == "rw.beta")
    rw.beta = parse_real(key, value);
  else if (key == "rw.tol")
    rw.solver_tol = parse_real(key, value);
  else if (key == "rw.max_iters")
    rw.max_iters = parse_count(key, value);
  else if (key == "rw.weight_floor")
    rw.weight_floor = parse_real(key, value);
  else if (key == "closing.enabled")
    closing.enabled = parse_bool(key, value);
  else if (key == "closing.shape")
    closing.element.shape = parse_element_shape(value);
  else if (key == "closing.radius")
    closing.element.radius = static_cast<int>(parse_count(key, value));
  else if (key == "closing.allow_scribble")
    closing.allow_scribble = parse_bool(key, value);
  else if (key == "threads")
    threads = static_cast<unsigned>(parse_count(key, value));
  else
    throw ConfigError("unknown config key '" + key + "'");
}

void PipelineConfig::validate() const {
  rw.validate();
  if (closing.element.radius < 1) throw ConfigError("closing.radius must be >= 1");
  switch (mode) {
    case TargetMode::RandomWalk:
      require_volume(gray, "gray");
      require_file(scribbles, "scribbles");
      if (!fs::exists(scribbles)) throw ConfigError("scribble file not found: " + scribbles.string());
      break;
    case TargetMode::ScribbleOnly:
      require_file(scribbles, "scribbles");
      if (!fs::exists(scribbles)) throw ConfigError("scribble file not found: " + scribbles.string());
      if (gray.empty() && reference.empty())
        throw ConfigError("scribble-only mode needs gray or reference to define the volume shape");
      if (!gray.empty()) require_volume(gray, "gray");
      if (!reference.empty()) require_volume(reference, "reference");
      break;
    case TargetMode::DenseReference:
      require_volume(reference, "reference");
      if (!scribbles.empty() && !fs::exists(scribbles))
        throw ConfigError("scribble file not found: " + scribbles.string());
      break;
  }
}

std::string PipelineConfig::canonical_text() const {
  std::string s;
  s += "gray=" + gray.string() + "\n";
  s += "scribbles=" + scribbles.string() + "\n";
  s += "reference=" + reference.string() + "\n";
  s += "output_dir=" + output_dir.string() + "\n";
  s += fmt::format("mode={}\n", to_string(mode));
  s += fmt::format("rw.beta={}\n", rw.beta);
  s += fmt::format("rw.tol={}\n", rw.solver_tol);
  s += fmt::format("rw.max_iters={}\n", rw.max_iters);
  s += fmt::format("rw.weight_floor={}\n", rw.weight_floor);
  s += fmt::format("closing.enabled={}\n", closing.enabled);
  s += fmt::format("closing.shape={}\n", to_string(closing.element.shape));
  s += fmt::format("closing.radius={}\n", closing.element.radius);
  s += fmt::format("closing.allow_scribble={}\n", closing.allow_scribble);
  s += fmt::format("threads={}\n", threads);
  return s;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  PipelineConfig cfg;
  std::istringstream in(read_text(path));
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path.string() + ": malformed line '" + line + "'");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_fnv1a64(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return fnv1a64(s.str());
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

void Manifest::add(std::string key, std::string value) {
  if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos || value.find('\n') != std::string::npos)
    throw ConfigError("manifest entries must be single-line and keys must not contain '='");
  entries_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> Manifest::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string Manifest::serialize() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
  return s;
}

Manifest Manifest::parse(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed manifest line '" + line + "'");
    m.add(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

void Manifest::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << serialize();
}

Manifest Manifest::read(const fs::path& path) { return parse(read_text(path)); }

std::map<std::size_t, std::size_t> close_dense_planes(LabelVolume& labels, const StructuringElement& se) {
  std::map<std::size_t, std::size_t> changed;
  for (std::size_t z = 0; z < labels.dims().nz; ++z) {
    const auto plane = labels.plane(z);
    if (std::find(plane.begin(), plane.end(), kUnlabeled) != plane.end()) continue;
    const auto before = extract_slice(labels, z);
    const auto after = close_bone_label(before, se);
    std::size_t n = 0;
    for (std::size_t i = 0; i < before.size(); ++i) n += before.data[i] != after.data[i];
    insert_slice(labels, z, after);
    changed[z] = n;
  }
  return changed;
}

TargetResult build_targets(const PipelineConfig& cfg, const TargetInputs& in) {
  cfg.rw.validate();
  (void)cfg.closing.element.offsets();

  TargetResult result;
  auto& m = result.manifest;
  m.add("format", "wsseg-targets-manifest/1");
  m.add("config_hash", hex64(fnv1a64(cfg.canonical_text())));
  std::istringstream canon(cfg.canonical_text());
  for (std::string line; std::getline(canon, line);) {
    const auto eq = line.find('=');
    m.add("config." + line.substr(0, eq), line.substr(eq + 1));
  }

  bool apply_closing = cfg.closing.enabled;
  std::vector<std::size_t> planes;

  switch (cfg.mode) {
    case TargetMode::RandomWalk: {
      if (!in.gray || !in.scribbles) throw ConfigError("random-walk mode needs a gray volume and scribbles");
      const auto gray = normalize_intensities(*in.gray);
      auto prop = propagate_annotated_slices(gray, *in.scribbles, cfg.rw, cfg.threads);
      result.targets = std::move(prop.labels);
      result.warnings = std::move(prop.warnings);
      for (const auto& p : prop.planes) {
        planes.push_back(p.z);
        m.add(fmt::format("plane.{}.scribbles", p.z), std::to_string(p.scribbles));
        m.add(fmt::format("plane.{}.iterations", p.z), std::to_string(p.iterations));
      }
      m.add("scribbles.records", std::to_string(in.scribbles->size()));
      m.add("scribbles.coverage", fmt::format("{}", scribble_coverage(*in.scribbles, gray.dims())));
      break;
    }
    case TargetMode::ScribbleOnly: {
      if (!in.scribbles) throw ConfigError("scribble-only mode needs scribbles");
      const Volume<float>* shape_gray = in.gray;
      Dims dims;
      if (shape_gray)
        dims = shape_gray->dims();
      else if (in.reference)
        dims = in.reference->dims();
      else
        throw ConfigError("scribble-only mode needs a gray or reference volume for its shape");
      in.scribbles->check_bounds(dims);
      result.targets = LabelVolume(dims, ValueKind::Label, kUnlabeled);
      for (const auto& r : in.scribbles->records()) result.targets.at(r.z, r.y, r.x) = r.label;
      planes = in.scribbles->annotated_planes();
      m.add("scribbles.records", std::to_string(in.scribbles->size()));
      m.add("scribbles.coverage", fmt::format("{}", scribble_coverage(*in.scribbles, dims)));
      if (apply_closing && !cfg.closing.allow_scribble) {
        apply_closing = false;
        m.add("closing.skipped", "scribble-only mode without closing.allow_scribble");
      }
      break;
    }
    case TargetMode::DenseReference: {
      if (!in.reference) throw ConfigError("dense-reference mode needs reference labels");
      const auto& ref = *in.reference;
      if (in.scribbles) {
        in.scribbles->check_bounds(ref.dims());
        planes = in.scribbles->annotated_planes();
      } else {
        for (std::size_t z = 0; z < ref.dims().nz; ++z) {
          const auto p = ref.plane(z);
          if (std::find(p.begin(), p.end(), kUnlabeled) == p.end()) planes.push_back(z);
        }
      }
      result.targets = LabelVolume(ref.dims(), ValueKind::Label, kUnlabeled);
      result.targets.set_spacing(ref.meta().spacing);
      for (std::size_t z : planes) {
        const auto src = ref.plane(z);
        std::copy(src.begin(), src.end(), result.targets.plane(z).begin());
      }
      break;
    }
  }
  m.add("planes", join(planes));

  if (apply_closing) {
    if (cfg.mode == TargetMode::ScribbleOnly) {
      // Sparse planes: grow the closed bone scribbles into unlabeled pixels only.
      for (std::size_t z : planes) {
        auto slice = extract_slice(result.targets, z);
        const auto closed = close_mask(mask_of_label(slice, kBone), cfg.closing.element);
        std::size_t n = 0;
        for (std::size_t i = 0; i < slice.size(); ++i)
          if (closed.bits[i] && slice.data[i] == kUnlabeled) {
            slice.data[i] = kBone;
            ++n;
          }
        insert_slice(result.targets, z, slice);
        m.add(fmt::format("plane.{}.closed_pixels", z), std::to_string(n));
      }
    } else {
      const auto closed = close_dense_planes(result.targets, cfg.closing.element);
      for (std::size_t z : planes) {
        if (auto it = closed.find(z); it != closed.end())
          m.add(fmt::format("plane.{}.closed_pixels", z), std::to_string(it->second));
        else
          result.warnings.push_back(fmt::format("plane {} is not dense; closing skipped", z));
      }
    }
  }
  m.add("closing.applied", apply_closing ? "true" : "false");
  for (std::size_t i = 0; i < result.warnings.size(); ++i) m.add(fmt::format("warning.{}", i), result.warnings[i]);
  return result;
}

fs::path manifest_path_for(const fs::path& volume_path) {
  fs::path p = volume_path;
  if (p.extension() == ".vmeta" || p.extension() == ".raw") p.replace_extension();
  p += ".manifest";
  return p;
}

TargetResult run_target_generation(const PipelineConfig& cfg) {
  cfg.validate();
  std::optional<GrayVolume> gray;
  std::optional<ScribbleSet> scribbles;
  std::optional<LabelVolume> reference;
  if (!cfg.gray.empty()) gray = load_gray_volume(cfg.gray);
  if (!cfg.scribbles.empty()) scribbles = load_scribbles(cfg.scribbles);
  if (!cfg.reference.empty()) reference = load_label_volume(cfg.reference);

  TargetInputs in{gray ? &*gray : nullptr, scribbles ? &*scribbles : nullptr, reference ? &*reference : nullptr};
  auto result = build_targets(cfg, in);

  if (!cfg.gray.empty()) {
    const auto p = volume_paths(cfg.gray);
    result.manifest.add("input.gray.fnv1a64",
                        hex64(fnv1a64(hex64(file_fnv1a64(p.sidecar)) + hex64(file_fnv1a64(p.payload)))));
  }
  if (!cfg.scribbles.empty()) result.manifest.add("input.scribbles.fnv1a64", hex64(file_fnv1a64(cfg.scribbles)));
  if (!cfg.reference.empty()) {
    const auto p = volume_paths(cfg.reference);
    result.manifest.add("input.reference.fnv1a64",
                        hex64(fnv1a64(hex64(file_fnv1a64(p.sidecar)) + hex64(file_fnv1a64(p.payload)))));
  }

  fs::create_directories(cfg.output_dir);
  const auto target_path = cfg.output_dir / "targets.vmeta";
  save_volume(result.targets, target_path);
  const auto payload = volume_paths(target_path).payload;
  result.manifest.add("output.targets", "targets.vmeta");
  result.manifest.add("output.targets.fnv1a64", hex64(file_fnv1a64(payload)));
  result.manifest.write(manifest_path_for(target_path));
  return result;
}

DiceReport run_evaluation(const fs::path& pred, const fs::path& ref, const fs::path& out_path) {
  const auto p = load_label_volume(pred);
  const auto r = load_label_volume(ref);
  auto report = dice_report(p, r);
  const auto mpath = manifest_path_for(pred);
  if (fs::exists(mpath)) {
    const auto m = Manifest::read(mpath);
    for (const char* key : {"config_hash", "config.mode", "scribbles.coverage", "scribbles.records"})
      if (auto v = m.get(key)) report.extra[key] = *v;
  }
  if (!out_path.empty()) {
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_report(report, out_path);
  }
  return report;
}

CvSummary run_cv_summary(const std::vector<fs::path>& reports) {
  if (reports.empty()) throw ConfigError("cv-summary needs at least one report file");
  std::vector<DiceReport> loaded;
  loaded.reserve(reports.size());
  for (const auto& p : reports) loaded.push_back(read_report(p));
  return summarize_folds(loaded);
}

}  // namespace wsseg
