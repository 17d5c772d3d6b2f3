// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracle/dense_random_walker.hpp"
#include "wsseg/metrics.hpp"
#include "wsseg/morphology.hpp"
#include "wsseg/phantom.hpp"
#include "wsseg/pipeline.hpp"
#include "wsseg/random_walker.hpp"

using namespace wsseg;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

void info(const std::string& line) { std::printf("  %s\n", line.c_str()); }

std::string fmt_double(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LabelVolume plane_volume(std::span<const std::uint8_t> plane, std::size_t ny, std::size_t nx) {
  return LabelVolume(VolumeMeta{{1, ny, nx}, std::nullopt, ValueKind::Label},
                     std::vector<std::uint8_t>(plane.begin(), plane.end()));
}

/// Reference restricted to the given planes; everything else unlabeled.
LabelVolume restrict_to_planes(const LabelVolume& ref, const std::vector<std::size_t>& planes) {
  LabelVolume out(ref.dims(), ValueKind::Label, kUnlabeled);
  for (std::size_t z : planes) {
    const auto src = ref.plane(z);
    std::copy(src.begin(), src.end(), out.plane(z).begin());
  }
  return out;
}

void oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  const double betas[] = {0.0, 90.0, 130.0};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t ny = 0, nx = 0;
    do {
      ny = 1 + rng() % 8;
      nx = 1 + rng() % 8;
    } while (ny * nx < 4);
    GraySlice s(ny, nx);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (auto& v : s.data) v = u(rng);
    s.data[rng() % s.size()] = 0.0f;
    s.data[rng() % s.size()] = 1.0f;

    RandomWalkerConfig cfg;
    cfg.beta = betas[trial % 3];
    const std::size_t n_seeds = 2 + rng() % 3;
    std::vector<std::uint8_t> seeds(s.size(), kUnlabeled);
    std::vector<std::size_t> order(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n_seeds; ++k) seeds[order[k]] = static_cast<std::uint8_t>(rng() % kNumClasses);

    const auto lap = assemble_laplacian(edge_weights(s, cfg), s.size());
    const auto sol = solve_dirichlet(lap, seeds, cfg);
    const auto ref = oracle::random_walker(s.data, ny, nx, seeds, cfg.beta, cfg.weight_floor);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int l = 0; l < kNumClasses; ++l) worst = std::max(worst, std::abs(sol.potentials(i, l) - ref[i][l]));
  }
  const double secs = seconds_since(t0);
  report(worst <= 1e-5 && secs < 10.0, "oracle_equivalence",
         "100 slices, max |CG - direct| = " + fmt_double("%.3e", worst) + " (<= 1e-5), runtime " +
             fmt_double("%.2f", secs) + " s (< 10 s)");
}

struct PlaneRun {
  std::size_t z;
  GraySlice gray;
  std::vector<SliceSeed> seeds;
  SlicePropagation out;
};

/// Propagates every annotated plane of the default 40x128x128 phantom.
std::vector<PlaneRun> default_phantom_runs(const RandomWalkerConfig& cfg) {
  PhantomSpec spec;
  spec.rng_seed = 1;
  const auto ph = generate_phantom(spec);
  ScribbleOptions so;
  so.rng_seed = 1;
  const auto scr = generate_scribbles(ph.labels, so).scribbles;
  const auto gray = normalize_intensities(ph.gray);
  std::vector<PlaneRun> runs;
  for (std::size_t z : scr.annotated_planes()) {
    PlaneRun r{z, extract_slice(gray, z), seeds_on_plane(scr, z), {}};
    r.out = propagate_slice(r.gray, r.seeds, cfg);
    runs.push_back(std::move(r));
  }
  return runs;
}

void simplex_and_seed_fidelity(const std::vector<PlaneRun>& runs) {
  double worst_sum = 0.0, min_p = 1.0, max_p = 0.0;
  std::size_t bad_seed_labels = 0, bad_seed_potentials = 0, seeds = 0;
  for (const auto& r : runs) {
    const auto& pm = r.out.potentials;
    for (std::size_t i = 0; i < pm.n_pixels; ++i) {
      double sum = 0.0;
      for (int l = 0; l < kNumClasses; ++l) {
        sum += pm(i, l);
        min_p = std::min(min_p, pm(i, l));
        max_p = std::max(max_p, pm(i, l));
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    for (const auto& s : r.seeds) {
      ++seeds;
      const std::size_t i = s.y * r.gray.nx + s.x;
      if (r.out.labels(s.y, s.x) != s.label) ++bad_seed_labels;
      for (int l = 0; l < kNumClasses; ++l)
        if (pm(i, l) != (l == s.label ? 1.0 : 0.0)) ++bad_seed_potentials;
    }
  }
  const bool ok = worst_sum <= 1e-5 && min_p >= 0.0 && max_p <= 1.0 + 1e-7 && bad_seed_labels == 0 &&
                  bad_seed_potentials == 0 && !runs.empty();
  report(ok, "simplex_seed_fidelity",
         std::to_string(runs.size()) + " planes of a 40x128x128 phantom, max |sum-1| = " +
             fmt_double("%.2e", worst_sum) + ", potentials in [" + fmt_double("%.3g", min_p) + ", " +
             fmt_double("%.17g", max_p) + "], " + std::to_string(seeds) + " scribbles, " +
             std::to_string(bad_seed_labels) + " relabeled, " + std::to_string(bad_seed_potentials) +
             " non-indicator seed potentials");
}

void harmonicity(const std::vector<PlaneRun>& runs, const RandomWalkerConfig& cfg) {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  std::size_t sampled = 0;
  std::vector<std::vector<Edge>> edges_of;
  for (const auto& r : runs) edges_of.push_back(edge_weights(r.gray, cfg));
  std::size_t attempts = 0;
  while (sampled < 1000 && attempts < 1000000) {
    ++attempts;
    const std::size_t k = rng() % runs.size();
    const auto& r = runs[k];
    const std::size_t n = r.gray.size();
    const std::size_t i = rng() % n;
    if (std::any_of(r.seeds.begin(), r.seeds.end(), [&](const SliceSeed& s) { return s.y * r.gray.nx + s.x == i; }))
      continue;
    const auto& edges = edges_of[k];
    double wsum = 0.0;
    std::array<double, kNumClasses> avg{};
    for (const auto& e : edges) {
      if (e.a != i && e.b != i) continue;
      const std::size_t j = e.a == i ? e.b : e.a;
      wsum += e.weight;
      for (int l = 0; l < kNumClasses; ++l) avg[l] += e.weight * r.out.potentials(j, l);
    }
    for (int l = 0; l < kNumClasses; ++l)
      worst = std::max(worst, std::abs(r.out.potentials(i, l) - avg[l] / wsum));
    ++sampled;
  }
  report(sampled == 1000 && worst <= 10 * cfg.solver_tol, "harmonicity",
         std::to_string(sampled) + " unseeded pixels, max |x - weighted neighbour mean| = " + fmt_double("%.3e", worst) +
             " (<= " + fmt_double("%.0e", 10 * cfg.solver_tol) + ")");
}

void phantom_quality() {
  const RandomWalkerConfig cfg;
  double worst = 1.0, min_cov = 1.0, sum = 0.0;
  std::size_t planes = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    PhantomSpec spec;
    spec.rng_seed = seed;
    spec.noise_sigma = 0.05;
    const auto ph = generate_phantom(spec);
    ScribbleOptions so;
    so.rng_seed = seed;
    const auto scr = generate_scribbles(ph.labels, so).scribbles;
    const auto prop = propagate_annotated_slices(normalize_intensities(ph.gray), scr, cfg);
    const auto& d = spec.dims;
    for (const auto& p : prop.planes) {
      const double cov = static_cast<double>(p.scribbles) / static_cast<double>(d.plane_size());
      min_cov = std::min(min_cov, cov);
      const double dice = dice_report(plane_volume(prop.labels.plane(p.z), d.ny, d.nx),
                                      plane_volume(ph.labels.plane(p.z), d.ny, d.nx))
                              .total;
      worst = std::min(worst, dice);
      sum += dice;
      ++planes;
    }
  }

  // Step image: left half 0.2, right half 0.8, one scribble per side, beta 90, no noise.
  RandomWalkerConfig step_cfg;
  step_cfg.beta = 90.0;
  const std::size_t ny = 16, nx = 16;
  GraySlice step(ny, nx);
  LabelSlice truth(ny, nx);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      step(y, x) = x < nx / 2 ? 0.2f : 0.8f;
      truth(y, x) = x < nx / 2 ? kBone : kScrew;
    }
  const std::vector<SliceSeed> seeds{{3, 2, kBone}, {12, 13, kScrew}};
  const auto out = propagate_slice(step, seeds, step_cfg);
  double step_dice = 1.0;
  for (std::uint8_t lab : {kBone, kScrew}) {
    std::vector<std::uint8_t> a(step.size()), b(step.size());
    for (std::size_t i = 0; i < step.size(); ++i) {
      a[i] = out.labels.data[i] == lab;
      b[i] = truth.data[i] == lab;
    }
    step_dice = std::min(step_dice, dice_mask(a, b));
  }

  const bool ok = planes > 0 && min_cov >= 0.01 && worst >= 0.90 && step_dice == 1.0;
  report(ok, "phantom_quality",
         std::to_string(planes) + " planes at sigma 0.05, coverage >= " + fmt_double("%.4f", min_cov) +
             ", foreground-mean Dice min " + fmt_double("%.4f", worst) + " mean " + fmt_double("%.4f", sum / planes) +
             " (>= 0.90); step image Dice " + fmt_double("%.4f", step_dice) + " (= 1.0)");

  // Noise-free default phantom, for context only.
  PhantomSpec clean;
  clean.noise_sigma = 0.0;
  const auto ph = generate_phantom(clean);
  const auto scr = generate_scribbles(ph.labels, ScribbleOptions{}).scribbles;
  const auto prop = propagate_annotated_slices(normalize_intensities(ph.gray), scr, cfg);
  double clean_min = 1.0;
  for (const auto& p : prop.planes)
    clean_min = std::min(clean_min, dice_report(plane_volume(prop.labels.plane(p.z), clean.dims.ny, clean.dims.nx),
                                                plane_volume(ph.labels.plane(p.z), clean.dims.ny, clean.dims.nx))
                                        .total);
  info("noise-free default phantom: per-plane Dice min " + fmt_double("%.4f", clean_min));
}

void closing_benefit() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t fold = 0; fold < 4; ++fold) {
    PhantomSpec spec;
    spec.rng_seed = 100 + fold;
    spec.bone_hole_count = 8;
    const auto ph = generate_phantom(spec);
    ScribbleOptions so;
    so.rng_seed = 100 + fold;
    const auto scr = generate_scribbles(ph.labels, so).scribbles;
    const auto ref = restrict_to_planes(ph.labels, scr.annotated_planes());

    PipelineConfig cfg;
    cfg.closing.enabled = false;
    const double open = dice_report(build_targets(cfg, {&ph.gray, &scr, nullptr}).targets, ref).per_label[0];
    cfg.closing.enabled = true;
    const double closed = dice_report(build_targets(cfg, {&ph.gray, &scr, nullptr}).targets, ref).per_label[0];
    ok = ok && closed >= open;
    detail += (fold ? ", " : "") + std::string("fold ") + std::to_string(fold) + " " + fmt_double("%.4f", open) +
              " -> " + fmt_double("%.4f", closed);
  }
  report(ok, "closing_benefit", "bone Dice without -> with closing: " + detail);
}

void table_arithmetic() {
  struct Row {
    const char* name;
    double total, bone, corroded, screw;
  };
  const Row rows[] = {
      {"Dense annotation / No", 0.750, 0.825, 0.538, 0.888},
      {"Dense annotation / Yes", 0.703, 0.756, 0.472, 0.880},
      {"Random walk / No", 0.687, 0.743, 0.415, 0.905},
      {"Random walk / Yes", 0.751, 0.798, 0.541, 0.916},
      {"Scribble / No", 0.482, 0.568, 0.293, 0.585},
  };
  bool ok = true;
  double worst = 0.0;
  for (const auto& r : rows) {
    const double total = DiceReport::from_per_label(r.bone, r.corroded, r.screw).total;
    const double diff = std::abs(total - r.total);
    worst = std::max(worst, diff);
    const bool row_ok = diff <= 0.0005;
    ok = ok && row_ok;
    info(std::string(r.name) + ": mean " + fmt_double("%.5f", total) + " vs published " + fmt_double("%.3f", r.total) +
         ", |diff| " + fmt_double("%.5f", diff) + (row_ok ? "" : " (exceeds 0.0005)"));
  }
  report(ok, "table_total_arithmetic", "5 rows, max |foreground mean - Total| = " + fmt_double("%.5f", worst) +
                                           " (<= 0.0005)");
}

void morphology_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(4321);
  std::size_t violations = 0;
  const StructuringElement elements[] = {{ElementShape::Disk, 1}, {ElementShape::Square, 1}, {ElementShape::Disk, 2}};
  for (int trial = 0; trial < 300; ++trial) {
    const auto& se = elements[trial % 3];
    const std::size_t ny = 1 + rng() % 16, nx = 1 + rng() % 16;
    BinaryMask big(ny, nx), small(ny, nx);
    std::bernoulli_distribution on(0.5), keep(0.6);
    for (std::size_t i = 0; i < big.bits.size(); ++i) {
      big.bits[i] = on(rng);
      small.bits[i] = big.bits[i] && keep(rng);
    }
    const auto cb = close_mask(big, se);
    const auto cs = close_mask(small, se);
    violations += !big.subset_of(cb);
    violations += !(close_mask(cb, se) == cb);
    violations += !cs.subset_of(cb);
  }
  std::size_t duality = 0;
  const StructuringElement disk1{ElementShape::Disk, 1};
  for (unsigned code = 0; code < 512; ++code) {
    BinaryMask m(3, 3);
    for (unsigned b = 0; b < 9; ++b) m.bits[b] = (code >> b) & 1u;
    duality += !(dilate(m, disk1) == erode(m.complement(), disk1, Border::Set).complement());
    duality += !(erode(m, disk1) == dilate(m.complement(), disk1, Border::Set).complement());
  }
  const double secs = seconds_since(t0);
  report(violations == 0 && duality == 0 && secs < 1.0, "morphology_properties",
         "300 random masks: " + std::to_string(violations) + " extensive/idempotent/monotone violations; 512 3x3 masks: " +
             std::to_string(duality) + " duality violations; runtime " + fmt_double("%.3f", secs) + " s (< 1 s)");
}

}  // namespace

int main() {
  try {
    oracle_equivalence();
    const RandomWalkerConfig cfg;
    const auto runs = default_phantom_runs(cfg);
    simplex_and_seed_fidelity(runs);
    harmonicity(runs, cfg);
    phantom_quality();
    closing_benefit();
    table_arithmetic();
    morphology_suite();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance: unexpected exception: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
