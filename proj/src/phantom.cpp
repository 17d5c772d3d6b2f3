#include "wsseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace wsseg {

void PhantomSpec::validate() const {
  Volume<float>::validate_dims(dims);
  const double half = static_cast<double>(std::min(dims.ny, dims.nx)) / 2.0;
  if (!(r_screw > 0.0 && r_screw < r_corrosion && r_corrosion < r_bone && r_bone <= half))
    throw ConfigError("phantom radii must satisfy 0 < r_screw < r_corrosion < r_bone <= min(ny,nx)/2");
  for (std::size_t i = 0; i < gray_means.size(); ++i) {
    if (!(gray_means[i] >= 0.0 && gray_means[i] <= 1.0)) throw ConfigError("phantom gray means must lie in [0,1]");
    for (std::size_t j = 0; j < i; ++j)
      if (gray_means[i] == gray_means[j]) throw ConfigError("phantom gray means must be pairwise distinct");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise sigma must be >= 0");
  if (bone_hole_count > 0 && !(hole_radius > 0.0)) throw ConfigError("hole radius must be > 0");
}

std::uint8_t phantom_label_at_radius(const PhantomSpec& spec, double r) {
  if (r < spec.r_screw) return kScrew;
  if (r < spec.r_corrosion) return kCorrodedScrew;
  if (r < spec.r_bone) return kBone;
  return kBackground;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const auto& d = spec.dims;
  const double cy = (static_cast<double>(d.ny) - 1.0) / 2.0;
  const double cx = (static_cast<double>(d.nx) - 1.0) / 2.0;

  LabelSlice plane_labels(d.ny, d.nx);
  for (std::size_t y = 0; y < d.ny; ++y)
    for (std::size_t x = 0; x < d.nx; ++x)
      plane_labels(y, x) = phantom_label_at_radius(spec, std::hypot(double(y) - cy, double(x) - cx));

  Phantom ph{GrayVolume(d, ValueKind::Gray), LabelVolume(d, ValueKind::Label)};
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> mean(d.plane_size());
  for (std::size_t z = 0; z < d.nz; ++z) {
    std::copy(plane_labels.data.begin(), plane_labels.data.end(), ph.labels.plane(z).begin());
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = spec.gray_means[plane_labels.data[i]];

    for (std::size_t h = 0; h < spec.bone_hole_count; ++h) {
      // Uniform by area over the bone annulus.
      const double r2lo = spec.r_corrosion * spec.r_corrosion;
      const double r2hi = spec.r_bone * spec.r_bone;
      const double r = std::sqrt(r2lo + unit(rng) * (r2hi - r2lo));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const double hy = cy + r * std::sin(phi);
      const double hx = cx + r * std::cos(phi);
      const auto y0 = static_cast<long>(std::floor(hy - spec.hole_radius));
      const auto x0 = static_cast<long>(std::floor(hx - spec.hole_radius));
      const auto y1 = static_cast<long>(std::ceil(hy + spec.hole_radius));
      const auto x1 = static_cast<long>(std::ceil(hx + spec.hole_radius));
      for (long y = std::max(0L, y0); y <= std::min<long>(y1, long(d.ny) - 1); ++y)
        for (long x = std::max(0L, x0); x <= std::min<long>(x1, long(d.nx) - 1); ++x) {
          const auto i = static_cast<std::size_t>(y) * d.nx + static_cast<std::size_t>(x);
          if (plane_labels.data[i] == kBone && std::hypot(double(y) - hy, double(x) - hx) <= spec.hole_radius)
            mean[i] = spec.gray_means[kBackground];
        }
    }

    auto out = ph.gray.plane(z);
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double v = spec.noise_sigma > 0.0 ? mean[i] + spec.noise_sigma * noise(rng) : mean[i];
      out[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return ph;
}

GeneratedScribbles generate_scribbles(const LabelVolume& labels, const ScribbleOptions& opts) {
  if (opts.z_stride == 0) throw ConfigError("z stride must be >= 1");
  if (!(opts.persistence >= 0.0 && opts.persistence <= 1.0)) throw ConfigError("stroke persistence must lie in [0,1]");
  const auto& d = labels.dims();
  std::mt19937_64 rng(opts.rng_seed);
  std::bernoulli_distribution keep_dir(opts.persistence);
  GeneratedScribbles out;
  std::vector<Scribble> records;

  for (std::size_t z = 0; z < d.nz; z += opts.z_stride) {
    const auto plane = labels.plane(z);
    if (std::find(plane.begin(), plane.end(), kUnlabeled) != plane.end())
      throw ConfigError("plane " + std::to_string(z) + " is not densely labeled");

    for (int label = 0; label < kNumClasses; ++label) {
      std::vector<std::size_t> region;
      for (std::size_t i = 0; i < plane.size(); ++i)
        if (plane[i] == label) region.push_back(i);
      if (region.empty()) {
        out.warnings.push_back("plane " + std::to_string(z) + ": label " + std::to_string(label) + " absent, skipped");
        continue;
      }
      std::set<std::size_t> visited;
      for (std::size_t s = 0; s < opts.strokes_per_label && opts.stroke_len > 0; ++s) {
        std::size_t cur = region[std::uniform_int_distribution<std::size_t>(0, region.size() - 1)(rng)];
        visited.insert(cur);
        int dir = -1;
        for (std::size_t step = 1; step < opts.stroke_len; ++step) {
          const std::size_t y = cur / d.nx;
          const std::size_t x = cur % d.nx;
          // 0 up, 1 down, 2 left, 3 right; -1 where the step leaves the region.
          std::array<std::ptrdiff_t, 4> nbr{-1, -1, -1, -1};
          if (y > 0 && plane[cur - d.nx] == label) nbr[0] = static_cast<std::ptrdiff_t>(cur - d.nx);
          if (y + 1 < d.ny && plane[cur + d.nx] == label) nbr[1] = static_cast<std::ptrdiff_t>(cur + d.nx);
          if (x > 0 && plane[cur - 1] == label) nbr[2] = static_cast<std::ptrdiff_t>(cur - 1);
          if (x + 1 < d.nx && plane[cur + 1] == label) nbr[3] = static_cast<std::ptrdiff_t>(cur + 1);
          const bool keep = dir >= 0 && nbr[dir] >= 0 && keep_dir(rng);
          if (!keep) {
            std::array<int, 4> open{};
            int n = 0;
            for (int k = 0; k < 4; ++k)
              if (nbr[k] >= 0) open[n++] = k;
            if (n == 0) break;
            dir = open[std::uniform_int_distribution<int>(0, n - 1)(rng)];
          }
          cur = static_cast<std::size_t>(nbr[dir]);
          visited.insert(cur);
        }
      }
      for (std::size_t i : visited) records.push_back({z, i / d.nx, i % d.nx, static_cast<std::uint8_t>(label)});
    }
  }
  out.scribbles = ScribbleSet(std::move(records));
  out.coverage = scribble_coverage(out.scribbles, d);
  return out;
}

double scribble_coverage(const ScribbleSet& scribbles, const Dims& dims) {
  const auto planes = scribbles.annotated_planes();
  if (planes.empty()) return 0.0;
  return static_cast<double>(scribbles.size()) / static_cast<double>(planes.size() * dims.plane_size());
}

}  // namespace wsseg
