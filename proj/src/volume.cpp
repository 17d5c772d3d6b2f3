#include "wsseg/volume.hpp"

#include <algorithm>
#include <cmath>

namespace wsseg {

GrayVolume normalize_intensities(const GrayVolume& vol) {
  auto src = vol.data();
  for (float v : src)
    if (!std::isfinite(v)) throw RangeError("cannot normalize a volume containing non-finite values");

  std::vector<float> out(src.size(), 0.0f);
  if (!src.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(src.begin(), src.end());
    const double lo = *lo_it;
    const double range = static_cast<double>(*hi_it) - lo;
    if (range > 0.0) {
      std::transform(src.begin(), src.end(), out.begin(), [&](float v) {
        return static_cast<float>(std::clamp((static_cast<double>(v) - lo) / range, 0.0, 1.0));
      });
    }
  }
  return GrayVolume(vol.meta(), std::move(out));
}

bool is_normalized(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(),
                     [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

ScribbleSet::ScribbleSet(std::vector<Scribble> records) : records_(std::move(records)) {
  for (const auto& r : records_)
    if (!is_class_label(r.label))
      throw RangeError("scribble label " + std::to_string(r.label) + " is not a class label (0..3)");
  std::sort(records_.begin(), records_.end());
  records_.erase(std::unique(records_.begin(), records_.end()), records_.end());
  for (std::size_t i = 1; i < records_.size(); ++i) {
    const auto& a = records_[i - 1];
    const auto& b = records_[i];
    if (a.z == b.z && a.y == b.y && a.x == b.x)
      throw ConfigError("conflicting scribble labels at (" + std::to_string(a.z) + "," + std::to_string(a.y) + "," +
                        std::to_string(a.x) + ")");
  }
}

std::vector<std::size_t> ScribbleSet::annotated_planes() const {
  std::vector<std::size_t> planes;
  for (const auto& r : records_)
    if (planes.empty() || planes.back() != r.z) planes.push_back(r.z);
  return planes;
}

std::span<const Scribble> ScribbleSet::on_plane(std::size_t z) const {
  auto lo = std::lower_bound(records_.begin(), records_.end(), z, [](const Scribble& s, std::size_t v) { return s.z < v; });
  auto hi = std::upper_bound(lo, records_.end(), z, [](std::size_t v, const Scribble& s) { return v < s.z; });
  return {lo, hi};
}

void ScribbleSet::check_bounds(const Dims& dims) const {
  for (const auto& r : records_)
    if (r.z >= dims.nz || r.y >= dims.ny || r.x >= dims.nx)
      throw RangeError("scribble (" + std::to_string(r.z) + "," + std::to_string(r.y) + "," + std::to_string(r.x) +
                       ") outside volume bounds");
}

}  // namespace wsseg
