#include "wsseg/morphology.hpp"

#include <algorithm>
#include <string>

namespace wsseg {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (ny != other.ny || nx != other.nx) throw ShapeError("mask shapes differ");
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] && !other.bits[i]) return false;
  return true;
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(ny, nx);
  for (std::size_t i = 0; i < bits.size(); ++i) out.bits[i] = bits[i] ? 0 : 1;
  return out;
}

BinaryMask mask_of_label(const LabelSlice& labels, std::uint8_t label) {
  BinaryMask m(labels.ny, labels.nx);
  for (std::size_t i = 0; i < labels.size(); ++i) m.bits[i] = labels.data[i] == label ? 1 : 0;
  return m;
}

ElementShape parse_element_shape(std::string_view name) {
  if (name == "disk") return ElementShape::Disk;
  if (name == "square") return ElementShape::Square;
  throw ConfigError("unknown structuring element shape '" + std::string(name) + "'");
}

std::string_view to_string(ElementShape shape) { return shape == ElementShape::Disk ? "disk" : "square"; }

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
  if (radius < 1) throw ConfigError("structuring element radius must be >= 1");
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (shape == ElementShape::Square || dy * dy + dx * dx <= radius * radius) out.emplace_back(dy, dx);
  return out;
}

namespace {

// Shared kernel: `any` selects dilation (some offset set) versus erosion
// (all offsets set).
BinaryMask apply(const BinaryMask& mask, const StructuringElement& se, Border border, bool any) {
  const auto offs = se.offsets();
  const bool outside = border == Border::Set;
  const auto ny = static_cast<long>(mask.ny);
  const auto nx = static_cast<long>(mask.nx);
  BinaryMask out(mask.ny, mask.nx);
  for (long y = 0; y < ny; ++y) {
    for (long x = 0; x < nx; ++x) {
      bool result = !any;
      for (const auto& [dy, dx] : offs) {
        const long yy = y + dy;
        const long xx = x + dx;
        const bool v = (yy < 0 || yy >= ny || xx < 0 || xx >= nx) ? outside : mask(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        if (v == any) {
          result = any;
          break;
        }
      }
      out.set(static_cast<std::size_t>(y), static_cast<std::size_t>(x), result);
    }
  }
  return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, Border border) {
  return apply(mask, se, border, true);
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, Border border) {
  return apply(mask, se, border, false);
}

BinaryMask close_mask(const BinaryMask& mask, const StructuringElement& se) {
  const auto pad = static_cast<std::size_t>(se.radius);
  BinaryMask padded(mask.ny + 2 * pad, mask.nx + 2 * pad);
  for (std::size_t y = 0; y < mask.ny; ++y)
    for (std::size_t x = 0; x < mask.nx; ++x) padded.set(y + pad, x + pad, mask(y, x));

  const auto closed = erode(dilate(padded, se), se);
  BinaryMask out(mask.ny, mask.nx);
  for (std::size_t y = 0; y < mask.ny; ++y)
    for (std::size_t x = 0; x < mask.nx; ++x) out.set(y, x, closed(y + pad, x + pad));
  return out;
}

LabelSlice close_bone_label(const LabelSlice& labels, const StructuringElement& se) {
  if (std::find(labels.data.begin(), labels.data.end(), kUnlabeled) != labels.data.end())
    throw RangeError("bone closing needs a dense label slice (found unlabeled pixels)");
  const auto closed = close_mask(mask_of_label(labels, kBone), se);
  LabelSlice out = labels;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (closed.bits[i] && out.data[i] == kBackground) out.data[i] = kBone;
  return out;
}

}  // namespace wsseg
