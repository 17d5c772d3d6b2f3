#ifndef WSSEG_MORPHOLOGY_HPP
#define WSSEG_MORPHOLOGY_HPP

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "wsseg/volume.hpp"

namespace wsseg {

/// Binary image; every element is 0 or 1.
struct BinaryMask {
  std::size_t ny = 0;
  std::size_t nx = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::size_t rows, std::size_t cols, bool fill = false) : ny(rows), nx(cols), bits(rows * cols, fill ? 1 : 0) {}

  bool operator()(std::size_t y, std::size_t x) const { return bits[y * nx + x] != 0; }
  void set(std::size_t y, std::size_t x, bool v = true) { bits[y * nx + x] = v ? 1 : 0; }
  std::size_t count() const;
  /// True when every set pixel of this mask is also set in `other`.
  bool subset_of(const BinaryMask& other) const;
  BinaryMask complement() const;

  bool operator==(const BinaryMask&) const = default;
};

BinaryMask mask_of_label(const LabelSlice& labels, std::uint8_t label);

enum class ElementShape { Disk, Square };

ElementShape parse_element_shape(std::string_view name);
std::string_view to_string(ElementShape shape);

struct StructuringElement {
  ElementShape shape = ElementShape::Disk;
  int radius = 2;

  /// (dy, dx) offsets, symmetric about and including the origin.
  /// Disk: dy^2 + dx^2 <= r^2. Square: max(|dy|, |dx|) <= r.
  std::vector<std::pair<int, int>> offsets() const;
};

/// Value assumed for pixels outside the image.
enum class Border { Unset, Set };

/// Pixel set iff some element offset lands on a set pixel.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, Border border = Border::Unset);
/// Pixel set iff every element offset lands on a set pixel; with Border::Unset
/// pixels whose neighbourhood leaves the image are cleared.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, Border border = Border::Unset);

/// Dilation followed by erosion, evaluated as if the image continued
/// indefinitely with unset pixels. This keeps the result extensive and
/// idempotent right up to the image border without growing anything there.
BinaryMask close_mask(const BinaryMask& mask, const StructuringElement& se);

/// Closes the bone mask and relabels newly covered background pixels as
/// bone. Other classes are never overwritten. Throws RangeError on unlabeled
/// pixels.
LabelSlice close_bone_label(const LabelSlice& labels, const StructuringElement& se);

}  // namespace wsseg

#endif  // WSSEG_MORPHOLOGY_HPP
