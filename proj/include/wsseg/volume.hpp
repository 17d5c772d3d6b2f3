#ifndef WSSEG_VOLUME_HPP
#define WSSEG_VOLUME_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsseg/error.hpp"

namespace wsseg {

/// Label taxonomy of the implant scans. 255 marks voxels without a target.
enum Label : std::uint8_t {
  kBackground = 0,
  kBone = 1,
  kCorrodedScrew = 2,
  kScrew = 3,
  kUnlabeled = 255,
};

inline constexpr int kNumClasses = 4;

constexpr bool is_class_label(std::uint8_t v) { return v < kNumClasses; }
constexpr bool is_valid_label(std::uint8_t v) { return v < kNumClasses || v == kUnlabeled; }

struct Dims {
  std::size_t nz = 1;
  std::size_t ny = 1;
  std::size_t nx = 1;

  std::size_t plane_size() const { return ny * nx; }
  std::size_t count() const { return nz * ny * nx; }
  bool operator==(const Dims&) const = default;
};

/// Voxel size in micrometres, (z, y, x).
struct Spacing {
  double z = 1.0;
  double y = 1.0;
  double x = 1.0;
  bool operator==(const Spacing&) const = default;
};

enum class ValueKind { Gray, Label };

struct VolumeMeta {
  Dims dims;
  std::optional<Spacing> spacing;
  ValueKind kind = ValueKind::Gray;

  bool operator==(const VolumeMeta&) const = default;
};

/// A single (ny x nx) plane, row-major.
template <typename T>
struct Slice {
  std::size_t ny = 0;
  std::size_t nx = 0;
  std::vector<T> data;

  Slice() = default;
  Slice(std::size_t rows, std::size_t cols, T fill = T{}) : ny(rows), nx(cols), data(rows * cols, fill) {}

  std::size_t size() const { return data.size(); }
  T& operator()(std::size_t y, std::size_t x) { return data[y * nx + x]; }
  const T& operator()(std::size_t y, std::size_t x) const { return data[y * nx + x]; }
  bool operator==(const Slice&) const = default;
};

using GraySlice = Slice<float>;
using LabelSlice = Slice<std::uint8_t>;

/// Dense volume stored z-major, then y, then x.
template <typename T>
class Volume {
 public:
  Volume() = default;
  Volume(VolumeMeta meta, std::vector<T> data) : meta_(std::move(meta)), data_(std::move(data)) {
    validate_dims(meta_.dims);
    if (data_.size() != meta_.dims.count())
      throw ShapeError("volume payload has " + std::to_string(data_.size()) + " elements, dims require " +
                       std::to_string(meta_.dims.count()));
  }
  Volume(Dims dims, ValueKind kind, T fill = T{}) : Volume(VolumeMeta{dims, std::nullopt, kind}, std::vector<T>(dims.count(), fill)) {}

  const VolumeMeta& meta() const { return meta_; }
  const Dims& dims() const { return meta_.dims; }
  void set_spacing(std::optional<Spacing> s) { meta_.spacing = s; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * meta_.dims.ny + y) * meta_.dims.nx + x;
  }
  T& at(std::size_t z, std::size_t y, std::size_t x) { return data_[index(z, y, x)]; }
  const T& at(std::size_t z, std::size_t y, std::size_t x) const { return data_[index(z, y, x)]; }

  std::span<const T> plane(std::size_t z) const { return std::span<const T>(data_).subspan(z * meta_.dims.plane_size(), meta_.dims.plane_size()); }
  std::span<T> plane(std::size_t z) { return std::span<T>(data_).subspan(z * meta_.dims.plane_size(), meta_.dims.plane_size()); }

  bool operator==(const Volume&) const = default;

  static void validate_dims(const Dims& d) {
    if (d.nz == 0 || d.ny == 0 || d.nx == 0) throw ShapeError("volume dims must all be >= 1");
  }

 private:
  VolumeMeta meta_;
  std::vector<T> data_;
};

using GrayVolume = Volume<float>;
using LabelVolume = Volume<std::uint8_t>;

/// Affine map of the whole volume onto [0,1]. A constant volume maps to zeros.
GrayVolume normalize_intensities(const GrayVolume& vol);

/// True when every value is finite and within [0,1].
bool is_normalized(std::span<const float> values);

/// Throws RangeError if z is not a valid plane index.
template <typename T>
Slice<T> extract_slice(const Volume<T>& vol, std::size_t z) {
  if (z >= vol.dims().nz)
    throw RangeError("plane " + std::to_string(z) + " out of range [0, " + std::to_string(vol.dims().nz) + ")");
  Slice<T> s;
  s.ny = vol.dims().ny;
  s.nx = vol.dims().nx;
  auto p = vol.plane(z);
  s.data.assign(p.begin(), p.end());
  return s;
}

template <typename T>
void insert_slice(Volume<T>& vol, std::size_t z, const Slice<T>& s) {
  if (z >= vol.dims().nz)
    throw RangeError("plane " + std::to_string(z) + " out of range [0, " + std::to_string(vol.dims().nz) + ")");
  if (s.ny != vol.dims().ny || s.nx != vol.dims().nx) throw ShapeError("slice shape does not match volume plane");
  std::copy(s.data.begin(), s.data.end(), vol.plane(z).begin());
}

/// One scribble seed: voxel coordinate plus class label (0..3).
struct Scribble {
  std::size_t z = 0;
  std::size_t y = 0;
  std::size_t x = 0;
  std::uint8_t label = kBackground;

  auto operator<=>(const Scribble&) const = default;
};

/// Sparse seed annotations. Records are kept sorted by (z, y, x) and unique.
class ScribbleSet {
 public:
  ScribbleSet() = default;
  /// Sorts, drops exact duplicates, and rejects conflicting labels at one voxel.
  explicit ScribbleSet(std::vector<Scribble> records);

  std::span<const Scribble> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Sorted list of distinct planes carrying at least one record.
  std::vector<std::size_t> annotated_planes() const;
  /// Records on plane z.
  std::span<const Scribble> on_plane(std::size_t z) const;

  /// Throws RangeError if a record lies outside dims.
  void check_bounds(const Dims& dims) const;

  bool operator==(const ScribbleSet&) const = default;

 private:
  std::vector<Scribble> records_;
};

}  // namespace wsseg

#endif  // WSSEG_VOLUME_HPP
