#ifndef WSSEG_PHANTOM_HPP
#define WSSEG_PHANTOM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wsseg/volume.hpp"

namespace wsseg {

/// Synthetic screw-in-bone volume: concentric axial cylinders centred in-plane.
struct PhantomSpec {
  Dims dims{40, 128, 128};
  double r_screw = 12.0;
  double r_corrosion = 28.0;
  double r_bone = 44.0;
  /// Gray mean per class, indexed by label.
  std::array<double, kNumClasses> gray_means{0.10, 0.45, 0.55, 0.90};
  double noise_sigma = 0.05;
  /// Background-valued disks punched into the bone gray values of every plane.
  /// The label stays bone underneath.
  std::size_t bone_hole_count = 0;
  double hole_radius = 3.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Phantom {
  GrayVolume gray;
  LabelVolume labels;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Ground-truth class at in-plane radius r from the phantom axis.
std::uint8_t phantom_label_at_radius(const PhantomSpec& spec, double r);

struct ScribbleOptions {
  std::size_t z_stride = 10;
  std::size_t strokes_per_label = 32;
  std::size_t stroke_len = 8;
  /// Probability that a stroke keeps its previous direction when it can.
  double persistence = 0.0;
  std::uint64_t rng_seed = 0;
};

struct GeneratedScribbles {
  ScribbleSet scribbles;
  std::vector<std::string> warnings;
  /// records / pixels of the annotated planes.
  double coverage = 0.0;
};

/// Random 4-connected walks confined to each label's region on every plane
/// z = 0, z_stride, 2 z_stride, ... Labels absent from a plane are skipped
/// with a warning.
GeneratedScribbles generate_scribbles(const LabelVolume& labels, const ScribbleOptions& opts);

/// Fraction of annotated-plane pixels carrying a scribble.
double scribble_coverage(const ScribbleSet& scribbles, const Dims& dims);

}  // namespace wsseg

#endif  // WSSEG_PHANTOM_HPP
