#ifndef WSSEG_IO_HPP
#define WSSEG_IO_HPP

#include <filesystem>

#include "wsseg/volume.hpp"

namespace wsseg {

/// On disk a volume is a text sidecar `<name>.vmeta` plus a little-endian
/// payload `<name>.raw` (f32 for gray, u8 for labels). Every function below
/// accepts `<name>`, `<name>.vmeta` or `<name>.raw`.
struct VolumePaths {
  std::filesystem::path sidecar;
  std::filesystem::path payload;
};

VolumePaths volume_paths(const std::filesystem::path& path);

/// Parses only the sidecar.
VolumeMeta read_volume_meta(const std::filesystem::path& path);

GrayVolume load_gray_volume(const std::filesystem::path& path);
LabelVolume load_label_volume(const std::filesystem::path& path);
void save_volume(const GrayVolume& vol, const std::filesystem::path& path);
void save_volume(const LabelVolume& vol, const std::filesystem::path& path);

/// Scribble text: one `z,y,x,label` record per line, `#` starts a comment line.
ScribbleSet load_scribbles(const std::filesystem::path& path);
void save_scribbles(const ScribbleSet& scribbles, const std::filesystem::path& path);

/// Binary PGM (P5); each value is mapped to floor(v * 255 + 0.5) after clamping to [0,1].
void export_slice_image(const GraySlice& slice, const std::filesystem::path& path);
/// Binary PPM (P6) with the black/red/green/blue palette, white for unlabeled.
void export_slice_image(const LabelSlice& slice, const std::filesystem::path& path);

std::array<std::uint8_t, 3> label_color(std::uint8_t label);

}  // namespace wsseg

#endif  // WSSEG_IO_HPP
