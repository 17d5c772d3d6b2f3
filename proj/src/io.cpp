#include "wsseg/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace wsseg {
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("invalid " + what + ": '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("invalid " + what + ": '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IoError("invalid " + what + ": '" + s + "'");
  }
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const void* data, std::size_t n) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed for " + p.string());
}

void write_sidecar(const VolumeMeta& meta, const fs::path& p) {
  std::ostringstream s;
  s << "dims=" << meta.dims.nz << ',' << meta.dims.ny << ',' << meta.dims.nx << '\n';
  s << "kind=" << (meta.kind == ValueKind::Gray ? "gray" : "label") << '\n';
  if (meta.spacing) {
    s.precision(17);
    s << "spacing=" << meta.spacing->z << ',' << meta.spacing->y << ',' << meta.spacing->x << '\n';
  }
  const auto text = s.str();
  write_bytes(p, text.data(), text.size());
}

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

float decode_f32_le(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<std::uint8_t>(p[i]);
  return std::bit_cast<float>(bits);
}

void encode_f32_le(float v, char* p) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i, bits >>= 8) p[i] = static_cast<char>(bits & 0xffu);
}

void expect_kind(const VolumeMeta& meta, ValueKind want, const fs::path& p) {
  if (meta.kind != want)
    throw IoError(p.string() + ": expected kind=" + (want == ValueKind::Gray ? "gray" : "label"));
}

}  // namespace

VolumePaths volume_paths(const fs::path& path) {
  fs::path stem = path;
  if (path.extension() == ".vmeta" || path.extension() == ".raw") stem.replace_extension();
  fs::path sidecar = stem;
  sidecar += ".vmeta";
  fs::path payload = stem;
  payload += ".raw";
  return {sidecar, payload};
}

VolumeMeta read_volume_meta(const fs::path& path) {
  const auto paths = volume_paths(path);
  std::ifstream in(paths.sidecar);
  if (!in) throw IoError("cannot open sidecar " + paths.sidecar.string());

  VolumeMeta meta;
  bool have_dims = false;
  bool have_kind = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(paths.sidecar.string() + ": malformed line '" + line + "'");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (key == "dims") {
      const auto parts = split(value, ',');
      if (parts.size() != 3) throw IoError("dims needs three values");
      meta.dims = {parse_size(parts[0], "dims"), parse_size(parts[1], "dims"), parse_size(parts[2], "dims")};
      have_dims = true;
    } else if (key == "kind") {
      if (value == "gray")
        meta.kind = ValueKind::Gray;
      else if (value == "label")
        meta.kind = ValueKind::Label;
      else
        throw IoError("unknown kind '" + value + "'");
      have_kind = true;
    } else if (key == "spacing") {
      const auto parts = split(value, ',');
      if (parts.size() != 3) throw IoError("spacing needs three values");
      meta.spacing = Spacing{parse_double(parts[0], "spacing"), parse_double(parts[1], "spacing"),
                             parse_double(parts[2], "spacing")};
    } else {
      throw IoError(paths.sidecar.string() + ": unknown key '" + key + "'");
    }
  }
  if (!have_dims || !have_kind) throw IoError(paths.sidecar.string() + ": dims and kind are required");
  GrayVolume::validate_dims(meta.dims);
  return meta;
}

GrayVolume load_gray_volume(const fs::path& path) {
  const auto meta = read_volume_meta(path);
  expect_kind(meta, ValueKind::Gray, path);
  const auto bytes = read_bytes(volume_paths(path).payload);
  if (bytes.size() != meta.dims.count() * 4)
    throw ShapeError("payload holds " + std::to_string(bytes.size() / 4.0) + " f32 values, dims require " +
                     std::to_string(meta.dims.count()));
  std::vector<float> data(meta.dims.count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = decode_f32_le(bytes.data() + 4 * i);
    if (!std::isfinite(data[i])) throw RangeError("non-finite value at element " + std::to_string(i));
  }
  return GrayVolume(meta, std::move(data));
}

LabelVolume load_label_volume(const fs::path& path) {
  const auto meta = read_volume_meta(path);
  expect_kind(meta, ValueKind::Label, path);
  const auto bytes = read_bytes(volume_paths(path).payload);
  if (bytes.size() != meta.dims.count())
    throw ShapeError("payload holds " + std::to_string(bytes.size()) + " labels, dims require " +
                     std::to_string(meta.dims.count()));
  std::vector<std::uint8_t> data(bytes.begin(), bytes.end());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!is_valid_label(data[i]))
      throw RangeError("invalid label " + std::to_string(data[i]) + " at element " + std::to_string(i));
  return LabelVolume(meta, std::move(data));
}

void save_volume(const GrayVolume& vol, const fs::path& path) {
  const auto paths = volume_paths(path);
  auto meta = vol.meta();
  meta.kind = ValueKind::Gray;
  std::vector<char> bytes(vol.data().size() * 4);
  for (std::size_t i = 0; i < vol.data().size(); ++i) encode_f32_le(vol.data()[i], bytes.data() + 4 * i);
  write_bytes(paths.payload, bytes.data(), bytes.size());
  write_sidecar(meta, paths.sidecar);
}

void save_volume(const LabelVolume& vol, const fs::path& path) {
  const auto paths = volume_paths(path);
  auto meta = vol.meta();
  meta.kind = ValueKind::Label;
  write_bytes(paths.payload, vol.data().data(), vol.data().size());
  write_sidecar(meta, paths.sidecar);
}

ScribbleSet load_scribbles(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scribble file " + path.string());
  std::vector<Scribble> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() != 4)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected z,y,x,label");
    const auto label = parse_size(parts[3], "label");
    if (label >= kNumClasses) throw RangeError(path.string() + ":" + std::to_string(lineno) + ": label must be 0..3");
    records.push_back({parse_size(parts[0], "z"), parse_size(parts[1], "y"), parse_size(parts[2], "x"),
                       static_cast<std::uint8_t>(label)});
  }
  return ScribbleSet(std::move(records));
}

void save_scribbles(const ScribbleSet& scribbles, const fs::path& path) {
  std::ostringstream s;
  s << "# z,y,x,label\n";
  for (const auto& r : scribbles.records()) s << r.z << ',' << r.y << ',' << r.x << ',' << int(r.label) << '\n';
  const auto text = s.str();
  write_bytes(path, text.data(), text.size());
}

std::array<std::uint8_t, 3> label_color(std::uint8_t label) {
  switch (label) {
    case kBackground: return {0, 0, 0};
    case kBone: return {255, 0, 0};
    case kCorrodedScrew: return {0, 255, 0};
    case kScrew: return {0, 0, 255};
    case kUnlabeled: return {255, 255, 255};
    default: throw RangeError("no palette entry for label " + std::to_string(label));
  }
}

void export_slice_image(const GraySlice& slice, const fs::path& path) {
  std::string out = "P5\n" + std::to_string(slice.nx) + " " + std::to_string(slice.ny) + "\n255\n";
  const auto header = out.size();
  out.resize(header + slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const double v = std::isfinite(slice.data[i]) ? std::clamp(double(slice.data[i]), 0.0, 1.0) : 0.0;
    out[header + i] = static_cast<char>(static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)));
  }
  write_bytes(path, out.data(), out.size());
}

void export_slice_image(const LabelSlice& slice, const fs::path& path) {
  std::string out = "P6\n" + std::to_string(slice.nx) + " " + std::to_string(slice.ny) + "\n255\n";
  const auto header = out.size();
  out.resize(header + 3 * slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const auto c = label_color(slice.data[i]);
    std::memcpy(out.data() + header + 3 * i, c.data(), 3);
  }
  write_bytes(path, out.data(), out.size());
}

}  // namespace wsseg
