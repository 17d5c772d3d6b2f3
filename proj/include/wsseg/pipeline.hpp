#ifndef WSSEG_PIPELINE_HPP
#define WSSEG_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsseg/metrics.hpp"
#include "wsseg/morphology.hpp"
#include "wsseg/random_walker.hpp"
#include "wsseg/volume.hpp"

namespace wsseg {

/// Which training target is produced.
enum class TargetMode {
  DenseReference,  ///< reference labels passed through
  RandomWalk,      ///< scribbles propagated per annotated plane
  ScribbleOnly,    ///< scribbled voxels only, everything else unlabeled
};

TargetMode parse_target_mode(std::string_view name);
std::string_view to_string(TargetMode mode);

struct ClosingConfig {
  bool enabled = true;
  StructuringElement element;
  /// Closing is ignored in scribble-only mode unless this is set.
  bool allow_scribble = false;
};

struct PipelineConfig {
  std::filesystem::path gray;
  std::filesystem::path scribbles;
  std::filesystem::path reference;
  std::filesystem::path output_dir = ".";
  TargetMode mode = TargetMode::RandomWalk;
  RandomWalkerConfig rw;
  ClosingConfig closing;
  unsigned threads = 0;

  /// Applies one `key=value` setting; throws ConfigError on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Checks parameter ranges and that the inputs required by `mode` exist.
  void validate() const;
  /// Every key in a fixed order, one `key=value` per line.
  std::string canonical_text() const;
};

/// Reads a key=value file (`#` comments) on top of the defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t file_fnv1a64(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Ordered key=value provenance record.
class Manifest {
 public:
  void add(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string serialize() const;
  static Manifest parse(const std::string& text);
  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// In-memory inputs for target generation. Which members are needed depends on the mode.
struct TargetInputs {
  const GrayVolume* gray = nullptr;
  const ScribbleSet* scribbles = nullptr;
  const LabelVolume* reference = nullptr;
};

struct TargetResult {
  LabelVolume targets;
  Manifest manifest;
  std::vector<std::string> warnings;
};

/// Core of `targets`: builds the target volume without touching the filesystem.
TargetResult build_targets(const PipelineConfig& cfg, const TargetInputs& inputs);

/// Loads inputs named in cfg, builds the targets and writes
/// `<output_dir>/targets.{vmeta,raw}` plus `targets.manifest`.
TargetResult run_target_generation(const PipelineConfig& cfg);

/// Applies close_bone_label to every plane that carries no unlabeled pixels.
/// Returns the number of pixels relabeled per closed plane.
std::map<std::size_t, std::size_t> close_dense_planes(LabelVolume& labels, const StructuringElement& se);

std::filesystem::path manifest_path_for(const std::filesystem::path& volume_path);

/// Dice of pred against ref, written to out_path (if non-empty). Carries the
/// prediction's manifest coverage/config hash when one sits next to it.
DiceReport run_evaluation(const std::filesystem::path& pred, const std::filesystem::path& ref,
                          const std::filesystem::path& out_path);

CvSummary run_cv_summary(const std::vector<std::filesystem::path>& reports);

}  // namespace wsseg

#endif  // WSSEG_PIPELINE_HPP
