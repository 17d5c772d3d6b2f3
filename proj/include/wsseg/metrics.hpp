#ifndef WSSEG_METRICS_HPP
#define WSSEG_METRICS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wsseg/volume.hpp"

namespace wsseg {

/// Foreground classes reported, in table column order.
inline constexpr std::array<std::uint8_t, 3> kForegroundLabels{kBone, kCorrodedScrew, kScrew};

/// 2|A∩B| / (|A|+|B|) over two equally sized 0/1 sequences; 1.0 when both are empty.
double dice_mask(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref);

struct LabelCounts {
  std::size_t pred = 0;
  std::size_t ref = 0;
  std::size_t overlap = 0;
};

struct DiceReport {
  /// Bone, corroded screw, screw.
  std::array<double, 3> per_label{};
  /// Mean of the three foreground values; background is excluded.
  double total = 0.0;
  std::array<LabelCounts, 3> counts{};
  std::size_t evaluated_voxels = 0;
  /// Free-form key=value metadata carried into the serialized report.
  std::map<std::string, std::string> extra;

  static DiceReport from_per_label(double bone, double corroded, double screw);
};

double dice_from_counts(const LabelCounts& c);

/// Compares only voxels whose reference is labeled (ref != 255).
DiceReport dice_report(const LabelVolume& pred, const LabelVolume& ref);

struct FoldAggregate {
  double mean = 0.0;
  /// Population standard deviation (divides by n).
  double std = 0.0;
  std::size_t n_folds = 0;
};

FoldAggregate aggregate_folds(std::span<const double> values);

/// Table layout: header line `Total Bone CorrodedScrew Screw` and one row.
std::string format_report_table(const DiceReport& report);
/// Line-oriented key=value form, preceded by the table as `#` comment lines.
std::string serialize_report(const DiceReport& report);
/// Reads the key=value form; `#` lines are ignored.
DiceReport parse_report(const std::string& text);

void write_report(const DiceReport& report, const std::filesystem::path& path);
DiceReport read_report(const std::filesystem::path& path);

struct CvSummary {
  FoldAggregate total;
  std::array<FoldAggregate, 3> per_label;
};

CvSummary summarize_folds(std::span<const DiceReport> reports);
/// `mean ± std` per column in Total/Bone/CorrodedScrew/Screw order.
std::string format_cv_summary(const CvSummary& summary);

}  // namespace wsseg

#endif  // WSSEG_METRICS_HPP
