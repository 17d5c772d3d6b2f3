#include "wsseg/metrics.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace wsseg {

namespace {

constexpr std::array<std::string_view, 3> kColumnKeys{"bone", "corroded_screw", "screw"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw IoError("report key '" + key + "' has non-numeric value '" + v + "'");
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto d = std::stoull(v, &used);
    if (used == v.size()) return static_cast<std::size_t>(d);
  } catch (const std::logic_error&) {
  }
  throw IoError("report key '" + key + "' has non-integer value '" + v + "'");
}

}  // namespace

double dice_mask(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref) {
  if (pred.size() != ref.size()) throw ShapeError("dice operands differ in size");
  LabelCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] != 0;
    const bool b = ref[i] != 0;
    c.pred += a;
    c.ref += b;
    c.overlap += a && b;
  }
  return dice_from_counts(c);
}

double dice_from_counts(const LabelCounts& c) {
  if (c.pred + c.ref == 0) return 1.0;
  return 2.0 * static_cast<double>(c.overlap) / static_cast<double>(c.pred + c.ref);
}

DiceReport DiceReport::from_per_label(double bone, double corroded, double screw) {
  DiceReport r;
  r.per_label = {bone, corroded, screw};
  r.total = (bone + corroded + screw) / 3.0;
  return r;
}

DiceReport dice_report(const LabelVolume& pred, const LabelVolume& ref) {
  if (pred.dims() != ref.dims()) throw ShapeError("prediction and reference dims differ");
  DiceReport report;
  const auto p = pred.data();
  const auto r = ref.data();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == kUnlabeled) continue;
    ++report.evaluated_voxels;
    for (std::size_t k = 0; k < kForegroundLabels.size(); ++k) {
      const bool a = p[i] == kForegroundLabels[k];
      const bool b = r[i] == kForegroundLabels[k];
      report.counts[k].pred += a;
      report.counts[k].ref += b;
      report.counts[k].overlap += a && b;
    }
  }
  if (report.evaluated_voxels == 0) throw RangeError("reference volume has no labeled voxels");
  for (std::size_t k = 0; k < 3; ++k) report.per_label[k] = dice_from_counts(report.counts[k]);
  report.total = (report.per_label[0] + report.per_label[1] + report.per_label[2]) / 3.0;
  return report;
}

FoldAggregate aggregate_folds(std::span<const double> values) {
  if (values.empty()) throw ConfigError("cannot aggregate an empty list of fold values");
  FoldAggregate agg;
  agg.n_folds = values.size();
  const double n = static_cast<double>(values.size());
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.std = std::sqrt(ss / n);
  return agg;
}

std::string format_report_table(const DiceReport& report) {
  std::string out = fmt::format("{:>8} {:>8} {:>14} {:>8}\n", "Total", "Bone", "CorrodedScrew", "Screw");
  out += fmt::format("{:>8.3f} {:>8.3f} {:>14.3f} {:>8.3f}\n", report.total, report.per_label[0], report.per_label[1],
                     report.per_label[2]);
  return out;
}

std::string serialize_report(const DiceReport& report) {
  std::string out;
  std::istringstream table(format_report_table(report));
  for (std::string line; std::getline(table, line);) out += "# " + line + "\n";
  out += fmt::format("total={:.17g}\n", report.total);
  for (std::size_t k = 0; k < 3; ++k) out += fmt::format("{}={:.17g}\n", kColumnKeys[k], report.per_label[k]);
  for (std::size_t k = 0; k < 3; ++k) {
    out += fmt::format("{}.pred_voxels={}\n", kColumnKeys[k], report.counts[k].pred);
    out += fmt::format("{}.ref_voxels={}\n", kColumnKeys[k], report.counts[k].ref);
    out += fmt::format("{}.overlap_voxels={}\n", kColumnKeys[k], report.counts[k].overlap);
  }
  out += fmt::format("evaluated_voxels={}\n", report.evaluated_voxels);
  for (const auto& [k, v] : report.extra) out += fmt::format("meta.{}={}\n", k, v);
  return out;
}

DiceReport parse_report(const std::string& text) {
  DiceReport report;
  std::array<bool, 4> seen{};
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed report line '" + line + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "total") {
      report.total = to_double(key, value);
      seen[0] = true;
    } else if (key == "evaluated_voxels") {
      report.evaluated_voxels = to_size(key, value);
    } else if (key.starts_with("meta.")) {
      report.extra[key.substr(5)] = value;
    } else {
      bool known = false;
      for (std::size_t k = 0; k < 3 && !known; ++k) {
        const std::string col(kColumnKeys[k]);
        if (key == col) {
          report.per_label[k] = to_double(key, value);
          seen[k + 1] = true;
        } else if (key == col + ".pred_voxels") {
          report.counts[k].pred = to_size(key, value);
        } else if (key == col + ".ref_voxels") {
          report.counts[k].ref = to_size(key, value);
        } else if (key == col + ".overlap_voxels") {
          report.counts[k].overlap = to_size(key, value);
        } else {
          continue;
        }
        known = true;
      }
      if (!known) throw IoError("unknown report key '" + key + "'");
    }
  }
  for (bool s : seen)
    if (!s) throw IoError("report lacks one of total/bone/corroded_screw/screw");
  return report;
}

void write_report(const DiceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write report " + path.string());
  out << serialize_report(report);
  if (!out) throw IoError("write failed for " + path.string());
}

DiceReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_report(s.str());
}

CvSummary summarize_folds(std::span<const DiceReport> reports) {
  if (reports.empty()) throw ConfigError("cv summary needs at least one report");
  CvSummary summary;
  std::vector<double> column(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) column[i] = reports[i].total;
  summary.total = aggregate_folds(column);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < reports.size(); ++i) column[i] = reports[i].per_label[k];
    summary.per_label[k] = aggregate_folds(column);
  }
  return summary;
}

std::string format_cv_summary(const CvSummary& summary) {
  auto cell = [](const FoldAggregate& a) { return fmt::format("{:.3f} ± {:.3f}", a.mean, a.std); };
  std::string out = fmt::format("{:<16} {:<16} {:<16} {:<16}\n", "Total", "Bone", "CorrodedScrew", "Screw");
  out += fmt::format("{:<16} {:<16} {:<16} {:<16}\n", cell(summary.total), cell(summary.per_label[0]),
                     cell(summary.per_label[1]), cell(summary.per_label[2]));
  out += fmt::format("folds={}\n", summary.total.n_folds);
  return out;
}

}  // namespace wsseg
