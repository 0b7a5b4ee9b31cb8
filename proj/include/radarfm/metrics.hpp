#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radarfm/scene.hpp"

namespace radarfm {

// Counting outcome for one (bin, sector) cell: TP = min(pred, truth),
// FP = max(0, pred - truth), FN = max(0, truth - pred). True negatives are
// never counted. At the single-scene level at most one of fp/fn is nonzero.
struct CellCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  CellCounts& operator+=(const CellCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

using CellCountsGrid = std::array<std::array<CellCounts, kSectorCount>, kBinCount>;

struct CellMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::uint64_t support = 0;  // ground-truth vehicles in the cell
  bool vacuous = false;       // no predictions and no ground truth anywhere
};

struct MeanMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int cells = 0;  // non-vacuous cells contributing to the mean
};

struct MetricsReport {
  std::array<std::array<CellMetrics, kSectorCount>, kBinCount> cells;
  std::array<MeanMetrics, kBinCount> per_bin;      // mean over sectors
  std::array<MeanMetrics, kSectorCount> per_sector;  // mean over bins
  std::size_t scene_count = 0;
  // Exact-match accuracies over scenes; vehicles never contribute here.
  std::optional<double> sign_accuracy;
  std::optional<double> walker_accuracy;
};

// Per-cell counting outcomes of one prediction against its ground truth.
CellCountsGrid cell_counts(const SceneDescriptor& pred, const SceneDescriptor& truth);

// The piecewise single-cell definitions: precision dips below 1 only when
// over-counting (then truth/pred), recall only when under-counting (then
// pred/truth); (0, 0) counts as a vacuous perfect match.
std::pair<double, double> cell_precision_recall_piecewise(std::uint32_t pred,
                                                          std::uint32_t truth);

// Micro-averaged dataset metrics: sums TP/FP/FN per cell across scenes, then
// applies the standard formulas per cell. A zero denominator yields 1.0;
// cells with tp = fp = fn = 0 are flagged vacuous and excluded from the
// per-bin / per-sector arithmetic means. Throws on an empty list.
MetricsReport micro_aggregate(const std::vector<CellCountsGrid>& scene_counts);

// Convenience wrapper over cell_counts + micro_aggregate that also fills the
// sign and walker exact-match accuracies.
MetricsReport evaluate_descriptors(const std::vector<SceneDescriptor>& preds,
                                   const std::vector<SceneDescriptor>& truths);

// CSV: one row per cell (bin, sector, tp, fp, fn, precision, recall, f1,
// support, vacuous flag).
void write_report_csv(const MetricsReport& r, const std::filesystem::path& path);

// JSON summary shaped like the per-bin / per-sector mean tables.
std::string report_summary_json(const MetricsReport& r, int indent = 2);

// Recomputes the per-bin / per-sector means from the per-cell values and
// compares against the stored means; returns false on any mismatch beyond
// 1e-12.
bool verify_report_means(const MetricsReport& r);

}  // namespace radarfm
