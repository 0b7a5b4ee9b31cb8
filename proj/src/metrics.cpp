#include "radarfm/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace radarfm {

namespace {

CellMetrics finish_cell(const CellCounts& c) {
  CellMetrics m;
  m.tp = c.tp;
  m.fp = c.fp;
  m.fn = c.fn;
  m.support = c.tp + c.fn;
  m.vacuous = c.tp == 0 && c.fp == 0 && c.fn == 0;
  m.precision = (c.tp + c.fp) == 0
                    ? 1.0
                    : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  m.recall = (c.tp + c.fn) == 0
                 ? 1.0
                 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

MeanMetrics mean_of(const std::vector<const CellMetrics*>& cells) {
  MeanMetrics mean;
  for (const CellMetrics* c : cells) {
    if (c->vacuous) continue;
    mean.precision += c->precision;
    mean.recall += c->recall;
    mean.f1 += c->f1;
    ++mean.cells;
  }
  if (mean.cells > 0) {
    mean.precision /= mean.cells;
    mean.recall /= mean.cells;
    mean.f1 /= mean.cells;
  }
  return mean;
}

}  // namespace

CellCountsGrid cell_counts(const SceneDescriptor& pred, const SceneDescriptor& truth) {
  CellCountsGrid grid{};
  for (int b = 0; b < kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      const std::uint64_t p = pred.cells[b][s];
      const std::uint64_t t = truth.cells[b][s];
      grid[b][s].tp = std::min(p, t);
      grid[b][s].fp = p > t ? p - t : 0;
      grid[b][s].fn = t > p ? t - p : 0;
    }
  }
  return grid;
}

std::pair<double, double> cell_precision_recall_piecewise(std::uint32_t pred,
                                                          std::uint32_t truth) {
  const double precision =
      pred <= truth ? 1.0 : static_cast<double>(truth) / static_cast<double>(pred);
  const double recall =
      pred >= truth ? 1.0 : static_cast<double>(pred) / static_cast<double>(truth);
  return {precision, recall};
}

MetricsReport micro_aggregate(const std::vector<CellCountsGrid>& scene_counts) {
  if (scene_counts.empty()) {
    throw std::invalid_argument("micro aggregation needs at least one scene");
  }
  CellCountsGrid totals{};
  for (const CellCountsGrid& scene : scene_counts) {
    for (int b = 0; b < kBinCount; ++b) {
      for (int s = 0; s < kSectorCount; ++s) totals[b][s] += scene[b][s];
    }
  }
  MetricsReport report;
  report.scene_count = scene_counts.size();
  for (int b = 0; b < kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      report.cells[b][s] = finish_cell(totals[b][s]);
    }
  }
  for (int b = 0; b < kBinCount; ++b) {
    std::vector<const CellMetrics*> row;
    for (int s = 0; s < kSectorCount; ++s) row.push_back(&report.cells[b][s]);
    report.per_bin[b] = mean_of(row);
  }
  for (int s = 0; s < kSectorCount; ++s) {
    std::vector<const CellMetrics*> col;
    for (int b = 0; b < kBinCount; ++b) col.push_back(&report.cells[b][s]);
    report.per_sector[s] = mean_of(col);
  }
  return report;
}

MetricsReport evaluate_descriptors(const std::vector<SceneDescriptor>& preds,
                                   const std::vector<SceneDescriptor>& truths) {
  if (preds.size() != truths.size()) {
    throw std::invalid_argument("prediction and truth lists differ in size");
  }
  std::vector<CellCountsGrid> grids;
  grids.reserve(preds.size());
  std::size_t sign_hits = 0;
  std::size_t walker_hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    grids.push_back(cell_counts(preds[i], truths[i]));
    if (preds[i].signs == truths[i].signs) ++sign_hits;
    if (preds[i].walkers == truths[i].walkers) ++walker_hits;
  }
  MetricsReport report = micro_aggregate(grids);
  report.sign_accuracy = static_cast<double>(sign_hits) / preds.size();
  report.walker_accuracy = static_cast<double>(walker_hits) / preds.size();
  return report;
}

void write_report_csv(const MetricsReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "bin,sector,tp,fp,fn,precision,recall,f1,support,vacuous\n";
  char p[32], rc[32], f[32];
  for (int b = 0; b < kBinCount; ++b) {
    for (int s = 0; s < kSectorCount; ++s) {
      const CellMetrics& c = r.cells[b][s];
      std::snprintf(p, sizeof p, "%.17g", c.precision);
      std::snprintf(rc, sizeof rc, "%.17g", c.recall);
      std::snprintf(f, sizeof f, "%.17g", c.f1);
      out << bin_name(b + 1) << ',' << to_string(static_cast<SectorLabel>(s)) << ','
          << c.tp << ',' << c.fp << ',' << c.fn << ',' << p << ',' << rc << ','
          << f << ',' << c.support << ',' << (c.vacuous ? 1 : 0) << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("failed writing report CSV to " + path.string());
  }
}

std::string report_summary_json(const MetricsReport& r, int indent) {
  nlohmann::ordered_json j;
  j["scenes"] = r.scene_count;
  auto mean_json = [](const MeanMetrics& m) {
    nlohmann::ordered_json o;
    o["precision"] = m.precision;
    o["recall"] = m.recall;
    o["f1"] = m.f1;
    o["cells"] = m.cells;
    return o;
  };
  nlohmann::ordered_json bins;
  for (int b = 0; b < kBinCount; ++b) bins[bin_name(b + 1)] = mean_json(r.per_bin[b]);
  j["per_bin"] = std::move(bins);
  nlohmann::ordered_json sectors;
  for (int s = 0; s < kSectorCount; ++s) {
    sectors[std::string(to_string(static_cast<SectorLabel>(s)))] =
        mean_json(r.per_sector[s]);
  }
  j["per_sector"] = std::move(sectors);
  if (r.sign_accuracy) j["sign_accuracy"] = *r.sign_accuracy;
  if (r.walker_accuracy) j["walker_accuracy"] = *r.walker_accuracy;
  return j.dump(indent);
}

bool verify_report_means(const MetricsReport& r) {
  constexpr double kTol = 1e-12;
  for (int b = 0; b < kBinCount; ++b) {
    std::vector<const CellMetrics*> row;
    for (int s = 0; s < kSectorCount; ++s) row.push_back(&r.cells[b][s]);
    const MeanMetrics m = mean_of(row);
    if (std::abs(m.precision - r.per_bin[b].precision) > kTol ||
        std::abs(m.recall - r.per_bin[b].recall) > kTol ||
        std::abs(m.f1 - r.per_bin[b].f1) > kTol || m.cells != r.per_bin[b].cells) {
      return false;
    }
  }
  for (int s = 0; s < kSectorCount; ++s) {
    std::vector<const CellMetrics*> col;
    for (int b = 0; b < kBinCount; ++b) col.push_back(&r.cells[b][s]);
    const MeanMetrics m = mean_of(col);
    if (std::abs(m.precision - r.per_sector[s].precision) > kTol ||
        std::abs(m.recall - r.per_sector[s].recall) > kTol ||
        std::abs(m.f1 - r.per_sector[s].f1) > kTol || m.cells != r.per_sector[s].cells) {
      return false;
    }
  }
  return true;
}

}  // namespace radarfm
