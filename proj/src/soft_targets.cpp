#include "radarfm/soft_targets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace radarfm {

void KernelConfig::validate() const {
  for (double s : sigmas) {
    if (!(s > 0.0)) throw std::invalid_argument("kernel sigma must be positive");
  }
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("lambda must be in (0, 1]");
  }
}

std::array<double, kBinCount> bin_weights(const KernelConfig& cfg) {
  cfg.validate();
  std::array<double, kBinCount> w;
  for (int b = 0; b < kBinCount; ++b) w[b] = std::pow(cfg.lambda, b);
  return w;
}

double kernel_similarity(const SceneHash& a, const SceneHash& b, int bin_index,
                         const KernelConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<double>(hamming_bin(a, b, bin_index));
  const double sigma = cfg.sigmas[bin_index - 1];
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

namespace {

double weighted_similarity_impl(const SceneHash& a, const SceneHash& b,
                                const std::array<double, kBinCount>& weights,
                                const std::array<double, kBinCount>& sigmas) {
  double sum = 0.0;
  for (int bin = 1; bin <= kBinCount; ++bin) {
    const auto d = static_cast<double>(hamming_bin(a, b, bin));
    const double sigma = sigmas[bin - 1];
    sum += weights[bin - 1] * std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  return sum;
}

}  // namespace

double weighted_similarity(const SceneHash& a, const SceneHash& b,
                           const KernelConfig& cfg) {
  return weighted_similarity_impl(a, b, bin_weights(cfg), cfg.sigmas);
}

SoftTargetMatrix soft_target_matrix(const std::vector<SceneHash>& hashes,
                                    const KernelConfig& cfg,
                                    std::vector<std::int64_t> ids) {
  cfg.validate();
  const std::size_t n = hashes.size();
  if (n < 2) {
    throw std::invalid_argument("soft targets need a batch of at least 2 scenes");
  }
  for (const SceneHash& h : hashes) {
    if (h.layout() != hashes.front().layout()) {
      throw std::invalid_argument("hash layouts in the batch do not match");
    }
  }
  if (ids.empty()) {
    ids.resize(n);
    std::iota(ids.begin(), ids.end(), 0);
  } else if (ids.size() != n) {
    throw std::invalid_argument("ids size does not match batch size");
  }

  const auto w = bin_weights(cfg);
  Matrix similarity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    similarity.at(i, i) = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = weighted_similarity_impl(hashes[i], hashes[j], w, cfg.sigmas);
      similarity.at(i, j) = u;
      similarity.at(j, i) = u;
    }
  }

  SoftTargetMatrix t;
  t.values = Matrix(n, n);
  t.ids = std::move(ids);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += similarity.at(i, j);
    for (std::size_t j = 0; j < n; ++j) {
      t.values.at(i, j) = similarity.at(i, j) / row_sum;
    }
  }
  return t;
}

void write_targets_csv(const SoftTargetMatrix& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "row_id,col_id,value\n";
  char buffer[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", t.values.at(i, j));
      out << t.ids[i] << ',' << t.ids[j] << ',' << buffer << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("failed writing targets CSV to " + path.string());
  }
}

}  // namespace radarfm
