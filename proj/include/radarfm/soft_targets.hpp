#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "radarfm/matrix.hpp"
#include "radarfm/scene_hash.hpp"

namespace radarfm {

// Per-bin Gaussian bandwidths and the distance-decay rate. Bandwidths widen
// with distance so that near-field mismatches are penalized more tightly than
// far-field ones.
struct KernelConfig {
  std::array<double, kBinCount> sigmas = {1.0, 1.5, 2.0, 2.5};
  double lambda = 0.85;

  void validate() const;  // throws std::invalid_argument
};

// Row-stochastic similarity targets for a batch, plus the scene ids labelling
// the rows/columns.
struct SoftTargetMatrix {
  Matrix values;
  std::vector<std::int64_t> ids;

  std::size_t size() const { return values.rows; }
};

// Decay weights per bin: lambda^(bin-1).
std::array<double, kBinCount> bin_weights(const KernelConfig& cfg);

// Gaussian kernel over the per-bin Hamming distance:
// exp(-d^2 / (2 sigma_b^2)). Equals 1 exactly when the sub-vectors match.
double kernel_similarity(const SceneHash& a, const SceneHash& b, int bin_index,
                         const KernelConfig& cfg);

// Weighted per-bin similarity summed over bins, before row normalization.
double weighted_similarity(const SceneHash& a, const SceneHash& b,
                           const KernelConfig& cfg);

// Builds the soft target matrix for a batch: T[i][j] is the weighted
// similarity of scenes i and j normalized over row i. Requires at least two
// hashes with identical layouts. `ids` are optional row labels (defaults to
// 0..N-1).
SoftTargetMatrix soft_target_matrix(const std::vector<SceneHash>& hashes,
                                    const KernelConfig& cfg,
                                    std::vector<std::int64_t> ids = {});

// Dense CSV export: header "row_id,col_id,value", one line per entry.
void write_targets_csv(const SoftTargetMatrix& t, const std::filesystem::path& path);

}  // namespace radarfm
