#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radarfm/matrix.hpp"
#include "radarfm/soft_targets.hpp"

namespace radarfm {

// Paired radar-side and text-side embeddings, one row per scene.
struct EmbeddingBatch {
  Matrix radar;  // N x D
  Matrix text;   // N x D

  std::size_t size() const { return radar.rows; }
  std::size_t dim() const { return radar.cols; }
};

enum class LossDirection { radar_to_text, text_to_radar, symmetric };

struct LossConfig {
  double temperature = 0.07;
  LossDirection direction = LossDirection::symmetric;

  void validate() const;  // throws std::invalid_argument
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_radar;  // dL/d(radar), N x D
  Matrix grad_text;   // dL/d(text), N x D
  Matrix similarity;  // cosine similarity S, N x N
};

// S[i][j] = cos(radar_i, text_j). Throws when any row has zero norm, naming
// the offending row.
Matrix cosine_similarity_matrix(const EmbeddingBatch& batch);

// Soft cross-entropy between temperature-scaled similarity softmax rows and
// row-stochastic targets, averaged over rows:
//   L = -(1/N) sum_i sum_j T[i][j] * log softmax_j(S[i][j] / tau)
// Returns the loss and dL/dS. Softmax rows are stabilized by max
// subtraction. Exposed for tests and alternative similarity sources.
struct SoftXentResult {
  double value = 0.0;
  Matrix grad_similarity;
};
SoftXentResult soft_cross_entropy(const Matrix& similarity, const Matrix& targets,
                                  double temperature);

// The hash-aware contrastive loss. Both directions read the same target
// matrix (its rows are reused as the text-side targets); they differ only in
// which axis of S the softmax normalizes over. Gradients are exact analytic
// derivatives with respect to every embedding entry (see
// docs/loss_gradients.md). Targets must be row-stochastic within 1e-6.
LossOutput hash_clip_loss(const EmbeddingBatch& batch, const SoftTargetMatrix& targets,
                          const LossConfig& cfg);

struct TrainerSettings {
  std::uint64_t seed = 0;
  int iterations = 500;
  double step_size = 8.0;  // initial gradient-descent step, adapted by halving
  int dim = 32;
};

struct TrainResult {
  EmbeddingBatch embeddings;
  SoftTargetMatrix targets;
  std::vector<double> loss_history;  // iterations + 1 entries, non-increasing
};

// Desk-scale alignment demo: one free radar vector and one free text vector
// per scene, trained by full-batch gradient descent on the symmetric loss.
// A trial step that raises the loss (or makes it non-finite) is retried at
// half the step size, so the recorded history never increases. Throws
// std::runtime_error if the loss itself turns non-finite.
TrainResult toy_align(const std::vector<SceneDescriptor>& scenes,
                      const KernelConfig& kernel_cfg, const LossConfig& loss_cfg,
                      const TrainerSettings& trainer);

// Spearman rank correlation with average ranks for ties; returns 0 when
// either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

// Mean Spearman correlation between corresponding rows of two square
// matrices.
double mean_row_spearman(const Matrix& a, const Matrix& b);

}  // namespace radarfm
