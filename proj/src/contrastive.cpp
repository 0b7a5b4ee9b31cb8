#include "radarfm/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace radarfm {

namespace {

constexpr double kRowSumTolerance = 1e-6;

std::vector<double> row_norms(const Matrix& m, const char* side) {
  std::vector<double> norms(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) sq += m.at(i, j) * m.at(i, j);
    norms[i] = std::sqrt(sq);
    if (norms[i] == 0.0) {
      throw std::invalid_argument(std::string(side) + " embedding row " +
                                  std::to_string(i) + " has zero norm");
    }
  }
  return norms;
}

void check_batch(const EmbeddingBatch& batch) {
  if (batch.radar.rows != batch.text.rows || batch.radar.cols != batch.text.cols) {
    throw std::invalid_argument("radar and text embeddings must share N and D");
  }
  if (batch.radar.rows == 0 || batch.radar.cols == 0) {
    throw std::invalid_argument("embedding batch is empty");
  }
}

void check_targets(const Matrix& t, std::size_t n) {
  if (t.rows != n || t.cols != n) {
    throw std::invalid_argument("target matrix shape does not match the batch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (t.at(i, j) < 0.0) {
        throw std::invalid_argument("target matrix has a negative entry at row " +
                                    std::to_string(i));
      }
      sum += t.at(i, j);
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("target row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) +
                                  ", expected 1");
    }
  }
}

// Adds dL/dS contributions onto the embedding gradients through the cosine
// normalization.
void chain_to_embeddings(const Matrix& grad_s, const Matrix& radar, const Matrix& text,
                         const std::vector<double>& rnorm,
                         const std::vector<double>& tnorm, const Matrix& similarity,
                         Matrix& grad_radar, Matrix& grad_text) {
  const std::size_t n = radar.rows;
  const std::size_t d = radar.cols;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = grad_s.at(i, j);
      if (g == 0.0) continue;
      const double s = similarity.at(i, j);
      for (std::size_t k = 0; k < d; ++k) {
        const double u = radar.at(i, k) / rnorm[i];
        const double v = text.at(j, k) / tnorm[j];
        grad_radar.at(i, k) += g * (v - s * u) / rnorm[i];
        grad_text.at(j, k) += g * (u - s * v) / tnorm[j];
      }
    }
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
}

Matrix cosine_similarity_matrix(const EmbeddingBatch& batch) {
  check_batch(batch);
  const auto rnorm = row_norms(batch.radar, "radar");
  const auto tnorm = row_norms(batch.text, "text");
  const std::size_t n = batch.size();
  const std::size_t d = batch.dim();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dp = 0.0;
      for (std::size_t k = 0; k < d; ++k) dp += batch.radar.at(i, k) * batch.text.at(j, k);
      s.at(i, j) = dp / (rnorm[i] * tnorm[j]);
    }
  }
  return s;
}

SoftXentResult soft_cross_entropy(const Matrix& similarity, const Matrix& targets,
                                  double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  const std::size_t n = similarity.rows;
  if (similarity.cols != n || targets.rows != n || targets.cols != n) {
    throw std::invalid_argument("similarity and target matrices must be square and equal");
  }
  SoftXentResult result;
  result.grad_similarity = Matrix(n, n);
  std::vector<double> softmax(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      max_logit = std::max(max_logit, similarity.at(i, j) / temperature);
    }
    double sum_exp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      softmax[j] = std::exp(similarity.at(i, j) / temperature - max_logit);
      sum_exp += softmax[j];
    }
    const double log_sum = std::log(sum_exp);
    double target_row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      softmax[j] /= sum_exp;
      target_row_sum += targets.at(i, j);
      const double log_p = similarity.at(i, j) / temperature - max_logit - log_sum;
      loss -= targets.at(i, j) * log_p;
    }
    // d/dS of the exact computed value; reduces to (p - T)/(N tau) when the
    // target row sums to 1.
    for (std::size_t j = 0; j < n; ++j) {
      result.grad_similarity.at(i, j) =
          (softmax[j] * target_row_sum - targets.at(i, j)) /
          (static_cast<double>(n) * temperature);
    }
  }
  result.value = loss / static_cast<double>(n);
  return result;
}

LossOutput hash_clip_loss(const EmbeddingBatch& batch, const SoftTargetMatrix& targets,
                          const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch);
  check_targets(targets.values, batch.size());

  const auto rnorm = row_norms(batch.radar, "radar");
  const auto tnorm = row_norms(batch.text, "text");

  LossOutput out;
  out.similarity = cosine_similarity_matrix(batch);
  out.grad_radar = Matrix(batch.size(), batch.dim());
  out.grad_text = Matrix(batch.size(), batch.dim());

  const std::size_t n = batch.size();
  Matrix grad_s(n, n);
  double value = 0.0;

  const bool want_rt = cfg.direction != LossDirection::text_to_radar;
  const bool want_tr = cfg.direction != LossDirection::radar_to_text;
  const double scale = cfg.direction == LossDirection::symmetric ? 0.5 : 1.0;

  if (want_rt) {
    const auto rt = soft_cross_entropy(out.similarity, targets.values, cfg.temperature);
    value += scale * rt.value;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        grad_s.at(i, j) += scale * rt.grad_similarity.at(i, j);
      }
    }
  }
  if (want_tr) {
    // Text row j attends over radar columns: softmax down each column of S.
    const auto tr =
        soft_cross_entropy(out.similarity.transposed(), targets.values, cfg.temperature);
    value += scale * tr.value;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        grad_s.at(i, j) += scale * tr.grad_similarity.at(j, i);
      }
    }
  }

  out.value = value;
  chain_to_embeddings(grad_s, batch.radar, batch.text, rnorm, tnorm, out.similarity,
                      out.grad_radar, out.grad_text);
  return out;
}

TrainResult toy_align(const std::vector<SceneDescriptor>& scenes,
                      const KernelConfig& kernel_cfg, const LossConfig& loss_cfg,
                      const TrainerSettings& trainer) {
  if (scenes.size() < 2) {
    throw std::invalid_argument("toy alignment needs at least 2 scenes");
  }
  if (trainer.iterations < 0 || trainer.dim <= 0) {
    throw std::invalid_argument("invalid trainer settings");
  }
  loss_cfg.validate();

  std::vector<SceneHash> hashes;
  hashes.reserve(scenes.size());
  for (const SceneDescriptor& d : scenes) hashes.push_back(encode_hash(d));

  TrainResult result;
  result.targets = soft_target_matrix(hashes, kernel_cfg);

  const std::size_t n = scenes.size();
  const auto d = static_cast<std::size_t>(trainer.dim);
  std::mt19937_64 rng(trainer.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  result.embeddings.radar = Matrix(n, d);
  result.embeddings.text = Matrix(n, d);
  for (Matrix* m : {&result.embeddings.radar, &result.embeddings.text}) {
    for (double& x : m->data) x = gauss(rng);
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) sq += m->at(i, j) * m->at(i, j);
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t j = 0; j < d; ++j) m->at(i, j) *= inv;
    }
  }

  LossOutput current = hash_clip_loss(result.embeddings, result.targets, loss_cfg);
  if (!std::isfinite(current.value)) {
    throw std::runtime_error("training loss non-finite at iteration 0");
  }
  result.loss_history.reserve(trainer.iterations + 1);
  result.loss_history.push_back(current.value);

  double step = trainer.step_size;
  const double max_step = trainer.step_size * 8.0;
  for (int iter = 1; iter <= trainer.iterations; ++iter) {
    double trial_step = step;
    bool accepted = false;
    EmbeddingBatch trial;
    LossOutput trial_out;
    while (trial_step >= 1e-18) {
      trial.radar = result.embeddings.radar;
      trial.text = result.embeddings.text;
      for (std::size_t k = 0; k < trial.radar.data.size(); ++k) {
        trial.radar.data[k] -= trial_step * current.grad_radar.data[k];
        trial.text.data[k] -= trial_step * current.grad_text.data[k];
      }
      trial_out = hash_clip_loss(trial, result.targets, loss_cfg);
      if (std::isfinite(trial_out.value) && trial_out.value <= current.value) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (accepted) {
      result.embeddings = std::move(trial);
      current = std::move(trial_out);
      step = std::min(trial_step * 1.25, max_step);
    }
    // On a stalled line search the iterate is kept, so the history stays flat.
    result.loss_history.push_back(current.value);
    if (!std::isfinite(current.value)) {
      throw std::runtime_error("training loss non-finite at iteration " +
                               std::to_string(iter));
    }
  }
  return result;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("spearman inputs must have equal length");
  }
  if (a.size() < 2) return 0.0;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double mean = (n + 1.0) / 2.0;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

double mean_row_spearman(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("matrices must have equal shape");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    sum += spearman(std::span(a.row(i), a.cols), std::span(b.row(i), b.cols));
  }
  return sum / static_cast<double>(a.rows);
}

}  // namespace radarfm
