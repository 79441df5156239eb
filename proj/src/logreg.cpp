#include <algorithm>
#include <cmath>

#include "classifier_detail.hpp"

namespace raceml {

namespace {

// Row scores W x + b for one example.
void compute_scores(const LinearCoeffs& coeffs, std::span<const double> x,
                    std::vector<double>& scores) {
  scores.assign(coeffs.n_classes, 0.0);
  for (std::size_t c = 0; c < coeffs.n_classes; ++c) {
    double s = coeffs.biases[c];
    for (std::size_t j = 0; j < coeffs.n_features; ++j) s += coeffs.weight(c, j) * x[j];
    scores[c] = s;
  }
}

}  // namespace

LossGrad logreg_loss_grad(const LinearCoeffs& coeffs, const Dataset& ds, double l2) {
  if (coeffs.n_features != ds.n_features() || coeffs.n_classes != ds.n_classes() ||
      coeffs.weights.size() != coeffs.n_classes * coeffs.n_features ||
      coeffs.biases.size() != coeffs.n_classes)
    throw Error(Errc::shape_mismatch, "coefficient shape does not match dataset");
  if (l2 < 0.0) throw Error(Errc::shape_mismatch, "l2 must be >= 0");

  const std::size_t n = ds.n_rows();
  LossGrad out;
  out.grad = LinearCoeffs::zeros(coeffs.n_classes, coeffs.n_features);

  std::vector<double> work;
  double ce_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = ds.rows[i];
    compute_scores(coeffs, x, work);

    // Stable log-sum-exp, then turn scores into probabilities in place.
    const double top = *std::max_element(work.begin(), work.end());
    double z = 0.0;
    for (double s : work) z += std::exp(s - top);
    const double log_z = std::log(z) + top;
    const auto y = static_cast<std::size_t>(ds.labels[i]);
    ce_sum += log_z - work[y];
    for (double& s : work) s = std::exp(s - log_z);

    for (std::size_t c = 0; c < coeffs.n_classes; ++c) {
      const double delta = work[c] - (c == y ? 1.0 : 0.0);
      out.grad.biases[c] += delta;
      for (std::size_t j = 0; j < coeffs.n_features; ++j)
        out.grad.weight(c, j) += delta * x[j];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = ce_sum * inv_n;
  for (double& g : out.grad.weights) g *= inv_n;
  for (double& g : out.grad.biases) g *= inv_n;

  double weight_norm_sq = 0.0;
  for (std::size_t idx = 0; idx < coeffs.weights.size(); ++idx) {
    weight_norm_sq += coeffs.weights[idx] * coeffs.weights[idx];
    out.grad.weights[idx] += l2 * coeffs.weights[idx];
  }
  out.loss += 0.5 * l2 * weight_norm_sq;
  return out;
}

namespace detail {

LogregPayload fit_logreg(const HyperparamAssignment& params, const Dataset& std_ds,
                         std::size_t n_classes) {
  const double learning_rate = param_double(params, "learning_rate");
  const double l2 = param_double(params, "l2");
  const auto iters = param_int(params, "iters");

  // Full-batch gradient descent from zero initialization; fixed step count.
  LinearCoeffs coeffs = LinearCoeffs::zeros(n_classes, std_ds.n_features());
  for (std::int64_t it = 0; it < iters; ++it) {
    const LossGrad lg = logreg_loss_grad(coeffs, std_ds, l2);
    for (std::size_t idx = 0; idx < coeffs.weights.size(); ++idx)
      coeffs.weights[idx] -= learning_rate * lg.grad.weights[idx];
    for (std::size_t c = 0; c < coeffs.n_classes; ++c)
      coeffs.biases[c] -= learning_rate * lg.grad.biases[c];
  }
  return LogregPayload{std::move(coeffs)};
}

int predict_logreg(const LogregPayload& payload, std::span<const double> z) {
  std::vector<double> scores;
  compute_scores(payload.coeffs, z, scores);
  return argmax_lowest(scores);
}

}  // namespace detail

}  // namespace raceml
