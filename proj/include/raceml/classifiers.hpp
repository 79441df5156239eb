#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "raceml/dataset.hpp"
#include "raceml/rng.hpp"

namespace raceml {

enum class ModelFamily { logreg, gaussian_nb, knn, tree };

inline constexpr ModelFamily kAllFamilies[] = {
    ModelFamily::logreg, ModelFamily::gaussian_nb, ModelFamily::knn, ModelFamily::tree};

const std::string& family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);  // throws unknown_family

// A hyperparameter value: real for continuous kinds, integer for integer
// ranges and categorical option indices.
using ParamValue = std::variant<double, std::int64_t>;

struct ParamSetting {
  std::string name;
  ParamValue value;

  bool operator==(const ParamSetting&) const = default;
};

using HyperparamAssignment = std::vector<ParamSetting>;

double param_double(const HyperparamAssignment& params, const std::string& name);
std::int64_t param_int(const HyperparamAssignment& params, const std::string& name);

// Presence and range checks for a family's hyperparameters; throws
// invalid_params. Used by train and by model loading.
void validate_params(ModelFamily family, const HyperparamAssignment& params);

// Multinomial linear coefficients: weights is n_classes x n_features
// row-major, one bias per class.
struct LinearCoeffs {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double weight(std::size_t c, std::size_t j) const { return weights[c * n_features + j]; }
  double& weight(std::size_t c, std::size_t j) { return weights[c * n_features + j]; }

  static LinearCoeffs zeros(std::size_t n_classes, std::size_t n_features) {
    LinearCoeffs coeffs;
    coeffs.n_classes = n_classes;
    coeffs.n_features = n_features;
    coeffs.weights.assign(n_classes * n_features, 0.0);
    coeffs.biases.assign(n_classes, 0.0);
    return coeffs;
  }
};

struct LogregPayload {
  LinearCoeffs coeffs;
};

struct GaussianNbPayload {
  std::vector<double> priors;                  // per class, sums to 1
  std::vector<std::vector<double>> means;      // [class][feature]
  std::vector<std::vector<double>> variances;  // [class][feature], floored > 0
};

struct KnnPayload {
  std::vector<std::vector<double>> rows;  // standardized training rows
  std::vector<int> labels;
};

// Flat binary tree; root at index 0. Internal nodes route x < threshold to
// `left`, otherwise `right`. Leaves carry the class index.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = -1;

  bool is_leaf() const { return leaf_class >= 0; }
};

struct TreePayload {
  std::vector<TreeNode> nodes;
};

using FittedPayload = std::variant<LogregPayload, GaussianNbPayload, KnnPayload, TreePayload>;

// A fitted classifier. Carries everything prediction and persistence need:
// the mask and scaler reproduce the training-time input pipeline, and the
// name vocabularies make the model self-describing.
struct TrainedModel {
  ModelFamily family;
  HyperparamAssignment params;
  FeatureMask mask;    // over the original feature order
  ScalerStats scaler;  // fitted on masked training columns
  FittedPayload fitted;
  int n_classes = 0;
  std::vector<std::string> feature_names;  // original order, all columns
  std::vector<std::string> class_names;
};

// Fixed training pipeline: project by mask, fit+apply the standardizer, fit
// the family-specific learner. Deterministic given (inputs, stream); none of
// the built-in families draw from the stream, but the signature reserves it.
TrainedModel train(ModelFamily family, const HyperparamAssignment& params,
                   const Dataset& ds, const FeatureMask& mask, RngStream& stream);

// x is a raw vector in the ORIGINAL feature order; masking and scaling are
// applied internally. Ties break toward the lower class index.
int predict(const TrainedModel& model, std::span<const double> x);

// Full-batch multinomial softmax cross-entropy with L2 on weights (not
// biases): loss = mean CE + (l2/2)*||W||^2, gradient exact for that loss.
// `ds` must already be standardized.
struct LossGrad {
  double loss = 0.0;
  LinearCoeffs grad;
};
LossGrad logreg_loss_grad(const LinearCoeffs& coeffs, const Dataset& ds, double l2);

// Class posterior for a Gaussian NB model given a masked+scaled input vector.
// Computed in log space; sums to 1 within 1e-9.
std::vector<double> nb_class_posterior(const TrainedModel& model, std::span<const double> x);

// Gini impurity 1 - sum p_i^2 of a class-count vector.
double gini(std::span<const std::size_t> counts);

struct SplitResult {
  double threshold = 0.0;
  double decrease = 0.0;  // weighted impurity decrease vs. the parent node
};

// Best axis-aligned split of one feature column: scans midpoints between
// consecutive distinct sorted values, maximizes impurity decrease subject to
// both children holding at least min_leaf rows. Ties break toward the
// smaller threshold. Empty result when no legal split exists.
std::optional<SplitResult> best_split(const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels,
                                      std::size_t n_classes, std::size_t feature,
                                      std::size_t min_leaf);

// Same scan on a pre-extracted column; shared by best_split and tree growth.
std::optional<SplitResult> best_split_on_column(std::span<const double> values,
                                                std::span<const int> labels,
                                                std::size_t n_classes,
                                                std::size_t min_leaf);

}  // namespace raceml
