#include "raceml/classifiers.hpp"

#include <array>

#include "classifier_detail.hpp"

namespace raceml {

namespace {

const std::array<std::string, 4> kFamilyNames = {"LOGREG", "GAUSSIAN_NB", "KNN", "TREE"};

const ParamValue* find_param(const HyperparamAssignment& params, const std::string& name) {
  for (const auto& setting : params)
    if (setting.name == name) return &setting.value;
  return nullptr;
}

void check_positive_int(const HyperparamAssignment& params, const std::string& name) {
  if (param_int(params, name) < 1)
    throw Error(Errc::invalid_params, "'" + name + "' must be >= 1");
}

void check_positive_double(const HyperparamAssignment& params, const std::string& name) {
  if (!(param_double(params, name) > 0.0))
    throw Error(Errc::invalid_params, "'" + name + "' must be > 0");
}

}  // namespace

void validate_params(ModelFamily family, const HyperparamAssignment& params) {
  switch (family) {
    case ModelFamily::logreg:
      check_positive_double(params, "learning_rate");
      if (param_double(params, "l2") < 0.0)
        throw Error(Errc::invalid_params, "'l2' must be >= 0");
      check_positive_int(params, "iters");
      break;
    case ModelFamily::gaussian_nb:
      check_positive_double(params, "smoothing");
      break;
    case ModelFamily::knn: {
      check_positive_int(params, "k");
      const auto weighting = param_int(params, "weighting");
      if (weighting != 0 && weighting != 1)
        throw Error(Errc::invalid_params, "'weighting' must be option 0 or 1");
      break;
    }
    case ModelFamily::tree:
      check_positive_int(params, "max_depth");
      check_positive_int(params, "min_leaf");
      break;
  }
}

namespace {

// Mask+scale a raw original-order vector into model coordinates.
std::vector<double> to_model_space(const TrainedModel& model, std::span<const double> x) {
  if (x.size() != model.mask.size())
    throw Error(Errc::arity_mismatch,
                "input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(model.mask.size()));
  std::vector<double> z;
  z.reserve(model.scaler.size());
  std::size_t out = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!model.mask.test(j)) continue;
    z.push_back(model.scaler.is_constant(out)
                    ? 0.0
                    : (x[j] - model.scaler.mean[out]) / model.scaler.stddev[out]);
    ++out;
  }
  return z;
}

}  // namespace

const std::string& family_name(ModelFamily family) {
  return kFamilyNames[static_cast<std::size_t>(family)];
}

ModelFamily family_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i)
    if (kFamilyNames[i] == name) return static_cast<ModelFamily>(i);
  throw Error(Errc::unknown_family, "unknown model family '" + name + "'");
}

double param_double(const HyperparamAssignment& params, const std::string& name) {
  const ParamValue* value = find_param(params, name);
  if (value == nullptr)
    throw Error(Errc::invalid_params, "missing hyperparameter '" + name + "'");
  if (const double* d = std::get_if<double>(value)) return *d;
  return static_cast<double>(std::get<std::int64_t>(*value));
}

std::int64_t param_int(const HyperparamAssignment& params, const std::string& name) {
  const ParamValue* value = find_param(params, name);
  if (value == nullptr)
    throw Error(Errc::invalid_params, "missing hyperparameter '" + name + "'");
  if (const std::int64_t* i = std::get_if<std::int64_t>(value)) return *i;
  throw Error(Errc::invalid_params, "hyperparameter '" + name + "' is not integer-valued");
}

TrainedModel train(ModelFamily family, const HyperparamAssignment& params,
                   const Dataset& ds, const FeatureMask& mask, RngStream& stream) {
  (void)stream;  // reserved; the built-in families are fully deterministic
  validate_params(family, params);
  validate(ds, /*require_all_classes=*/true);
  if (ds.n_classes() < 2)
    throw Error(Errc::degenerate_data, "training needs at least 2 classes");

  const Dataset masked = project(ds, mask);
  const ScalerStats scaler = fit_standardizer(masked);
  const Dataset std_ds = apply_standardizer(masked, scaler);
  const std::size_t n_classes = ds.n_classes();

  TrainedModel model;
  model.family = family;
  model.params = params;
  model.mask = mask;
  model.scaler = scaler;
  model.n_classes = static_cast<int>(n_classes);
  model.feature_names = ds.feature_names;
  model.class_names = ds.class_names;

  switch (family) {
    case ModelFamily::logreg:
      model.fitted = detail::fit_logreg(params, std_ds, n_classes);
      break;
    case ModelFamily::gaussian_nb:
      model.fitted = detail::fit_gaussian_nb(params, std_ds, n_classes);
      break;
    case ModelFamily::knn:
      model.fitted = detail::fit_knn(std_ds);
      break;
    case ModelFamily::tree:
      model.fitted = detail::fit_tree(params, std_ds, n_classes);
      break;
  }
  return model;
}

int predict(const TrainedModel& model, std::span<const double> x) {
  const std::vector<double> z = to_model_space(model, x);
  switch (model.family) {
    case ModelFamily::logreg:
      return detail::predict_logreg(std::get<LogregPayload>(model.fitted), z);
    case ModelFamily::gaussian_nb:
      return detail::argmax_lowest(
          detail::nb_posterior(std::get<GaussianNbPayload>(model.fitted), z));
    case ModelFamily::knn:
      return detail::predict_knn(std::get<KnnPayload>(model.fitted), model.params,
                                 static_cast<std::size_t>(model.n_classes), z);
    case ModelFamily::tree:
      return detail::predict_tree(std::get<TreePayload>(model.fitted), z);
  }
  throw Error(Errc::unknown_family, "corrupt model family tag");
}

std::vector<double> nb_class_posterior(const TrainedModel& model, std::span<const double> x) {
  if (model.family != ModelFamily::gaussian_nb)
    throw Error(Errc::wrong_family, "nb_class_posterior requires a GAUSSIAN_NB model");
  const auto& payload = std::get<GaussianNbPayload>(model.fitted);
  if (x.size() != model.scaler.size())
    throw Error(Errc::arity_mismatch, "posterior input must be masked+scaled");
  return detail::nb_posterior(payload, x);
}

}  // namespace raceml
