#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "raceml/classifiers.hpp"
#include "raceml/dataset.hpp"
#include "raceml/rng.hpp"

namespace raceml {

struct ContinuousLinear {
  double lo, hi;
};
struct ContinuousLog {
  double lo, hi;  // lo > 0
};
struct IntegerRange {
  std::int64_t lo, hi;
};
struct Categorical {
  std::vector<std::string> options;  // at least 2
};

struct ParamSpec {
  std::string name;
  std::variant<ContinuousLinear, ContinuousLog, IntegerRange, Categorical> kind;
};

// Per-family ordered parameter lists. Sampling and mutation walk the specs in
// declared order, which pins the RNG draw sequence.
class SearchSpace {
 public:
  void set(ModelFamily family, std::vector<ParamSpec> specs) {
    spaces_[family] = std::move(specs);
  }

  const std::vector<ParamSpec>& specs_for(ModelFamily family) const {
    auto it = spaces_.find(family);
    if (it == spaces_.end())
      throw Error(Errc::unknown_family, "no search space for family " + family_name(family));
    return it->second;
  }

  bool has(ModelFamily family) const { return spaces_.contains(family); }

  const std::map<ModelFamily, std::vector<ParamSpec>>& all() const { return spaces_; }

 private:
  std::map<ModelFamily, std::vector<ParamSpec>> spaces_;
};

// Built-in spaces:
//   LOGREG      learning_rate LOG[1e-3, 1], l2 LOG[1e-6, 1e-1], iters INT[50, 500]
//   GAUSSIAN_NB smoothing LOG[1e-9, 1e-3]
//   KNN         k INT[1, 25], weighting CAT{uniform, inverse_distance}
//   TREE        max_depth INT[1, 12], min_leaf INT[1, 10]
SearchSpace default_search_space();

// One point in the search space; a box in the parallel-training fan-out.
struct CandidateSpec {
  std::uint64_t id = 0;
  ModelFamily family = ModelFamily::logreg;
  HyperparamAssignment params;
  FeatureMask mask;
  std::optional<std::uint64_t> parent_id;
};

struct MutationConfig {
  double sigma_cont = 0.15;      // Gaussian step sd in normalized transformed coordinates
  double p_cat = 0.2;            // categorical resample probability
  double p_flip = 0.1;           // per-bit mask flip probability
  double p_feature_search = 0.5; // probability a mutation touches the mask at all
};

// Deterministic transform of u in [0,1) to a parameter value:
//   LINEAR  lo + u*(hi-lo)
//   LOG     exp(ln lo + u*(ln hi - ln lo))
//   INTEGER lo + floor(u*(hi-lo+1)), clamped to hi
//   CAT     option index floor(u*n)
ParamValue sample_param(const ParamSpec& spec, double u);

// Fresh candidate: every param sampled with successive stream draws in
// declared order; the initial mask includes all features.
CandidateSpec sample_candidate(const SearchSpace& space, ModelFamily family,
                               std::size_t n_features, RngStream& stream, std::uint64_t id);

// Local perturbation of a parent. Family is preserved. Continuous params
// take a Gaussian step of sd sigma_cont in their normalized transformed
// coordinate (log space for LOG kinds) and clamp to bounds; integer params
// step by round(gaussian * range * sigma_cont); categoricals resample with
// probability p_cat; the mask is mutated with probability p_feature_search.
CandidateSpec mutate_candidate(const CandidateSpec& parent, const SearchSpace& space,
                               const MutationConfig& cfg, RngStream& stream,
                               std::uint64_t new_id);

// Independent per-bit flips; an all-zero result gets one uniformly chosen
// bit set so the mask never ends up empty.
FeatureMask mutate_mask(const FeatureMask& mask, double p_flip, RngStream& stream);

}  // namespace raceml
