#include "raceml/search.hpp"

#include <algorithm>
#include <cmath>

namespace raceml {

namespace {

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

std::int64_t clamp_int(std::int64_t x, std::int64_t lo, std::int64_t hi) {
  return std::min(std::max(x, lo), hi);
}

}  // namespace

SearchSpace default_search_space() {
  SearchSpace space;
  space.set(ModelFamily::logreg,
            {{"learning_rate", ContinuousLog{1e-3, 1e0}},
             {"l2", ContinuousLog{1e-6, 1e-1}},
             {"iters", IntegerRange{50, 500}}});
  space.set(ModelFamily::gaussian_nb, {{"smoothing", ContinuousLog{1e-9, 1e-3}}});
  space.set(ModelFamily::knn,
            {{"k", IntegerRange{1, 25}},
             {"weighting", Categorical{{"uniform", "inverse_distance"}}}});
  space.set(ModelFamily::tree,
            {{"max_depth", IntegerRange{1, 12}}, {"min_leaf", IntegerRange{1, 10}}});
  return space;
}

ParamValue sample_param(const ParamSpec& spec, double u) {
  if (!(u >= 0.0 && u < 1.0))
    throw Error(Errc::u_out_of_range, "u must lie in [0,1)");

  return std::visit(
      [&](const auto& kind) -> ParamValue {
        using Kind = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<Kind, ContinuousLinear>) {
          return clamp(kind.lo + u * (kind.hi - kind.lo), kind.lo, kind.hi);
        } else if constexpr (std::is_same_v<Kind, ContinuousLog>) {
          const double value = std::exp(std::log(kind.lo) +
                                        u * (std::log(kind.hi) - std::log(kind.lo)));
          return clamp(value, kind.lo, kind.hi);
        } else if constexpr (std::is_same_v<Kind, IntegerRange>) {
          const auto span = static_cast<double>(kind.hi - kind.lo + 1);
          const auto step = static_cast<std::int64_t>(std::floor(u * span));
          return clamp_int(kind.lo + step, kind.lo, kind.hi);
        } else {
          static_assert(std::is_same_v<Kind, Categorical>);
          const auto n = static_cast<double>(kind.options.size());
          const auto index = static_cast<std::int64_t>(std::floor(u * n));
          return clamp_int(index, 0, static_cast<std::int64_t>(kind.options.size()) - 1);
        }
      },
      spec.kind);
}

CandidateSpec sample_candidate(const SearchSpace& space, ModelFamily family,
                               std::size_t n_features, RngStream& stream, std::uint64_t id) {
  const auto& specs = space.specs_for(family);
  CandidateSpec candidate;
  candidate.id = id;
  candidate.family = family;
  candidate.mask = FeatureMask(n_features, true);
  candidate.params.reserve(specs.size());
  for (const auto& spec : specs)
    candidate.params.push_back({spec.name, sample_param(spec, stream.next_double())});
  return candidate;
}

CandidateSpec mutate_candidate(const CandidateSpec& parent, const SearchSpace& space,
                               const MutationConfig& cfg, RngStream& stream,
                               std::uint64_t new_id) {
  const auto& specs = space.specs_for(parent.family);
  if (parent.params.size() != specs.size())
    throw Error(Errc::invalid_parent, "parent params do not match the search space");

  CandidateSpec child;
  child.id = new_id;
  child.family = parent.family;
  child.mask = parent.mask;
  child.parent_id = parent.id;
  child.params.reserve(specs.size());

  for (std::size_t p = 0; p < specs.size(); ++p) {
    const ParamSpec& spec = specs[p];
    if (parent.params[p].name != spec.name)
      throw Error(Errc::invalid_parent, "parent param order does not match the search space");
    const ParamValue& old_value = parent.params[p].value;

    ParamValue new_value = std::visit(
        [&](const auto& kind) -> ParamValue {
          using Kind = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<Kind, ContinuousLinear>) {
            const double step = stream.next_gaussian() * cfg.sigma_cont;
            const double t = (std::get<double>(old_value) - kind.lo) / (kind.hi - kind.lo);
            const double moved = kind.lo + clamp(t + step, 0.0, 1.0) * (kind.hi - kind.lo);
            return clamp(moved, kind.lo, kind.hi);
          } else if constexpr (std::is_same_v<Kind, ContinuousLog>) {
            const double step = stream.next_gaussian() * cfg.sigma_cont;
            const double log_lo = std::log(kind.lo);
            const double log_hi = std::log(kind.hi);
            const double t =
                (std::log(std::get<double>(old_value)) - log_lo) / (log_hi - log_lo);
            // The exp/log round trip can overshoot a bound by an ulp; the
            // final clamp keeps the value inside the declared box exactly.
            const double moved =
                std::exp(log_lo + clamp(t + step, 0.0, 1.0) * (log_hi - log_lo));
            return clamp(moved, kind.lo, kind.hi);
          } else if constexpr (std::is_same_v<Kind, IntegerRange>) {
            const double range = static_cast<double>(kind.hi - kind.lo);
            const auto step =
                static_cast<std::int64_t>(std::llround(stream.next_gaussian() * range * cfg.sigma_cont));
            return clamp_int(std::get<std::int64_t>(old_value) + step, kind.lo, kind.hi);
          } else {
            static_assert(std::is_same_v<Kind, Categorical>);
            if (stream.next_double() < cfg.p_cat) {
              const auto n = static_cast<double>(kind.options.size());
              const auto index = static_cast<std::int64_t>(std::floor(stream.next_double() * n));
              return clamp_int(index, 0, static_cast<std::int64_t>(kind.options.size()) - 1);
            }
            return old_value;
          }
        },
        spec.kind);
    child.params.push_back({spec.name, new_value});
  }

  if (stream.next_double() < cfg.p_feature_search)
    child.mask = mutate_mask(parent.mask, cfg.p_flip, stream);
  return child;
}

FeatureMask mutate_mask(const FeatureMask& mask, double p_flip, RngStream& stream) {
  if (mask.popcount() == 0) throw Error(Errc::empty_mask, "cannot mutate an empty mask");

  FeatureMask out = mask;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (stream.next_double() < p_flip) out.set(i, !out.test(i));

  if (out.popcount() == 0) out.set(stream.next_below(out.size()), true);
  return out;
}

}  // namespace raceml
