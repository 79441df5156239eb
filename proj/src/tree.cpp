#include <algorithm>
#include <numeric>

#include "classifier_detail.hpp"

namespace raceml {

double gini(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (counts.empty() || total == 0)
    throw Error(Errc::empty_counts, "gini needs at least one counted example");
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::optional<SplitResult> best_split_on_column(std::span<const double> values,
                                                std::span<const int> labels,
                                                std::size_t n_classes,
                                                std::size_t min_leaf) {
  const std::size_t n = values.size();
  if (n < 2) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<std::size_t> left_counts(n_classes, 0);
  std::vector<std::size_t> right_counts(n_classes, 0);
  for (int label : labels) ++right_counts[static_cast<std::size_t>(label)];
  const double parent_gini = gini(right_counts);

  std::optional<SplitResult> best;
  for (std::size_t p = 1; p < n; ++p) {
    const std::size_t moved = order[p - 1];
    const auto label = static_cast<std::size_t>(labels[moved]);
    ++left_counts[label];
    --right_counts[label];

    const double lo = values[order[p - 1]];
    const double hi = values[order[p]];
    if (lo == hi) continue;  // no midpoint between equal values
    if (p < min_leaf || n - p < min_leaf) continue;

    const double n_left = static_cast<double>(p);
    const double n_right = static_cast<double>(n - p);
    const double child_impurity =
        (n_left * gini(left_counts) + n_right * gini(right_counts)) / static_cast<double>(n);
    const double decrease = parent_gini - child_impurity;
    // Strict improvement keeps the smallest threshold on ties.
    if (!best || decrease > best->decrease)
      best = SplitResult{(lo + hi) / 2.0, decrease};
  }
  return best;
}

std::optional<SplitResult> best_split(const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels,
                                      std::size_t n_classes, std::size_t feature,
                                      std::size_t min_leaf) {
  std::vector<double> column;
  column.reserve(rows.size());
  for (const auto& row : rows) column.push_back(row[feature]);
  return best_split_on_column(column, labels, n_classes, min_leaf);
}

namespace detail {

namespace {

struct TreeBuilder {
  const Dataset& ds;
  std::size_t n_classes;
  std::int64_t max_depth;
  std::size_t min_leaf;
  std::vector<TreeNode> nodes;

  int majority_class(const std::vector<std::size_t>& indices) const {
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i : indices) ++counts[static_cast<std::size_t>(ds.labels[i])];
    return argmax_lowest(counts);
  }

  bool is_pure(const std::vector<std::size_t>& indices) const {
    const int first = ds.labels[indices.front()];
    return std::all_of(indices.begin(), indices.end(),
                       [&](std::size_t i) { return ds.labels[i] == first; });
  }

  int make_leaf(int class_index) {
    TreeNode node;
    node.leaf_class = class_index;
    nodes.push_back(node);
    return static_cast<int>(nodes.size() - 1);
  }

  int grow(const std::vector<std::size_t>& indices, std::int64_t depth) {
    if (depth >= max_depth || indices.size() < 2 * min_leaf || is_pure(indices))
      return make_leaf(majority_class(indices));

    // Best split over all features: decrease descending, then feature index
    // ascending, then threshold ascending (handled inside the column scan).
    std::vector<double> column(indices.size());
    std::vector<int> labels(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r)
      labels[r] = ds.labels[indices[r]];

    std::optional<SplitResult> best;
    std::size_t best_feature = 0;
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
      for (std::size_t r = 0; r < indices.size(); ++r) column[r] = ds.rows[indices[r]][j];
      const auto candidate = best_split_on_column(column, labels, n_classes, min_leaf);
      if (candidate && (!best || candidate->decrease > best->decrease)) {
        best = candidate;
        best_feature = j;
      }
    }
    // Gini is concave, so decrease is never negative; a zero-decrease split
    // is still taken (symmetric data like XOR needs one to make progress).
    if (!best) return make_leaf(majority_class(indices));

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : indices) {
      if (ds.rows[i][best_feature] < best->threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }

    TreeNode node;
    node.feature = static_cast<int>(best_feature);
    node.threshold = best->threshold;
    nodes.push_back(node);
    const auto index = static_cast<int>(nodes.size() - 1);
    const int left = grow(left_idx, depth + 1);
    const int right = grow(right_idx, depth + 1);
    nodes[static_cast<std::size_t>(index)].left = left;
    nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }
};

}  // namespace

TreePayload fit_tree(const HyperparamAssignment& params, const Dataset& std_ds,
                     std::size_t n_classes) {
  TreeBuilder builder{std_ds, n_classes, param_int(params, "max_depth"),
                      static_cast<std::size_t>(param_int(params, "min_leaf")),
                      {}};
  std::vector<std::size_t> all(std_ds.n_rows());
  std::iota(all.begin(), all.end(), 0);
  builder.grow(all, 0);
  return TreePayload{std::move(builder.nodes)};
}

int predict_tree(const TreePayload& payload, std::span<const double> z) {
  int index = 0;
  while (!payload.nodes[static_cast<std::size_t>(index)].is_leaf()) {
    const TreeNode& node = payload.nodes[static_cast<std::size_t>(index)];
    index = z[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
  }
  return payload.nodes[static_cast<std::size_t>(index)].leaf_class;
}

}  // namespace detail

}  // namespace raceml
