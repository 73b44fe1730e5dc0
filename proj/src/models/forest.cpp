#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "tempest/errors.hpp"
#include "tempest/models/model.hpp"
#include "tempest/rng.hpp"

namespace tempest {

namespace {

struct ValueTarget {
  double value;
  double target;
};

double node_mean(const std::vector<double>& y, const std::vector<std::uint32_t>& indices) {
  double s = 0.0;
  for (std::uint32_t i : indices) s += y[i];
  return s / static_cast<double>(indices.size());
}

// Summed SSE of a candidate partition, in the documented sum / sum-of-squares
// form so the exhaustive oracle can reproduce scores bit for bit.
double partition_sse(double sum_l, double sum2_l, std::size_t n_l, double sum_r, double sum2_r,
                     std::size_t n_r) {
  return (sum2_l - sum_l * sum_l / static_cast<double>(n_l)) +
         (sum2_r - sum_r * sum_r / static_cast<double>(n_r));
}

// Distinct feature columns, sampled without replacement and returned sorted
// ascending so the tie-break stays "lowest column first".
std::vector<std::size_t> sample_features(std::size_t p, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

SplitCandidate best_random_split(const Matrix& x, const std::vector<double>& y,
                                 const std::vector<std::uint32_t>& indices,
                                 const std::vector<std::size_t>& features, std::size_t min_leaf,
                                 Rng& rng) {
  SplitCandidate best;
  best.child_sse = std::numeric_limits<double>::infinity();
  for (std::size_t f : features) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::uint32_t i : indices) {
      double v = x.at(i, f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) continue;
    double threshold = rng.uniform(lo, hi);

    double sum_l = 0.0, sum2_l = 0.0, sum_r = 0.0, sum2_r = 0.0;
    std::size_t n_l = 0, n_r = 0;
    for (std::uint32_t i : indices) {
      double t = y[i];
      if (x.at(i, f) <= threshold) {
        sum_l += t;
        sum2_l += t * t;
        ++n_l;
      } else {
        sum_r += t;
        sum2_r += t * t;
        ++n_r;
      }
    }
    if (n_l < min_leaf || n_r < min_leaf) continue;
    double sse = partition_sse(sum_l, sum2_l, n_l, sum_r, sum2_r, n_r);
    if (sse < best.child_sse) {
      best.found = true;
      best.feature = f;
      best.threshold = threshold;
      best.child_sse = sse;
    }
  }
  return best;
}

void grow_tree(RegressionTree& tree, const Matrix& x, const std::vector<double>& y,
               std::vector<std::uint32_t> root_indices, const ForestParams& params,
               std::size_t max_features, Rng& rng) {
  struct Pending {
    std::uint32_t node;
    std::vector<std::uint32_t> indices;
  };
  tree.nodes.clear();
  tree.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(root_indices)});

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    auto& indices = item.indices;

    auto make_leaf = [&](std::uint32_t node) {
      tree.nodes[node].feature = -1;
      tree.nodes[node].value = node_mean(y, indices);
    };

    if (indices.size() < 2 * params.min_leaf) {
      make_leaf(item.node);
      continue;
    }
    bool constant_target = true;
    for (std::uint32_t i : indices) {
      if (y[i] != y[indices.front()]) {
        constant_target = false;
        break;
      }
    }
    if (constant_target) {
      make_leaf(item.node);
      continue;
    }

    std::vector<std::size_t> features = sample_features(x.cols, max_features, rng);
    SplitCandidate split =
        params.random_splits
            ? best_random_split(x, y, indices, features, params.min_leaf, rng)
            : find_best_split(x, y, indices, features, params.min_leaf);
    if (!split.found) {
      make_leaf(item.node);
      continue;
    }

    std::vector<std::uint32_t> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (std::uint32_t i : indices) {
      if (x.at(i, split.feature) <= split.threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }

    std::uint32_t left_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::uint32_t right_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[item.node].feature = static_cast<std::int32_t>(split.feature);
    tree.nodes[item.node].threshold = split.threshold;
    tree.nodes[item.node].left = left_id;
    tree.nodes[item.node].right = right_id;
    stack.push_back({right_id, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
}

}  // namespace

SplitCandidate find_best_split(const Matrix& x, const std::vector<double>& y,
                               const std::vector<std::uint32_t>& indices,
                               const std::vector<std::size_t>& features, std::size_t min_leaf) {
  SplitCandidate best;
  best.child_sse = std::numeric_limits<double>::infinity();
  std::vector<ValueTarget> sorted;
  sorted.reserve(indices.size());
  const std::size_t n = indices.size();

  for (std::size_t f : features) {
    sorted.clear();
    for (std::uint32_t i : indices) sorted.push_back({x.at(i, f), y[i]});
    std::sort(sorted.begin(), sorted.end(),
              [](const ValueTarget& a, const ValueTarget& b) { return a.value < b.value; });

    double sum_l = 0.0, sum2_l = 0.0;
    double sum_r = 0.0, sum2_r = 0.0;
    for (const ValueTarget& vt : sorted) {
      sum_r += vt.target;
      sum2_r += vt.target * vt.target;
    }

    for (std::size_t k = 0; k + 1 < n; ++k) {
      sum_l += sorted[k].target;
      sum2_l += sorted[k].target * sorted[k].target;
      sum_r -= sorted[k].target;
      sum2_r -= sorted[k].target * sorted[k].target;
      if (sorted[k].value == sorted[k + 1].value) continue;  // threshold only between distinct values
      std::size_t n_l = k + 1;
      std::size_t n_r = n - n_l;
      if (n_l < min_leaf || n_r < min_leaf) continue;
      double sse = partition_sse(sum_l, sum2_l, n_l, sum_r, sum2_r, n_r);
      if (sse < best.child_sse) {
        best.found = true;
        best.feature = f;
        best.threshold = (sorted[k].value + sorted[k + 1].value) / 2.0;
        best.child_sse = sse;
      }
    }
  }
  return best;
}

ForestModel train_forest(const Matrix& x, const std::vector<double>& y, const ForestParams& params,
                         std::uint64_t seed) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  if (n < 2 || p == 0) throw DegenerateData("forest needs n >= 2 rows and p >= 1 columns");
  if (params.n_trees < 1) throw BadHyperparameter("forest needs n_trees >= 1");
  if (params.min_leaf < 1) throw BadHyperparameter("forest needs min_leaf >= 1");
  std::size_t max_features =
      params.max_features == 0 ? (p + 2) / 3 : params.max_features;
  if (max_features < 1 || max_features > p)
    throw BadHyperparameter("forest max_features must be in [1, p]");

  ForestModel model;
  model.trees.resize(params.n_trees);

  // Each tree draws from its own (seed, index) stream, so parallel and
  // serial runs build identical forests and tree count changes leave
  // earlier trees untouched.
  auto build_one = [&](std::size_t t) {
    Rng rng = Rng::stream(seed, "tree", t);
    std::vector<std::uint32_t> indices;
    indices.reserve(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        indices.push_back(static_cast<std::uint32_t>(rng.below(n)));
    } else {
      indices.resize(n);
      std::iota(indices.begin(), indices.end(), 0);
    }
    grow_tree(model.trees[t], x, y, std::move(indices), params, max_features, rng);
  };

  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = std::min<std::size_t>(std::max(1u, hw), params.n_trees);
  if (workers <= 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build_one(t);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          std::size_t t = cursor.fetch_add(1);
          if (t >= params.n_trees) return;
          build_one(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

double RegressionTree::predict(const double* x) const {
  std::uint32_t node = 0;
  while (nodes[node].feature >= 0) {
    const Node& nd = nodes[node];
    node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[node].value;
}

}  // namespace tempest
