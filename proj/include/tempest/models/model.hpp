#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tempest/matrix.hpp"
#include "tempest/preprocess.hpp"

namespace tempest {

enum class ModelVariant { Ridge, Svr, Mlp, Rfr, Etr };

std::string_view variant_name(ModelVariant v);
ModelVariant variant_from_name(std::string_view name);

// Hyperparameter keys a variant accepts; anything else is rejected at train
// time.
const std::set<std::string>& variant_param_keys(ModelVariant v);

// Variant plus seed plus hyperparameters. Parameters not set here fall back
// to the documented defaults; unknown keys are rejected at train time.
struct ModelConfig {
  ModelVariant variant = ModelVariant::Rfr;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

// --- fitted parameter sets ---------------------------------------------------

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

struct SvrModel {
  Matrix support_vectors;
  std::vector<double> coefficients;  // alpha - alpha* per support vector
  double bias = 0.0;
  double gamma = 0.0;
  bool converged = true;
  std::uint64_t iterations = 0;
  double dual_objective = 0.0;       // alpha-form objective at exit
  double beta_sum = 0.0;             // sum of all dual coefficients at exit
};

struct MlpModel {
  std::size_t input = 0;
  std::size_t hidden1 = 0;
  std::size_t hidden2 = 0;
  std::vector<double> params;        // [W1, b1, W2, b2, W3, b3], row-major
  std::vector<double> loss_history;  // mean batch loss per epoch

  std::size_t param_count() const {
    return hidden1 * input + hidden1 + hidden2 * hidden1 + hidden2 + hidden2 + 1;
  }
};

struct RegressionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    double value = 0.0;         // leaf mean
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(const double* x) const;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
};

// --- the uniform train/predict surface ----------------------------------------

class TrainedModel {
 public:
  ModelConfig config;  // defaults merged, derived values (gamma, max_features) resolved
  std::uint64_t schema_hash = 0;
  std::size_t train_width = 0;
  std::variant<RidgeModel, SvrModel, MlpModel, ForestModel> fitted;

  std::vector<double> predict(const Matrix& x) const;

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);
};

// Dispatches on config.variant. All randomness derives from config.seed, so
// identical (config, data) gives a bit-identical model.
TrainedModel train(const ModelConfig& config, const EncodedDataset& data);

// --- variant trainers (exposed for the oracle tests) ---------------------------

RidgeModel train_ridge(const Matrix& x, const std::vector<double>& y, double lambda);

struct SvrParams {
  double c = 10.0;
  double epsilon = 0.5;
  double gamma = 0.0;  // resolved to 1/p when 0
  double tol = 1e-3;
  std::uint64_t max_iter = 10000;
};
SvrModel train_svr(const Matrix& x, const std::vector<double>& y, SvrParams params);

struct MlpParams {
  std::size_t hidden1 = 100;
  std::size_t hidden2 = 50;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
};
MlpModel train_mlp(const Matrix& x, const std::vector<double>& y, const MlpParams& params,
                   std::uint64_t seed);

// Fresh seeded network without any training steps.
MlpModel init_mlp(std::size_t input, const MlpParams& params, std::uint64_t seed);
double mlp_batch_loss(const MlpModel& model, const Matrix& x, const std::vector<double>& y);
std::vector<double> mlp_batch_gradient(const MlpModel& model, const Matrix& x,
                                       const std::vector<double>& y);
std::vector<double> mlp_predict(const MlpModel& model, const Matrix& x);

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // resolved to ceil(p/3) when 0
  std::size_t min_leaf = 2;
  bool bootstrap = true;        // RFR: bootstrap + best splits
  bool random_splits = false;   // ETR: full sample + random thresholds
};
ForestModel train_forest(const Matrix& x, const std::vector<double>& y, const ForestParams& params,
                         std::uint64_t seed);

// Best split over the given feature set: minimizes the summed child SSE
// computed as sum(y^2) - (sum y)^2 / n per side; thresholds are midpoints of
// consecutive distinct sorted values; ties resolved toward the lowest
// (column, threshold). Exposed so the exhaustive-search oracle can compare.
struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double child_sse = 0.0;
};
SplitCandidate find_best_split(const Matrix& x, const std::vector<double>& y,
                               const std::vector<std::uint32_t>& indices,
                               const std::vector<std::size_t>& features, std::size_t min_leaf);

}  // namespace tempest
