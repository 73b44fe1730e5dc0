#include "tempest/models/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tempest/errors.hpp"
#include "tempest/kernels.hpp"

namespace tempest {

namespace {

using nlohmann::json;

void check_keys(const ModelConfig& config) {
  const auto& allowed = variant_param_keys(config.variant);
  for (const auto& [key, value] : config.params) {
    if (!allowed.count(key))
      throw BadHyperparameter("unknown hyperparameter '" + key + "' for variant " +
                              std::string(variant_name(config.variant)));
  }
}

std::size_t size_param(const ModelConfig& config, const std::string& key, std::size_t fallback) {
  double v = config.param(key, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v))
    throw BadHyperparameter("hyperparameter '" + key + "' must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string_view variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::Ridge:
      return "ridge";
    case ModelVariant::Svr:
      return "svr";
    case ModelVariant::Mlp:
      return "mlp";
    case ModelVariant::Rfr:
      return "rfr";
    case ModelVariant::Etr:
      return "etr";
  }
  return "";
}

ModelVariant variant_from_name(std::string_view name) {
  for (ModelVariant v : {ModelVariant::Ridge, ModelVariant::Svr, ModelVariant::Mlp,
                         ModelVariant::Rfr, ModelVariant::Etr}) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

const std::set<std::string>& variant_param_keys(ModelVariant v) {
  static const std::set<std::string> ridge = {"lambda"};
  static const std::set<std::string> svr = {"c", "epsilon", "gamma", "tol", "max_iter"};
  static const std::set<std::string> mlp = {"hidden1", "hidden2", "epochs", "batch",
                                            "learning_rate"};
  static const std::set<std::string> forest = {"n_trees", "max_features", "min_leaf"};
  switch (v) {
    case ModelVariant::Ridge:
      return ridge;
    case ModelVariant::Svr:
      return svr;
    case ModelVariant::Mlp:
      return mlp;
    default:
      return forest;
  }
}

TrainedModel train(const ModelConfig& config, const EncodedDataset& data) {
  const Matrix& x = data.x;
  if (x.rows < 2 || x.cols == 0)
    throw DegenerateData("training needs n >= 2 rows and p >= 1 columns");
  for (double v : x.data)
    if (!std::isfinite(v)) throw DegenerateData("training matrix contains a non-finite value");
  for (double v : data.y)
    if (!std::isfinite(v)) throw DegenerateData("training targets contain a non-finite value");

  TrainedModel model;
  model.config = config;
  model.schema_hash = data.schema_hash;
  model.train_width = x.cols;

  switch (config.variant) {
    case ModelVariant::Ridge: {
      check_keys(config);
      double lambda = config.param("lambda", 1.0);
      if (lambda < 0.0) throw BadHyperparameter("ridge lambda must be >= 0");
      model.config.params["lambda"] = lambda;
      model.fitted = train_ridge(x, data.y, lambda);
      break;
    }
    case ModelVariant::Svr: {
      check_keys(config);
      SvrParams p;
      p.c = config.param("c", 10.0);
      p.epsilon = config.param("epsilon", 0.5);
      p.gamma = config.param("gamma", 0.0);
      p.tol = config.param("tol", 1e-3);
      p.max_iter = size_param(config, "max_iter", 10000);
      if (p.gamma == 0.0) p.gamma = 1.0 / static_cast<double>(x.cols);
      model.config.params["c"] = p.c;
      model.config.params["epsilon"] = p.epsilon;
      model.config.params["gamma"] = p.gamma;
      model.config.params["tol"] = p.tol;
      model.config.params["max_iter"] = static_cast<double>(p.max_iter);
      model.fitted = train_svr(x, data.y, p);
      break;
    }
    case ModelVariant::Mlp: {
      check_keys(config);
      MlpParams p;
      p.hidden1 = size_param(config, "hidden1", 100);
      p.hidden2 = size_param(config, "hidden2", 50);
      p.epochs = size_param(config, "epochs", 200);
      p.batch = size_param(config, "batch", 32);
      p.learning_rate = config.param("learning_rate", 1e-3);
      model.config.params["hidden1"] = static_cast<double>(p.hidden1);
      model.config.params["hidden2"] = static_cast<double>(p.hidden2);
      model.config.params["epochs"] = static_cast<double>(p.epochs);
      model.config.params["batch"] = static_cast<double>(p.batch);
      model.config.params["learning_rate"] = p.learning_rate;
      model.fitted = train_mlp(x, data.y, p, config.seed);
      break;
    }
    case ModelVariant::Rfr:
    case ModelVariant::Etr: {
      check_keys(config);
      ForestParams p;
      p.n_trees = size_param(config, "n_trees", 100);
      p.max_features = size_param(config, "max_features", 0);
      p.min_leaf = size_param(config, "min_leaf", 2);
      p.bootstrap = config.variant == ModelVariant::Rfr;
      p.random_splits = config.variant == ModelVariant::Etr;
      std::size_t resolved_mf = p.max_features == 0 ? (x.cols + 2) / 3 : p.max_features;
      model.config.params["n_trees"] = static_cast<double>(p.n_trees);
      model.config.params["max_features"] = static_cast<double>(resolved_mf);
      model.config.params["min_leaf"] = static_cast<double>(p.min_leaf);
      model.fitted = train_forest(x, data.y, p, config.seed);
      break;
    }
  }
  return model;
}

std::vector<double> TrainedModel::predict(const Matrix& x) const {
  if (x.rows > 0 && x.cols != train_width)
    throw WidthMismatch("predict got " + std::to_string(x.cols) + " columns, model trained on " +
                        std::to_string(train_width));
  std::vector<double> out(x.rows, 0.0);

  if (const auto* ridge = std::get_if<RidgeModel>(&fitted)) {
    for (std::size_t i = 0; i < x.rows; ++i)
      out[i] = kernels::dot(ridge->weights.data(), x.row(i), x.cols) + ridge->intercept;
  } else if (const auto* svr = std::get_if<SvrModel>(&fitted)) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      double f = svr->bias;
      for (std::size_t s = 0; s < svr->coefficients.size(); ++s) {
        double d = kernels::squared_distance(svr->support_vectors.row(s), x.row(i), x.cols);
        f += svr->coefficients[s] * std::exp(-svr->gamma * d);
      }
      out[i] = f;
    }
  } else if (const auto* mlp = std::get_if<MlpModel>(&fitted)) {
    out = mlp_predict(*mlp, x);
  } else if (const auto* forest = std::get_if<ForestModel>(&fitted)) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      double s = 0.0;
      for (const RegressionTree& t : forest->trees) s += t.predict(x.row(i));
      out[i] = s / static_cast<double>(forest->trees.size());
    }
  }
  return out;
}

std::string TrainedModel::to_json() const {
  json doc;
  doc["format"] = "tempest-model/1";
  doc["variant"] = std::string(variant_name(config.variant));
  doc["seed"] = config.seed;
  doc["params"] = config.params;
  doc["schema_hash"] = schema_hash;
  doc["train_width"] = train_width;

  json body;
  if (const auto* ridge = std::get_if<RidgeModel>(&fitted)) {
    body["weights"] = ridge->weights;
    body["intercept"] = ridge->intercept;
  } else if (const auto* svr = std::get_if<SvrModel>(&fitted)) {
    json rows = json::array();
    for (std::size_t r = 0; r < svr->support_vectors.rows; ++r) {
      rows.push_back(std::vector<double>(svr->support_vectors.row(r),
                                         svr->support_vectors.row(r) + svr->support_vectors.cols));
    }
    body["support_vectors"] = std::move(rows);
    body["coefficients"] = svr->coefficients;
    body["bias"] = svr->bias;
    body["gamma"] = svr->gamma;
    body["converged"] = svr->converged;
    body["iterations"] = svr->iterations;
    body["dual_objective"] = svr->dual_objective;
    body["beta_sum"] = svr->beta_sum;
  } else if (const auto* mlp = std::get_if<MlpModel>(&fitted)) {
    body["input"] = mlp->input;
    body["hidden1"] = mlp->hidden1;
    body["hidden2"] = mlp->hidden2;
    body["params"] = mlp->params;
    body["loss_history"] = mlp->loss_history;
  } else if (const auto* forest = std::get_if<ForestModel>(&fitted)) {
    json trees = json::array();
    for (const RegressionTree& t : forest->trees) {
      json nodes = json::array();
      for (const auto& nd : t.nodes)
        nodes.push_back(json::array({nd.feature, nd.threshold, nd.value, nd.left, nd.right}));
      trees.push_back(std::move(nodes));
    }
    body["trees"] = std::move(trees);
  }
  doc["model"] = std::move(body);
  return doc.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model artifact is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "tempest-model/1")
    throw SchemaError("unrecognized model artifact format");

  TrainedModel m;
  m.config.variant = variant_from_name(doc.at("variant").get<std::string>());
  m.config.seed = doc.at("seed").get<std::uint64_t>();
  m.config.params = doc.at("params").get<std::map<std::string, double>>();
  m.schema_hash = doc.at("schema_hash").get<std::uint64_t>();
  m.train_width = doc.at("train_width").get<std::size_t>();

  const json& body = doc.at("model");
  switch (m.config.variant) {
    case ModelVariant::Ridge: {
      RidgeModel r;
      r.weights = body.at("weights").get<std::vector<double>>();
      r.intercept = body.at("intercept").get<double>();
      m.fitted = std::move(r);
      break;
    }
    case ModelVariant::Svr: {
      SvrModel s;
      const json& rows = body.at("support_vectors");
      s.support_vectors = Matrix(rows.size(), m.train_width);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto vec = rows[r].get<std::vector<double>>();
        if (vec.size() != m.train_width) throw SchemaError("support vector width mismatch");
        std::copy(vec.begin(), vec.end(), s.support_vectors.row(r));
      }
      s.coefficients = body.at("coefficients").get<std::vector<double>>();
      s.bias = body.at("bias").get<double>();
      s.gamma = body.at("gamma").get<double>();
      s.converged = body.at("converged").get<bool>();
      s.iterations = body.at("iterations").get<std::uint64_t>();
      s.dual_objective = body.at("dual_objective").get<double>();
      s.beta_sum = body.at("beta_sum").get<double>();
      m.fitted = std::move(s);
      break;
    }
    case ModelVariant::Mlp: {
      MlpModel net;
      net.input = body.at("input").get<std::size_t>();
      net.hidden1 = body.at("hidden1").get<std::size_t>();
      net.hidden2 = body.at("hidden2").get<std::size_t>();
      net.params = body.at("params").get<std::vector<double>>();
      net.loss_history = body.at("loss_history").get<std::vector<double>>();
      if (net.params.size() != net.param_count()) throw SchemaError("mlp parameter count mismatch");
      m.fitted = std::move(net);
      break;
    }
    case ModelVariant::Rfr:
    case ModelVariant::Etr: {
      ForestModel f;
      for (const json& tree_nodes : body.at("trees")) {
        RegressionTree t;
        for (const json& nd : tree_nodes) {
          RegressionTree::Node node;
          node.feature = nd.at(0).get<std::int32_t>();
          node.threshold = nd.at(1).get<double>();
          node.value = nd.at(2).get<double>();
          node.left = nd.at(3).get<std::uint32_t>();
          node.right = nd.at(4).get<std::uint32_t>();
          t.nodes.push_back(node);
        }
        f.trees.push_back(std::move(t));
      }
      m.fitted = std::move(f);
      break;
    }
  }
  return m;
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace tempest
