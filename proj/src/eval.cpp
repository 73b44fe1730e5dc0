#include "tempest/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tempest/errors.hpp"
#include "tempest/hash.hpp"
#include "tempest/kernels.hpp"
#include "tempest/preprocess.hpp"
#include "tempest/text.hpp"

namespace tempest {

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  if (predicted.size() != actual.size())
    throw LengthMismatch("rmse got " + std::to_string(predicted.size()) + " predictions vs " +
                         std::to_string(actual.size()) + " actuals");
  if (predicted.empty()) throw EmptyInput("rmse needs at least one pair");
  double ss = kernels::squared_distance(predicted.data(), actual.data(), predicted.size());
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

std::array<long long, 12> residual_histogram(const std::vector<double>& residuals) {
  std::array<long long, 12> counts{};
  for (double r : residuals) {
    // r in (k-1, k] maps to index k+5; ends clamp.
    int idx = static_cast<int>(std::ceil(r)) + 5;
    idx = std::clamp(idx, 0, 11);
    ++counts[static_cast<std::size_t>(idx)];
  }
  return counts;
}

EvalReport make_report(const std::vector<double>& predicted, const std::vector<double>& actual) {
  EvalReport report;
  report.rmse_f = rmse(predicted, actual);
  report.n = predicted.size();
  report.residuals.resize(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i)
    report.residuals[i] = predicted[i] - actual[i];
  report.histogram = residual_histogram(report.residuals);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["rmse"] = report.rmse_f;
  doc["n"] = report.n;
  doc["histogram"] = report.histogram;
  doc["residuals"] = report.residuals;
  return doc.dump(2);
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << report_to_json(report) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

std::string make_fingerprint(const ModelConfig& resolved, const DatasetSplit& split,
                             bool scaler_union, const std::string& extra) {
  std::ostringstream key;
  key << variant_name(resolved.variant) << ";seed=" << resolved.seed << ";";
  for (const auto& [k, v] : resolved.params) key << k << '=' << format_double(v) << ',';
  key << ";cities=";
  for (const auto& c : split.train.city_order) key << c << ',';
  key << ";train=" << split.train_range.start.to_string() << ".."
      << split.train_range.end.to_string() << ";test=" << split.test_range.start.to_string()
      << ".." << split.test_range.end.to_string()
      << ";scaler=" << (scaler_union ? "union" : "train") << ";" << extra;
  return hex64(fnv1a64(key.str()));
}

}  // namespace

PipelineResult evaluate_split(const DatasetSplit& split, const ModelConfig& model,
                              bool scaler_union, const std::string& fingerprint_extra) {
  JoinedTable all;
  all.city_order = split.train.city_order;
  all.active_columns = split.train.active_columns;
  all.rows = split.train.rows;
  all.rows.insert(all.rows.end(), split.test.rows.begin(), split.test.rows.end());

  FeatureSchema schema = build_schema(all);
  EncodedDataset train_enc = encode_rows(split.train, schema);
  EncodedDataset test_enc = encode_rows(split.test, schema);
  if (scaler_union) {
    schema = fit_scaler(encode_rows(all, schema), schema);
  } else {
    schema = fit_scaler(train_enc, schema);
  }
  train_enc = apply_scaler(std::move(train_enc), schema);
  test_enc = apply_scaler(std::move(test_enc), schema);

  PipelineResult result;
  result.model = train(model, train_enc);
  std::vector<double> predicted = result.model.predict(test_enc.x);
  result.report = make_report(predicted, test_enc.y);
  result.schema = std::move(schema);
  result.fingerprint =
      make_fingerprint(result.model.config, split, scaler_union, fingerprint_extra);
  result.train_rows = split.train.rows.size();
  result.test_rows = split.test.rows.size();
  return result;
}

PipelineResult run_pipeline(const Corpus& corpus, std::size_t k_cities,
                            const PipelineOptions& options) {
  if (corpus.cities.empty()) throw ConfigError("corpus has no cities configured");
  std::size_t k = k_cities == 0 ? corpus.cities.size() : k_cities;
  if (k > corpus.cities.size())
    throw ConfigError("requested " + std::to_string(k) + " cities, corpus has " +
                      std::to_string(corpus.cities.size()));
  std::vector<CityId> cities(corpus.cities.begin(),
                             corpus.cities.begin() + static_cast<std::ptrdiff_t>(k));

  JoinedTable joined = join_cities(corpus.observations, cities);
  joined = attach_target(std::move(joined), cities.front().name, options.horizon_hours);
  DatasetSplit split = split_by_date(joined, options.train_range, options.test_range);
  return evaluate_split(split, options.model, options.scaler_union,
                        "k=" + std::to_string(k));
}

std::vector<CurvePoint> run_adding_cities(const Corpus& corpus, const PipelineOptions& options) {
  std::vector<CurvePoint> points;
  for (std::size_t k = 1; k <= corpus.cities.size(); ++k) {
    try {
      PipelineResult r = run_pipeline(corpus, k, options);
      points.push_back({std::to_string(k), r.report.rmse_f, r.fingerprint});
    } catch (const Error& e) {
      throw DataError("adding-cities point k=" + std::to_string(k) + ": " + e.what());
    }
  }
  return points;
}

std::vector<CurvePoint> run_weeks_curve(const Corpus& corpus, const PipelineOptions& options,
                                        int k_max) {
  JoinedTable joined = join_cities(corpus.observations, corpus.cities);
  joined = attach_target(std::move(joined), corpus.cities.front().name, options.horizon_hours);
  DatasetSplit split = split_by_date(joined, options.train_range, options.test_range);

  std::vector<CurvePoint> points;
  for (int k = 1; k <= k_max; ++k) {
    try {
      DatasetSplit sub = trailing_weeks_subset(split, k);
      PipelineResult r =
          evaluate_split(sub, options.model, options.scaler_union, "weeks=" + std::to_string(k));
      points.push_back({std::to_string(k), r.report.rmse_f, r.fingerprint});
    } catch (const Error& e) {
      throw DataError("weeks point k=" + std::to_string(k) + ": " + e.what());
    }
  }
  return points;
}

std::vector<CurvePoint> run_model_comparison(const Corpus& corpus,
                                             const PipelineOptions& options) {
  std::vector<CurvePoint> points;
  for (ModelVariant v : {ModelVariant::Ridge, ModelVariant::Svr, ModelVariant::Mlp,
                         ModelVariant::Rfr, ModelVariant::Etr}) {
    for (std::size_t k : {std::size_t{1}, corpus.cities.size()}) {
      PipelineOptions opt = options;
      opt.model.variant = v;
      // keep only the hyperparameters this variant understands
      const auto& allowed = variant_param_keys(v);
      std::erase_if(opt.model.params,
                    [&allowed](const auto& kv) { return !allowed.count(kv.first); });
      try {
        PipelineResult r = run_pipeline(corpus, k, opt);
        points.push_back({std::string(variant_name(v)) + "/" + std::to_string(k),
                          r.report.rmse_f, r.fingerprint});
      } catch (const Error& e) {
        throw DataError("model comparison " + std::string(variant_name(v)) + "/" +
                        std::to_string(k) + ": " + e.what());
      }
    }
  }
  return points;
}

std::vector<CurvePoint> run_test_size_curve(const Corpus& corpus, const PipelineOptions& options,
                                            const std::vector<std::size_t>& sizes) {
  for (std::size_t s : sizes)
    if (s == 0) throw ConfigError("test size 0 requested");

  std::vector<CurvePoint> points;
  for (std::size_t k : {std::size_t{1}, corpus.cities.size()}) {
    PipelineResult r = run_pipeline(corpus, k, options);
    const std::vector<double>& residuals = r.report.residuals;
    for (std::size_t s : sizes) {
      if (s > residuals.size())
        throw DataError("test size " + std::to_string(s) + " exceeds the " +
                        std::to_string(residuals.size()) + " available test rows");
      double ss = kernels::sum_squared_diff(residuals.data(), s, 0.0);
      double value = std::sqrt(ss / static_cast<double>(s));
      points.push_back({std::to_string(s) + "/" + std::to_string(k), value, r.fingerprint});
    }
  }
  return points;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points,
                     const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const std::string& c : comments) out << "# " << c << '\n';
  out << "x,rmse,fingerprint\n";
  for (const CurvePoint& p : points)
    out << p.x << ',' << format_double(p.rmse_f) << ',' << p.fingerprint << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace tempest
