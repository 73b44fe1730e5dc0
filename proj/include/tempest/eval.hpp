#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tempest/dataset.hpp"
#include "tempest/models/model.hpp"
#include "tempest/synth.hpp"

namespace tempest {

// Root mean squared error, sqrt(sum((pred - actual)^2) / n).
double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

// Twelve half-open unit buckets (-6,-5] .. (5,6]; index 5 is (-1,0].
// Residuals outside the span clamp into the end buckets, so counts always
// sum to the input size.
std::array<long long, 12> residual_histogram(const std::vector<double>& residuals);

struct EvalReport {
  double rmse_f = 0.0;
  std::vector<double> residuals;  // predicted - actual, test order
  std::array<long long, 12> histogram{};
  std::size_t n = 0;
};

EvalReport make_report(const std::vector<double>& predicted, const std::vector<double>& actual);
std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);

// One point of a result curve; the fingerprint pins seed, hyperparameters
// and data window so any point can be re-run.
struct CurvePoint {
  std::string x;
  double rmse_f = 0.0;
  std::string fingerprint;
};

// Observations plus the configured city list, target city first.
struct Corpus {
  std::vector<RawObservation> observations;
  std::vector<CityId> cities;
};

struct PipelineOptions {
  DateRange train_range;
  DateRange test_range;
  ModelConfig model;
  bool scaler_union = false;  // fit the scaler on train+test instead of train
  int horizon_hours = 24;
};

struct PipelineResult {
  EvalReport report;
  TrainedModel model;
  FeatureSchema schema;
  std::string fingerprint;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

// Full data path for the first k cities of the corpus (k = 0 means all):
// join -> attach target -> split -> schema on the split union -> encode ->
// scale -> train -> evaluate on the test window.
PipelineResult run_pipeline(const Corpus& corpus, std::size_t k_cities,
                            const PipelineOptions& options);

// Same tail of the path, starting from an existing split.
PipelineResult evaluate_split(const DatasetSplit& split, const ModelConfig& model,
                              bool scaler_union, const std::string& fingerprint_extra);

// Experiment runners behind the CLI `experiment` subcommand.
std::vector<CurvePoint> run_adding_cities(const Corpus& corpus, const PipelineOptions& options);
std::vector<CurvePoint> run_weeks_curve(const Corpus& corpus, const PipelineOptions& options,
                                        int k_max = 9);
std::vector<CurvePoint> run_model_comparison(const Corpus& corpus,
                                             const PipelineOptions& options);
std::vector<CurvePoint> run_test_size_curve(const Corpus& corpus, const PipelineOptions& options,
                                            const std::vector<std::size_t>& sizes);

inline const std::vector<std::size_t> kDefaultTestSizes = {20, 40, 60, 80, 100, 120, 140, 160};

// Curve CSV "x,rmse,fingerprint" with '#' comment lines up front.
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points,
                     const std::vector<std::string>& comments);

}  // namespace tempest
