// tempest: next-day hourly temperature forecasting from multi-city
// observations. Subcommands cover the full data path: fetch/synth ->
// build -> train -> predict -> evaluate, plus the experiment runners.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "run_config.hpp"
#include "tempest/dataset.hpp"
#include "tempest/errors.hpp"
#include "tempest/eval.hpp"
#include "tempest/hash.hpp"
#include "tempest/ingest.hpp"
#include "tempest/kernels.hpp"
#include "tempest/preprocess.hpp"
#include "tempest/svg.hpp"
#include "tempest/synth.hpp"
#include "tempest/text.hpp"

namespace fs = std::filesystem;
using namespace tempest;
using tempest::cli::RunConfig;

namespace {

std::vector<CivilDate> fetch_dates(const RunConfig& cfg) {
  // The horizon target of the last test row lands one day past test_end-1,
  // so the grid includes test_end itself.
  std::vector<CivilDate> dates;
  std::int64_t horizon_days = (cfg.horizon_hours + 23) / 24;
  CivilDate stop = cfg.test_end.plus_days(horizon_days);
  for (CivilDate d = cfg.train_start; d < stop; d = d.plus_days(1)) dates.push_back(d);
  return dates;
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

void ensure_converged(const TrainedModel& model, const RunConfig& cfg) {
  if (cfg.svr_nonconvergence_fatal && model.config.variant == ModelVariant::Svr) {
    const auto& svr = std::get<SvrModel>(model.fitted);
    if (!svr.converged)
      throw NonConvergence("svr did not converge within max_iter and "
                           "svr_nonconvergence_fatal is set");
  }
}

int cmd_fetch(const RunConfig& cfg, bool live) {
  cfg.echo(cfg.out);
  std::unique_ptr<HistoryClient> client;
  if (live) {
    if (cfg.live.base_url.empty())
      throw ConfigError("--live requires live.base_url in the config");
    client = std::make_unique<LiveHistoryClient>(cfg.live);
  } else {
    client = std::make_unique<FixtureHistoryClient>(cfg.resolved_fixture_dir());
  }

  FetchOptions options;
  options.parallelism = cfg.fetch_parallelism;
  options.min_interval_ms = cfg.fetch_min_interval_ms;
  FetchReport report = fetch_grid(*client, cfg.cities, fetch_dates(cfg), options);

  fs::create_directories(cfg.out);
  fs::path csv = cfg.out / "observations.csv";
  std::size_t rows = write_canonical(report.observations, csv);
  std::printf("wrote %zu observations to %s\n", rows, csv.string().c_str());

  if (!report.failures.empty()) {
    for (const auto& f : report.failures)
      std::fprintf(stderr, "missing (%s, %s): %s\n", f.city.c_str(), f.date.to_string().c_str(),
                   f.reason.c_str());
    std::fprintf(stderr, "%zu (city, day) pairs missing\n", report.failures.size());
    return 2;
  }
  return 0;
}

int cmd_synth(const RunConfig& cfg, bool emit_fixtures) {
  cfg.echo(cfg.out);
  SynthConfig synth = cfg.synth_config();
  auto observations = generate(synth);

  fs::create_directories(cfg.out);
  fs::path csv = cfg.out / "observations.csv";
  std::size_t rows = write_canonical(observations, csv);
  std::printf("wrote %zu observations to %s\n", rows, csv.string().c_str());
  std::printf("span %s .. %s (%d days)\n", synth.start.to_string().c_str(),
              synth.start.plus_days(synth.days).to_string().c_str(), synth.days);
  std::printf("content hash %s\n", hex64(file_hash(csv)).c_str());

  if (emit_fixtures) {
    // UTC-day documents keep the fetch grid aligned with the generated span,
    // so a fixture-backed fetch reproduces observations.csv byte for byte.
    fs::path fixtures = cfg.out / "fixtures";
    write_fixture_tree(observations, cfg.cities, 0, fixtures);
    std::printf("wrote fixture tree to %s\n", fixtures.string().c_str());
  }
  return 0;
}

int cmd_build(const RunConfig& cfg, const fs::path& obs_path) {
  cfg.echo(cfg.out);
  auto observations = read_canonical(obs_path);
  JoinedTable table = join_cities(observations, cfg.cities);
  table = attach_target(std::move(table), cfg.target_city, cfg.horizon_hours);

  fs::create_directories(cfg.out);
  fs::path csv = cfg.out / "dataset.csv";
  write_joined_csv(table, csv);
  std::printf("wrote %zu joined rows (%zu feature columns) to %s\n", table.rows.size(),
              table.active_columns.size(), csv.string().c_str());
  return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& data_path) {
  cfg.echo(cfg.out);
  JoinedTable table = read_joined_csv(data_path);
  DatasetSplit split = split_by_date(table, cfg.train_range(), cfg.test_range());

  JoinedTable all;
  all.city_order = split.train.city_order;
  all.active_columns = split.train.active_columns;
  all.rows = split.train.rows;
  all.rows.insert(all.rows.end(), split.test.rows.begin(), split.test.rows.end());
  FeatureSchema schema = build_schema(all);

  EncodedDataset train_enc = encode_rows(split.train, schema);
  schema = cfg.scaler_union ? fit_scaler(encode_rows(all, schema), schema)
                            : fit_scaler(train_enc, schema);
  train_enc = apply_scaler(std::move(train_enc), schema);

  TrainedModel model = train(cfg.model, train_enc);
  ensure_converged(model, cfg);

  fs::create_directories(cfg.out);
  schema.save(cfg.out / "schema.json");
  model.save(cfg.out / "model.json");
  std::printf("trained %s on %zu rows x %zu columns (schema %s)\n",
              std::string(variant_name(model.config.variant)).c_str(), train_enc.x.rows,
              train_enc.x.cols, hex64(model.schema_hash).c_str());
  return 0;
}

int cmd_predict(const RunConfig& cfg, const fs::path& data_path, const fs::path& model_path,
                const fs::path& schema_path) {
  cfg.echo(cfg.out);
  TrainedModel model = TrainedModel::load(model_path);
  FeatureSchema schema = FeatureSchema::load(schema_path);
  if (schema.hash() != model.schema_hash)
    throw DataError("schema hash mismatch: model was trained against " +
                    hex64(model.schema_hash) + ", supplied schema is " + hex64(schema.hash()));

  JoinedTable table = read_joined_csv(data_path);
  DatasetSplit split = split_by_date(table, cfg.train_range(), cfg.test_range());
  EncodedDataset test_enc = apply_scaler(encode_rows(split.test, schema), schema);

  std::vector<double> predicted = model.predict(test_enc.x);

  fs::create_directories(cfg.out);
  fs::path csv = cfg.out / "predictions.csv";
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw IoError("cannot open " + csv.string() + " for writing");
  out << "timestamp_utc,predicted_temp_f,actual_temp_f\n";
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out << split.test.rows[i].timestamp.to_string() << ',' << format_double(predicted[i]) << ','
        << format_double(test_enc.y[i]) << '\n';
  }
  if (!out) throw IoError("failed writing " + csv.string());

  std::printf("wrote %zu predictions to %s\n", predicted.size(), csv.string().c_str());
  std::printf("rmse %.6f\n", rmse(predicted, test_enc.y));
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& pred_path) {
  cfg.echo(cfg.out);
  std::ifstream in(pred_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + pred_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "timestamp_utc,predicted_temp_f,actual_temp_f")
    throw SchemaError("predictions header mismatch in " + pred_path.string());
  std::vector<double> predicted, actual;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 3)
      throw SchemaError("row " + std::to_string(row) + ": expected 3 columns");
    auto p = parse_double(fields[1]);
    auto a = parse_double(fields[2]);
    if (!p || !a) throw ValueError("row " + std::to_string(row) + ": bad numeric");
    predicted.push_back(*p);
    actual.push_back(*a);
  }

  EvalReport report = make_report(predicted, actual);
  fs::create_directories(cfg.out);
  write_report(report, cfg.out / "report.json");

  SvgSeries scatter{"residuals", {}};
  for (std::size_t i = 0; i < report.residuals.size(); ++i)
    scatter.points.emplace_back(static_cast<double>(i), report.residuals[i]);
  write_scatter_chart(cfg.out / "residuals_scatter.svg", "prediction residuals", "test example",
                      "residual (F)", {scatter});
  write_histogram_chart(cfg.out / "residuals_hist.svg", "residual distribution",
                        report.histogram);

  std::printf("rmse %.6f over %zu examples\n", report.rmse_f, report.n);
  return 0;
}

Corpus experiment_corpus(const RunConfig& cfg, const std::optional<fs::path>& obs_path,
                         DateRange& train_range) {
  Corpus corpus;
  corpus.cities = cfg.cities;
  if (obs_path) {
    corpus.observations = read_canonical(*obs_path);
    train_range = cfg.train_range();
  } else {
    SynthConfig synth = cfg.synth_config();
    corpus.observations = generate(synth);
    train_range = {synth.start, cfg.test_start};
  }
  return corpus;
}

void write_line_curve(const fs::path& path, const std::vector<CurvePoint>& points,
                      const std::string& title, const std::string& x_label) {
  SvgSeries series{"", {}};
  for (const auto& p : points) {
    try {
      series.points.emplace_back(std::stod(p.x), p.rmse_f);
    } catch (const std::exception&) {
      series.points.emplace_back(static_cast<double>(series.points.size() + 1), p.rmse_f);
    }
  }
  write_line_chart(path, title, x_label, "RMSE (F)", {series});
}

int cmd_experiment(const RunConfig& cfg, const std::string& which,
                   const std::optional<fs::path>& obs_path) {
  cfg.echo(cfg.out);
  fs::create_directories(cfg.out);

  PipelineOptions options;
  options.test_range = cfg.test_range();
  options.model = cfg.model;
  options.scaler_union = cfg.scaler_union;
  options.horizon_hours = cfg.horizon_hours;
  Corpus corpus = experiment_corpus(cfg, obs_path, options.train_range);

  bool all = which == "all";
  const std::string not_reproducible = "paper (original data, not reproducible): ";

  if (all || which == "cities") {
    auto points = run_adding_cities(corpus, options);
    write_curve_csv(cfg.out / "cities.csv", points,
                    {not_reproducible + "one-city RMSE ~4.5; slight degradation at 3 cities; "
                                        "ten-city RMSE ~35% below one-city"});
    write_line_curve(cfg.out / "cities.svg", points, "RMSE vs cities considered", "cities");
    std::printf("cities: %zu points -> %s\n", points.size(),
                (cfg.out / "cities.csv").string().c_str());
  }
  if (all || which == "weeks") {
    auto points = run_weeks_curve(corpus, options, cfg.weeks_max);
    write_curve_csv(cfg.out / "weeks.csv", points,
                    {not_reproducible + "one week ~3.3; five weeks ~3.03; minimum at 8 weeks"});
    write_line_curve(cfg.out / "weeks.svg", points, "RMSE vs training weeks", "weeks");
    std::printf("weeks: %zu points -> %s\n", points.size(),
                (cfg.out / "weeks.csv").string().c_str());
  }
  if (all || which == "models") {
    auto points = run_model_comparison(corpus, options);
    write_curve_csv(cfg.out / "models.csv", points,
                    {not_reproducible + "ridge above 4.0 in both cases; svr ten-city ~1 below "
                                        "one-city; mlpr high in both; rfr/etr ten-city ~3.0, "
                                        "the lowest"});
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& p : points) bars.emplace_back(p.x, p.rmse_f);
    write_bar_chart(cfg.out / "models.svg", "RMSE by model (one city vs all)", "RMSE (F)", bars);
    std::printf("models: %zu points -> %s\n", points.size(),
                (cfg.out / "models.csv").string().c_str());
  }
  if (all || which == "testsize") {
    auto points = run_test_size_curve(corpus, options, cfg.test_sizes);
    write_curve_csv(cfg.out / "testsize.csv", points,
                    {not_reproducible + "at 20 examples ten-city ~50% below one-city; both "
                                        "degrade beyond 60"});
    SvgSeries one{"1 city", {}};
    SvgSeries many{std::to_string(corpus.cities.size()) + " cities", {}};
    for (const auto& p : points) {
      auto slash = p.x.find('/');
      double size = std::stod(p.x.substr(0, slash));
      if (p.x.substr(slash + 1) == "1")
        one.points.emplace_back(size, p.rmse_f);
      else
        many.points.emplace_back(size, p.rmse_f);
    }
    write_line_chart(cfg.out / "testsize.svg", "RMSE vs test size", "test examples", "RMSE (F)",
                     {one, many});
    std::printf("testsize: %zu points -> %s\n", points.size(),
                (cfg.out / "testsize.csv").string().c_str());
  }
  if (all) {
    // Residual analytics for the one-city and all-cities configurations.
    auto full = run_pipeline(corpus, 0, options);
    ensure_converged(full.model, cfg);
    auto single = run_pipeline(corpus, 1, options);
    write_report(full.report, cfg.out / "report.json");

    SvgSeries one{"1 city", {}};
    SvgSeries many{std::to_string(corpus.cities.size()) + " cities", {}};
    for (std::size_t i = 0; i < single.report.residuals.size(); ++i)
      one.points.emplace_back(static_cast<double>(i), single.report.residuals[i]);
    for (std::size_t i = 0; i < full.report.residuals.size(); ++i)
      many.points.emplace_back(static_cast<double>(i), full.report.residuals[i]);
    write_scatter_chart(cfg.out / "residuals_scatter.svg", "test residuals", "test example",
                        "residual (F)", {one, many});
    write_histogram_chart(cfg.out / "residuals_hist_one_city.svg",
                          "residual distribution, 1 city", single.report.histogram);
    write_histogram_chart(cfg.out / "residuals_hist_all_cities.svg",
                          "residual distribution, all cities", full.report.histogram);
    std::printf("report: rmse %.6f (all cities) vs %.6f (one city) -> %s\n", full.report.rmse_f,
                single.report.rmse_f, (cfg.out / "report.json").string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tempest: multi-city next-day temperature forecasting"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags remain valid after the subcommand name

  std::optional<fs::path> config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  std::optional<std::string> scaler_scope;
  app.add_option("--config", config_path, "JSON config file (see docs/config.md)");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--scaler-scope", scaler_scope, "train|union (scaler fitting rows)")
      ->check(CLI::IsMember({"train", "union"}));

  auto* fetch = app.add_subcommand("fetch", "fetch history documents into the canonical table");
  bool live = false;
  fetch->add_flag("--live", live, "use the live HTTP client instead of fixtures");

  auto* synth = app.add_subcommand("synth", "generate the synthetic corpus");
  std::optional<int> synth_days;
  std::optional<int> synth_cities;
  std::optional<double> synth_dropout;
  bool emit_fixtures = false;
  synth->add_option("--days", synth_days, "days of training history to generate");
  synth->add_option("--cities", synth_cities, "number of default cities to use");
  synth->add_option("--dropout", synth_dropout, "fraction of city-hours to drop");
  synth->add_flag("--fixtures", emit_fixtures, "also emit the fixture JSON tree");

  auto* build = app.add_subcommand("build", "join observations and attach targets");
  fs::path obs_path;
  build->add_option("--obs", obs_path, "canonical observations CSV");

  auto* train_cmd = app.add_subcommand("train", "train the configured model");
  fs::path data_path;
  std::optional<std::string> model_override;
  train_cmd->add_option("--data", data_path, "joined dataset CSV");
  train_cmd->add_option("--model", model_override, "model variant override");

  auto* predict = app.add_subcommand("predict", "predict the test window with a saved model");
  fs::path predict_data, model_path, schema_path;
  predict->add_option("--data", predict_data, "joined dataset CSV");
  predict->add_option("--model-file", model_path, "trained model artifact");
  predict->add_option("--schema", schema_path, "schema sidecar");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a predictions file");
  fs::path pred_path;
  evaluate->add_option("--pred", pred_path, "predictions CSV");

  auto* experiment = app.add_subcommand("experiment", "run the result-curve experiments");
  std::string which = "all";
  std::optional<fs::path> experiment_obs;
  experiment->add_option("which", which, "cities|weeks|models|testsize|all")
      ->check(CLI::IsMember({"cities", "weeks", "models", "testsize", "all"}));
  experiment->add_option("--obs", experiment_obs,
                         "canonical observations CSV (default: synthetic corpus)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.model.seed = *seed_override;
    }
    if (out_override) cfg.out = *out_override;
    if (scaler_scope) cfg.scaler_union = *scaler_scope == "union";
    if (synth_days) {
      cfg.synth_days = *synth_days;
      cfg.train_start = cfg.test_start.plus_days(-cfg.synth_days);
    }
    if (synth_cities) {
      cfg.cities = default_synth_cities(static_cast<std::size_t>(*synth_cities));
      cfg.target_city = cfg.cities.front().name;
    }
    if (synth_dropout) cfg.dropout_rate = *synth_dropout;
    if (model_override) cfg.model.variant = variant_from_name(*model_override);
    cfg.validate();

    if (fetch->parsed()) return cmd_fetch(cfg, live);
    if (synth->parsed()) return cmd_synth(cfg, emit_fixtures);
    if (build->parsed())
      return cmd_build(cfg, obs_path.empty() ? cfg.out / "observations.csv" : obs_path);
    if (train_cmd->parsed())
      return cmd_train(cfg, data_path.empty() ? cfg.out / "dataset.csv" : data_path);
    if (predict->parsed())
      return cmd_predict(cfg, predict_data.empty() ? cfg.out / "dataset.csv" : predict_data,
                         model_path.empty() ? cfg.out / "model.json" : model_path,
                         schema_path.empty() ? cfg.out / "schema.json" : schema_path);
    if (evaluate->parsed())
      return cmd_evaluate(cfg, pred_path.empty() ? cfg.out / "predictions.csv" : pred_path);
    if (experiment->parsed()) return cmd_experiment(cfg, which, experiment_obs);
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
