#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tempest/errors.hpp"

namespace tempest::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + key + "' in " + context);
  }
}

CivilDate date_field(const json& obj, const char* key, CivilDate fallback) {
  if (!obj.contains(key)) return fallback;
  return CivilDate::parse(obj.at(key).get<std::string>());
}

template <typename T>
T plain_field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::load(const std::optional<std::filesystem::path>& config_path) {
  RunConfig cfg;
  cfg.cities = default_synth_cities();
  cfg.target_city = cfg.cities.front().name;
  cfg.model.variant = ModelVariant::Rfr;

  if (!config_path) {
    cfg.model.seed = cfg.seed;
    return cfg;
  }

  std::ifstream in(*config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + config_path->string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }

  check_keys(doc,
             {"seed", "out", "cities", "target_city", "train_start", "train_end", "test_start",
              "test_end", "horizon_hours", "scaler_scope", "fixture_dir", "live", "model",
              "svr_nonconvergence_fatal", "synth", "experiment"},
             "top level");

  cfg.seed = plain_field<std::uint64_t>(doc, "seed", cfg.seed);
  cfg.out = plain_field<std::string>(doc, "out", cfg.out.string());

  if (doc.contains("cities")) {
    cfg.cities.clear();
    for (const json& c : doc.at("cities")) {
      check_keys(c, {"name", "lat", "lon"}, "cities[]");
      cfg.cities.push_back(CityId{c.at("name").get<std::string>(), c.at("lat").get<double>(),
                                  c.at("lon").get<double>()});
    }
    if (cfg.cities.empty()) throw ConfigError("cities list must be nonempty");
    cfg.target_city = cfg.cities.front().name;
  }
  cfg.target_city = plain_field<std::string>(doc, "target_city", cfg.target_city);

  cfg.train_start = date_field(doc, "train_start", cfg.train_start);
  cfg.train_end = date_field(doc, "train_end", cfg.train_end);
  cfg.test_start = date_field(doc, "test_start", cfg.test_start);
  cfg.test_end = date_field(doc, "test_end", cfg.test_end);
  cfg.horizon_hours = plain_field<int>(doc, "horizon_hours", cfg.horizon_hours);

  std::string scope = plain_field<std::string>(doc, "scaler_scope", "train");
  if (scope != "train" && scope != "union")
    throw ConfigError("scaler_scope must be 'train' or 'union'");
  cfg.scaler_union = scope == "union";

  cfg.fixture_dir = plain_field<std::string>(doc, "fixture_dir", cfg.fixture_dir.string());

  if (doc.contains("live")) {
    const json& live = doc.at("live");
    check_keys(live,
               {"base_url", "path_template", "retries", "retry_delay_ms", "parallelism",
                "min_interval_ms"},
               "live");
    cfg.live.base_url = plain_field<std::string>(live, "base_url", "");
    cfg.live.path_template =
        plain_field<std::string>(live, "path_template", cfg.live.path_template);
    cfg.live.max_retries = plain_field<int>(live, "retries", cfg.live.max_retries);
    cfg.live.retry_delay_ms = plain_field<int>(live, "retry_delay_ms", cfg.live.retry_delay_ms);
    cfg.fetch_parallelism = plain_field<int>(live, "parallelism", cfg.fetch_parallelism);
    cfg.fetch_min_interval_ms =
        plain_field<int>(live, "min_interval_ms", cfg.fetch_min_interval_ms);
  }

  if (doc.contains("model")) {
    const json& model = doc.at("model");
    check_keys(model, {"variant", "seed", "params"}, "model");
    cfg.model.variant =
        variant_from_name(plain_field<std::string>(model, "variant", "rfr"));
    if (model.contains("params")) {
      for (const auto& [key, value] : model.at("params").items()) {
        if (!value.is_number())
          throw ConfigError("model.params." + key + " must be numeric");
        cfg.model.params[key] = value.get<double>();
      }
    }
    if (model.contains("seed")) cfg.model.seed = model.at("seed").get<std::uint64_t>();
  }

  cfg.svr_nonconvergence_fatal =
      plain_field<bool>(doc, "svr_nonconvergence_fatal", cfg.svr_nonconvergence_fatal);

  if (doc.contains("synth")) {
    const json& synth = doc.at("synth");
    check_keys(synth,
               {"days", "base_temp_f", "diurnal_amplitude_f", "seasonal_drift_f_per_day",
                "advection_speed_mph", "front_rate_per_day", "front_magnitude_f",
                "front_width_hours", "noise_sigma_f", "dropout_rate"},
               "synth");
    cfg.synth_days = plain_field<int>(synth, "days", cfg.synth_days);
    cfg.base_temp_f = plain_field<double>(synth, "base_temp_f", cfg.base_temp_f);
    cfg.diurnal_amplitude_f =
        plain_field<double>(synth, "diurnal_amplitude_f", cfg.diurnal_amplitude_f);
    cfg.seasonal_drift_f_per_day =
        plain_field<double>(synth, "seasonal_drift_f_per_day", cfg.seasonal_drift_f_per_day);
    cfg.advection_speed_mph =
        plain_field<double>(synth, "advection_speed_mph", cfg.advection_speed_mph);
    cfg.front_rate_per_day =
        plain_field<double>(synth, "front_rate_per_day", cfg.front_rate_per_day);
    cfg.front_magnitude_f =
        plain_field<double>(synth, "front_magnitude_f", cfg.front_magnitude_f);
    cfg.front_width_hours =
        plain_field<double>(synth, "front_width_hours", cfg.front_width_hours);
    cfg.noise_sigma_f = plain_field<double>(synth, "noise_sigma_f", cfg.noise_sigma_f);
    cfg.dropout_rate = plain_field<double>(synth, "dropout_rate", cfg.dropout_rate);
  }

  if (doc.contains("experiment")) {
    const json& exp = doc.at("experiment");
    check_keys(exp, {"weeks_max", "test_sizes"}, "experiment");
    cfg.weeks_max = plain_field<int>(exp, "weeks_max", cfg.weeks_max);
    if (exp.contains("test_sizes"))
      cfg.test_sizes = exp.at("test_sizes").get<std::vector<std::size_t>>();
  }

  if (!doc.contains("model") || !doc.at("model").contains("seed")) cfg.model.seed = cfg.seed;
  return cfg;
}

void RunConfig::validate() const {
  if (cities.empty()) throw ConfigError("no cities configured");
  for (const CityId& c : cities) c.validate();
  if (cities.front().name != target_city)
    throw ConfigError("target city '" + target_city + "' must be first in the city list");
  if (train_start >= train_end) throw ConfigError("train range is empty or inverted");
  if (test_start >= test_end) throw ConfigError("test range is empty or inverted");
  if (train_range().overlaps(test_range()))
    throw ConfigError("train and test ranges overlap");
  if (horizon_hours <= 0) throw ConfigError("horizon_hours must be positive");
  if (weeks_max < 1) throw ConfigError("experiment.weeks_max must be >= 1");
  if (synth_days < 1) throw ConfigError("synth.days must be >= 1");
}

std::string RunConfig::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["out"] = out.string();
  json cities_json = json::array();
  for (const CityId& c : cities) {
    json e;
    e["name"] = c.name;
    e["lat"] = c.latitude;
    e["lon"] = c.longitude;
    cities_json.push_back(std::move(e));
  }
  doc["cities"] = std::move(cities_json);
  doc["target_city"] = target_city;
  doc["train_start"] = train_start.to_string();
  doc["train_end"] = train_end.to_string();
  doc["test_start"] = test_start.to_string();
  doc["test_end"] = test_end.to_string();
  doc["horizon_hours"] = horizon_hours;
  doc["scaler_scope"] = scaler_union ? "union" : "train";
  doc["fixture_dir"] = fixture_dir.string();
  doc["live"] = {{"base_url", live.base_url},
                 {"path_template", live.path_template},
                 {"retries", live.max_retries},
                 {"retry_delay_ms", live.retry_delay_ms},
                 {"parallelism", fetch_parallelism},
                 {"min_interval_ms", fetch_min_interval_ms}};
  doc["model"] = {{"variant", std::string(variant_name(model.variant))},
                  {"seed", model.seed},
                  {"params", model.params}};
  doc["svr_nonconvergence_fatal"] = svr_nonconvergence_fatal;
  doc["synth"] = {{"days", synth_days},
                  {"base_temp_f", base_temp_f},
                  {"diurnal_amplitude_f", diurnal_amplitude_f},
                  {"seasonal_drift_f_per_day", seasonal_drift_f_per_day},
                  {"advection_speed_mph", advection_speed_mph},
                  {"front_rate_per_day", front_rate_per_day},
                  {"front_magnitude_f", front_magnitude_f},
                  {"front_width_hours", front_width_hours},
                  {"noise_sigma_f", noise_sigma_f},
                  {"dropout_rate", dropout_rate}};
  doc["experiment"] = {{"weeks_max", weeks_max}, {"test_sizes", test_sizes}};
  return doc.dump(2);
}

void RunConfig::echo(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "config.echo.json", std::ios::binary);
  if (!out) throw IoError("cannot write config echo in " + out_dir.string());
  out << to_json() << '\n';
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig synth;
  synth.cities = cities;
  synth.seed = seed;
  // Training days end where the test window starts; the span covers the
  // test week plus the final horizon day.
  synth.start = test_start.plus_days(-synth_days);
  synth.days =
      synth_days + static_cast<int>(test_range().days()) + (horizon_hours + 23) / 24;
  synth.base_temp_f = base_temp_f;
  synth.diurnal_amplitude_f = diurnal_amplitude_f;
  synth.seasonal_drift_f_per_day = seasonal_drift_f_per_day;
  synth.advection_speed_mph = advection_speed_mph;
  synth.front_rate_per_day = front_rate_per_day;
  synth.front_magnitude_f = front_magnitude_f;
  synth.front_width_hours = front_width_hours;
  synth.noise_sigma_f = noise_sigma_f;
  synth.dropout_rate = dropout_rate;
  return synth;
}

std::filesystem::path RunConfig::resolved_fixture_dir() const {
  const char* env = std::getenv("TEMPEST_FIXTURE_DIR");
  if (env && *env) return env;
  return fixture_dir;
}

}  // namespace tempest::cli
