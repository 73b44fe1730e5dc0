#include "tempest/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tempest/errors.hpp"
#include "tempest/hash.hpp"
#include "tempest/kernels.hpp"

namespace tempest {

namespace {

using nlohmann::json;

Feature feature_from_name(const std::string& name) {
  for (Feature f : kAllFeatures) {
    if (feature_name(f) == name) return f;
  }
  throw SchemaError("unknown feature '" + name + "' in schema");
}

}  // namespace

std::size_t FeatureSchema::width() const {
  std::size_t w = continuous.size();
  for (const auto& g : groups) w += g.vocab.size();
  return w;
}

std::vector<std::pair<std::string, ColumnKind>> FeatureSchema::columns() const {
  std::vector<std::pair<std::string, ColumnKind>> cols(width());
  for (const auto& c : continuous) cols[c.column] = {c.name, ColumnKind::Continuous};
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.vocab.size(); ++i)
      cols[g.first_column + i] = {g.name + "=" + g.vocab[i], ColumnKind::Indicator};
  }
  return cols;
}

std::uint64_t FeatureSchema::hash() const { return fnv1a64(to_json()); }

std::string FeatureSchema::to_json() const {
  json cols = json::array();
  std::size_t ci = 0, gi = 0;
  // Emit in encoding order.
  while (ci < continuous.size() || gi < groups.size()) {
    bool take_continuous =
        gi >= groups.size() ||
        (ci < continuous.size() && continuous[ci].column < groups[gi].first_column);
    if (take_continuous) {
      const Continuous& c = continuous[ci++];
      json e;
      e["kind"] = "continuous";
      e["city"] = city_order[c.source.city_index];
      e["feature"] = std::string(feature_name(c.source.feature));
      e["mean"] = c.mean;
      e["stddev"] = c.stddev;
      e["constant"] = c.constant;
      cols.push_back(std::move(e));
    } else {
      const CategoricalGroup& g = groups[gi++];
      json e;
      e["kind"] = "categorical";
      e["city"] = city_order[g.source.city_index];
      e["feature"] = std::string(feature_name(g.source.feature));
      e["vocab"] = g.vocab;
      cols.push_back(std::move(e));
    }
  }
  json doc;
  doc["format"] = "tempest-schema/1";
  doc["city_order"] = city_order;
  doc["scaler_fitted"] = scaler_fitted;
  doc["columns"] = std::move(cols);
  return doc.dump(2);
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "tempest-schema/1")
    throw SchemaError("unrecognized schema format");

  FeatureSchema s;
  s.city_order = doc.at("city_order").get<std::vector<std::string>>();
  s.scaler_fitted = doc.at("scaler_fitted").get<bool>();

  std::size_t offset = 0;
  for (const json& e : doc.at("columns")) {
    const std::string city = e.at("city").get<std::string>();
    auto it = std::find(s.city_order.begin(), s.city_order.end(), city);
    if (it == s.city_order.end()) throw SchemaError("schema column for unknown city " + city);
    ColumnRef source{static_cast<std::size_t>(it - s.city_order.begin()),
                     feature_from_name(e.at("feature").get<std::string>())};
    std::string name = city + "_" + std::string(feature_name(source.feature));
    if (e.at("kind") == "continuous") {
      Continuous c;
      c.source = source;
      c.name = std::move(name);
      c.column = offset++;
      c.mean = e.at("mean").get<double>();
      c.stddev = e.at("stddev").get<double>();
      c.constant = e.at("constant").get<bool>();
      s.continuous.push_back(std::move(c));
    } else {
      CategoricalGroup g;
      g.source = source;
      g.name = std::move(name);
      g.vocab = e.at("vocab").get<std::vector<std::string>>();
      g.first_column = offset;
      offset += g.vocab.size();
      s.groups.push_back(std::move(g));
    }
  }
  return s;
}

void FeatureSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

FeatureSchema build_schema(const JoinedTable& all_rows) {
  if (all_rows.rows.empty()) throw EmptyInput("build_schema requires at least one row");

  FeatureSchema s;
  s.city_order = all_rows.city_order;
  std::size_t offset = 0;
  for (const ColumnRef& c : all_rows.active_columns) {
    std::string name = all_rows.column_name(c);
    if (is_numeric(c.feature)) {
      FeatureSchema::Continuous col;
      col.source = c;
      col.name = std::move(name);
      col.column = offset++;
      s.continuous.push_back(std::move(col));
    } else {
      std::set<std::string> distinct;
      for (const JoinedRow& row : all_rows.rows)
        distinct.insert(std::string(row.cities[c.city_index].categorical(c.feature)));
      FeatureSchema::CategoricalGroup g;
      g.source = c;
      g.name = std::move(name);
      g.vocab.assign(distinct.begin(), distinct.end());
      g.first_column = offset;
      offset += g.vocab.size();
      s.groups.push_back(std::move(g));
    }
  }
  return s;
}

EncodedDataset encode_rows(const JoinedTable& table, const FeatureSchema& schema) {
  if (table.city_order != schema.city_order)
    throw SchemaMismatch("joined table cities do not match the schema");
  for (const auto& c : schema.continuous) {
    if (!table.column_active(c.source.city_index, c.source.feature))
      throw SchemaMismatch("schema column " + c.name + " is not active in the joined table");
  }
  for (const auto& g : schema.groups) {
    if (!table.column_active(g.source.city_index, g.source.feature))
      throw SchemaMismatch("schema column " + g.name + " is not active in the joined table");
  }

  EncodedDataset out;
  out.x = Matrix(table.rows.size(), schema.width());
  out.y.resize(table.rows.size(), 0.0);
  out.schema_hash = schema.hash();

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const JoinedRow& row = table.rows[i];
    if (row.cities.size() != schema.city_order.size())
      throw SchemaMismatch("row city count does not match the schema");
    double* x = out.x.row(i);
    for (const auto& c : schema.continuous) {
      auto v = row.cities[c.source.city_index].numeric(c.source.feature);
      if (!v)
        throw DataError("row " + std::to_string(i) + " is missing numeric column " + c.name);
      x[c.column] = *v;
    }
    for (const auto& g : schema.groups) {
      std::string_view value = row.cities[g.source.city_index].categorical(g.source.feature);
      auto it = std::lower_bound(g.vocab.begin(), g.vocab.end(), value);
      if (it != g.vocab.end() && *it == value)
        x[g.first_column + static_cast<std::size_t>(it - g.vocab.begin())] = 1.0;
      else
        ++out.unseen_categories;
    }
    if (!row.target)
      throw DataError("row " + std::to_string(i) + " has no target attached");
    out.y[i] = *row.target;
  }
  return out;
}

FeatureSchema fit_scaler(const EncodedDataset& train, FeatureSchema schema) {
  if (train.x.rows == 0) throw EmptyInput("fit_scaler requires a nonempty training set");
  if (train.x.cols != schema.width())
    throw SchemaMismatch("encoded width does not match the schema");

  const std::size_t n = train.x.rows;
  std::vector<double> column(n);
  for (auto& c : schema.continuous) {
    for (std::size_t i = 0; i < n; ++i) column[i] = train.x.at(i, c.column);
    double mean = kernels::sum(column.data(), n) / static_cast<double>(n);
    double variance = kernels::sum_squared_diff(column.data(), n, mean) / static_cast<double>(n);
    double sigma = std::sqrt(variance);
    c.mean = mean;
    c.constant = sigma == 0.0;
    c.stddev = c.constant ? 1.0 : sigma;
  }
  schema.scaler_fitted = true;
  return schema;
}

EncodedDataset apply_scaler(EncodedDataset data, const FeatureSchema& schema) {
  if (!schema.scaler_fitted) throw UnfittedScaler("apply_scaler called before fit_scaler");
  if (data.x.cols != schema.width())
    throw SchemaMismatch("encoded width does not match the schema");
  for (std::size_t i = 0; i < data.x.rows; ++i) {
    double* x = data.x.row(i);
    for (const auto& c : schema.continuous) x[c.column] = (x[c.column] - c.mean) / c.stddev;
  }
  data.schema_hash = schema.hash();
  return data;
}

}  // namespace tempest
