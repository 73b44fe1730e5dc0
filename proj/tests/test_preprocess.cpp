#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support/util.hpp"
#include "tempest/dataset.hpp"
#include "tempest/errors.hpp"
#include "tempest/preprocess.hpp"
#include "tempest/rng.hpp"

using namespace tempest;

namespace {

// Two-city table builder with controllable categorical values.
JoinedTable tiny_table(const std::vector<std::array<const char*, 2>>& wind_dirs) {
  JoinedTable t;
  t.city_order = {"a", "b"};
  for (std::size_t ci = 0; ci < 2; ++ci) {
    t.active_columns.push_back({ci, Feature::TempF});
    t.active_columns.push_back({ci, Feature::WindDir});
  }
  UtcHour start = UtcHour::parse("2018-07-01T00:00Z");
  for (std::size_t i = 0; i < wind_dirs.size(); ++i) {
    JoinedRow row;
    row.timestamp = start.plus_hours(static_cast<std::int64_t>(i));
    row.cities.resize(2);
    for (std::size_t ci = 0; ci < 2; ++ci) {
      row.cities[ci].temp_f = 70.0 + static_cast<double>(i) + static_cast<double>(ci);
      row.cities[ci].wind_dir = wind_dirs[i][ci];
      row.cities[ci].condition = "Clear";
    }
    row.target = 50.0 + static_cast<double>(i);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

TEST_CASE("vocabulary is the sorted distinct values per (city, feature)") {
  auto t = tiny_table({{"N", "Calm"}, {"NW", "Calm"}, {"Calm", "Calm"}});
  auto schema = build_schema(t);
  REQUIRE(schema.groups.size() == 2);
  CHECK(schema.groups[0].vocab == std::vector<std::string>{"Calm", "N", "NW"});
  CHECK(schema.groups[1].vocab == std::vector<std::string>{"Calm"});
  // 2 continuous + 3 indicators + 1 indicator
  CHECK(schema.width() == 6);
  CHECK(build_schema(t).hash() == schema.hash());
  CHECK_THROWS_AS(build_schema(JoinedTable{}), EmptyInput);
}

TEST_CASE("identical vocabularies in two cities stay independent groups") {
  auto t = tiny_table({{"N", "N"}, {"S", "S"}});
  auto schema = build_schema(t);
  REQUIRE(schema.groups.size() == 2);
  CHECK(schema.groups[0].vocab == schema.groups[1].vocab);
  CHECK(schema.groups[0].first_column != schema.groups[1].first_column);
  CHECK(schema.width() == 2 + 2 + 2);
}

TEST_CASE("one-hot encoding matches the ordered vocabulary") {
  auto t = tiny_table({{"Calm", "Calm"}, {"N", "Calm"}, {"NW", "Calm"}});
  auto schema = build_schema(t);
  auto enc = encode_rows(t, schema);
  CHECK(enc.x.rows == 3);
  CHECK(enc.x.cols == schema.width());
  // city a group columns after its temp column; vocab [Calm, N, NW]
  std::size_t g0 = schema.groups[0].first_column;
  CHECK(enc.x.at(2, g0 + 0) == 0.0);
  CHECK(enc.x.at(2, g0 + 1) == 0.0);
  CHECK(enc.x.at(2, g0 + 2) == 1.0);  // "NW" -> (0,0,1)
  CHECK(enc.x.at(0, g0 + 0) == 1.0);
  // vocabulary of size one always encodes (1)
  std::size_t g1 = schema.groups[1].first_column;
  for (std::size_t r = 0; r < 3; ++r) CHECK(enc.x.at(r, g1) == 1.0);
  CHECK(enc.unseen_categories == 0);
  CHECK(enc.y == std::vector<double>{50.0, 51.0, 52.0});
}

TEST_CASE("unseen category encodes all-zeros with a counted warning") {
  auto t = tiny_table({{"N", "Calm"}, {"NW", "Calm"}});
  auto schema = build_schema(t);
  auto probe = tiny_table({{"ESE", "Calm"}});
  auto enc = encode_rows(probe, schema);
  std::size_t g0 = schema.groups[0].first_column;
  CHECK(enc.x.at(0, g0 + 0) == 0.0);
  CHECK(enc.x.at(0, g0 + 1) == 0.0);
  CHECK(enc.unseen_categories == 1);
}

TEST_CASE("encode rejects mismatched city sets") {
  auto t = tiny_table({{"N", "Calm"}});
  auto schema = build_schema(t);
  auto other = tiny_table({{"N", "Calm"}});
  other.city_order = {"a", "zzz"};
  CHECK_THROWS_AS(encode_rows(other, schema), SchemaMismatch);
}

TEST_CASE("scaler uses population statistics") {
  // column [1,2,3]: mu=2, sigma=sqrt(2/3)
  JoinedTable t = tiny_table({{"N", "N"}, {"N", "N"}, {"N", "N"}});
  for (std::size_t i = 0; i < 3; ++i) {
    t.rows[i].cities[0].temp_f = static_cast<double>(i + 1);
    t.rows[i].cities[1].temp_f = 5.0;  // constant column
  }
  auto schema = build_schema(t);
  auto enc = encode_rows(t, schema);
  schema = fit_scaler(enc, schema);
  CHECK(schema.continuous[0].mean == doctest::Approx(2.0));
  CHECK(schema.continuous[0].stddev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));
  CHECK(schema.continuous[0].stddev == doctest::Approx(0.81650).epsilon(1e-4));
  CHECK(schema.continuous[1].mean == doctest::Approx(5.0));
  CHECK(schema.continuous[1].stddev == 1.0);
  CHECK(schema.continuous[1].constant);

  // already-centered column [-1, 1] -> mu 0 sigma 1
  JoinedTable t2 = tiny_table({{"N", "N"}, {"N", "N"}});
  t2.rows[0].cities[0].temp_f = -1.0;
  t2.rows[1].cities[0].temp_f = 1.0;
  auto s2 = build_schema(t2);
  s2 = fit_scaler(encode_rows(t2, s2), s2);
  CHECK(s2.continuous[0].mean == 0.0);
  CHECK(s2.continuous[0].stddev == 1.0);
  CHECK(!s2.continuous[0].constant);
}

TEST_CASE("apply_scaler standardizes train and transfers to test") {
  JoinedTable t = tiny_table({{"N", "N"}, {"N", "N"}, {"N", "N"}});
  for (std::size_t i = 0; i < 3; ++i)
    t.rows[i].cities[0].temp_f = static_cast<double>(i + 1);
  auto schema = build_schema(t);
  auto enc = encode_rows(t, schema);
  CHECK_THROWS_AS(apply_scaler(enc, schema), UnfittedScaler);

  schema = fit_scaler(enc, schema);
  auto scaled = apply_scaler(enc, schema);

  // train columns have mean ~0 after their own scaler
  for (const auto& c : schema.continuous) {
    double mean = 0.0;
    for (std::size_t r = 0; r < scaled.x.rows; ++r) mean += scaled.x.at(r, c.column);
    mean /= static_cast<double>(scaled.x.rows);
    CHECK(std::abs(mean) < 1e-9);
  }
  // x == mu scales to zero
  CHECK(scaled.x.at(1, schema.continuous[0].column) == 0.0);

  // test value 3 scaled with train (mu=2, sigma=0.81650) -> 1.22474
  JoinedTable probe = tiny_table({{"N", "N"}});
  probe.rows[0].cities[0].temp_f = 3.0;
  auto penc = apply_scaler(encode_rows(probe, schema), schema);
  CHECK(penc.x.at(0, schema.continuous[0].column) == doctest::Approx(1.22474).epsilon(1e-4));

  // indicators untouched; inversion recovers inputs; targets untouched
  for (std::size_t r = 0; r < scaled.x.rows; ++r) {
    for (const auto& g : schema.groups)
      for (std::size_t v = 0; v < g.vocab.size(); ++v)
        CHECK(scaled.x.at(r, g.first_column + v) == enc.x.at(r, g.first_column + v));
    for (const auto& c : schema.continuous) {
      double back = c.stddev * scaled.x.at(r, c.column) + c.mean;
      CHECK(back == doctest::Approx(enc.x.at(r, c.column)).epsilon(1e-9));
    }
  }
  CHECK(scaled.y == enc.y);
}

TEST_CASE("width equality under a union-built schema") {
  // category "SE" appears only in what will become the test slice
  auto all = tiny_table({{"N", "Calm"}, {"NW", "Calm"}, {"SE", "Calm"}, {"N", "Calm"}});
  auto schema = build_schema(all);

  JoinedTable train = all;
  train.rows = {all.rows[0], all.rows[1]};
  JoinedTable test = all;
  test.rows = {all.rows[2], all.rows[3]};

  auto etrain = encode_rows(train, schema);
  auto etest = encode_rows(test, schema);
  CHECK(etrain.x.cols == etest.x.cols);
  CHECK(etrain.unseen_categories == 0);
  CHECK(etest.unseen_categories == 0);

  // one-hot groups: entries in {0,1}, sum <= 1 per row
  for (const auto& enc : {etrain, etest}) {
    for (std::size_t r = 0; r < enc.x.rows; ++r) {
      for (const auto& g : schema.groups) {
        double sum = 0.0;
        for (std::size_t v = 0; v < g.vocab.size(); ++v) {
          double val = enc.x.at(r, g.first_column + v);
          CHECK((val == 0.0 || val == 1.0));
          sum += val;
        }
        CHECK(sum <= 1.0);
      }
    }
  }
}

TEST_CASE("schema serializes to the json sidecar and back") {
  auto t = tiny_table({{"N", "Calm"}, {"NW", "Breezy"}});
  auto schema = build_schema(t);
  schema = fit_scaler(encode_rows(t, schema), schema);

  tempest::testing::TempDir dir("schema");
  auto path = dir.path() / "schema.json";
  schema.save(path);
  auto loaded = FeatureSchema::load(path);

  CHECK(loaded.hash() == schema.hash());
  CHECK(loaded.scaler_fitted);
  CHECK(loaded.width() == schema.width());
  REQUIRE(loaded.continuous.size() == schema.continuous.size());
  for (std::size_t i = 0; i < loaded.continuous.size(); ++i) {
    CHECK(loaded.continuous[i].mean == schema.continuous[i].mean);
    CHECK(loaded.continuous[i].stddev == schema.continuous[i].stddev);
  }
  // fitted vs unfitted schema hash differ (scaler is part of the contract)
  auto unfitted = build_schema(t);
  CHECK(unfitted.hash() != schema.hash());
}
