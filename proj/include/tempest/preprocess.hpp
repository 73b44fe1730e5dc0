#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tempest/dataset.hpp"
#include "tempest/matrix.hpp"

namespace tempest {

enum class ColumnKind { Continuous, Indicator };

// Column layout, one-hot vocabularies and scaler statistics: the contract
// between preprocessing and the models. Built from the union of train and
// test rows so both encode to the same width; scaler statistics are fitted
// separately (train split only by default).
class FeatureSchema {
 public:
  struct Continuous {
    ColumnRef source;
    std::string name;
    std::size_t column = 0;  // offset in the encoded matrix
    double mean = 0.0;
    double stddev = 1.0;     // sigma=0 is stored as 1 with constant=true
    bool constant = false;
  };
  struct CategoricalGroup {
    ColumnRef source;
    std::string name;                 // <city>_<feature>
    std::vector<std::string> vocab;   // sorted distinct category strings
    std::size_t first_column = 0;     // offset of the group's first indicator
  };

  std::vector<std::string> city_order;
  std::vector<Continuous> continuous;
  std::vector<CategoricalGroup> groups;
  bool scaler_fitted = false;

  std::size_t width() const;
  // Flattened (name, kind) in encoding order: continuous columns first per
  // the source column order they appear in, indicator groups after their
  // source position. Layout is city-major like the joined table.
  std::vector<std::pair<std::string, ColumnKind>> columns() const;

  // FNV-1a over the canonical serialization, scaler included once fitted.
  std::uint64_t hash() const;

  std::string to_json() const;
  static FeatureSchema from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static FeatureSchema load(const std::filesystem::path& path);
};

struct EncodedDataset {
  Matrix x;
  std::vector<double> y;           // targets, degrees F, never scaled
  std::uint64_t schema_hash = 0;
  std::size_t unseen_categories = 0;  // values missing from the vocabulary
};

// Vocabularies from ALL rows (the union of what will become train and test).
// Scaler left unfitted. Throws EmptyInput.
FeatureSchema build_schema(const JoinedTable& all_rows);

// One row per joined row: continuous features copied through, categoricals
// one-hot against the schema vocabulary (unseen value -> all zeros, counted).
EncodedDataset encode_rows(const JoinedTable& table, const FeatureSchema& schema);

// Population mean / stddev per continuous column over the given rows.
FeatureSchema fit_scaler(const EncodedDataset& train, FeatureSchema schema);

// (x - mu) / sigma on continuous columns; indicators and targets untouched.
EncodedDataset apply_scaler(EncodedDataset data, const FeatureSchema& schema);

}  // namespace tempest
