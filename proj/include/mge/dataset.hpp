#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mge/common.hpp"

namespace mge {

// Row-major feature matrix with binary labels and per-row entity ids.
// feature_origin tags each column with the embedding source it came from.
struct FeatureDataset {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<float> matrix;  // rows x cols
  std::vector<int> labels;    // 0/1
  std::vector<std::string> entity_ids;
  std::vector<std::string> feature_origin;  // size cols (may be empty)

  std::span<const float> row(size_t r) const {
    return {matrix.data() + r * cols, cols};
  }
  float* row_ptr(size_t r) { return matrix.data() + r * cols; }

  void validate() const;

  // Copies the given rows (and all columns) into a new dataset.
  FeatureDataset select_rows(std::span<const size_t> indices) const;
  // Copies the given columns (and all rows) into a new dataset.
  FeatureDataset select_cols(std::span<const int> columns) const;
};

// Text format: "N F" header, optional "# origin: ..." comment, then one
// "entity_id label f1 ... fF" line per row.
void save_dataset(const FeatureDataset& ds, std::ostream& out);
FeatureDataset load_dataset(std::istream& in);
void save_dataset_file(const FeatureDataset& ds, const std::string& path);
FeatureDataset load_dataset_file(const std::string& path);

// Per-column zero-mean unit-variance scaling. Constant columns map to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  void fit(const FeatureDataset& ds);
  void fit_rows(const FeatureDataset& ds, std::span<const size_t> rows);
  std::vector<double> transform(std::span<const float> x) const;

  void save(std::ostream& out) const;
  static Standardizer load(std::istream& in);
};

// Assigns each row to one of `folds` folds so that every fold's class counts
// are within one of an exact proportional share. Returns fold index per row.
std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  uint64_t seed);

}  // namespace mge
