#include "mge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mge {

void FeatureDataset::validate() const {
  if (matrix.size() != rows * cols) {
    throw ValidationError("feature matrix size does not match rows x cols");
  }
  if (labels.size() != rows || entity_ids.size() != rows) {
    throw ValidationError("labels/entity_ids size does not match row count");
  }
  for (float x : matrix) {
    if (!std::isfinite(x)) throw ValidationError("dataset contains non-finite features");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }
}

FeatureDataset FeatureDataset::select_rows(std::span<const size_t> indices) const {
  FeatureDataset out;
  out.rows = indices.size();
  out.cols = cols;
  out.feature_origin = feature_origin;
  out.matrix.reserve(out.rows * cols);
  out.labels.reserve(out.rows);
  out.entity_ids.reserve(out.rows);
  for (size_t r : indices) {
    const auto src = row(r);
    out.matrix.insert(out.matrix.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
    out.entity_ids.push_back(entity_ids[r]);
  }
  return out;
}

FeatureDataset FeatureDataset::select_cols(std::span<const int> columns) const {
  FeatureDataset out;
  out.rows = rows;
  out.cols = columns.size();
  out.labels = labels;
  out.entity_ids = entity_ids;
  if (!feature_origin.empty()) {
    for (int c : columns) out.feature_origin.push_back(feature_origin[c]);
  }
  out.matrix.resize(rows * columns.size());
  for (size_t r = 0; r < rows; ++r) {
    const auto src = row(r);
    for (size_t j = 0; j < columns.size(); ++j) {
      out.matrix[r * columns.size() + j] = src[columns[j]];
    }
  }
  return out;
}

void save_dataset(const FeatureDataset& ds, std::ostream& out) {
  out << ds.rows << ' ' << ds.cols << '\n';
  if (!ds.feature_origin.empty()) {
    out << "# origin:";
    for (const auto& tag : ds.feature_origin) out << ' ' << tag;
    out << '\n';
  }
  for (size_t r = 0; r < ds.rows; ++r) {
    out << ds.entity_ids[r] << ' ' << ds.labels[r];
    for (float x : ds.row(r)) out << ' ' << format_float(x);
    out << '\n';
  }
}

FeatureDataset load_dataset(std::istream& in) {
  FeatureDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset file is empty (expected 'N F' header)");
  {
    std::istringstream hs(line);
    if (!(hs >> ds.rows >> ds.cols)) {
      throw ParseError("dataset header must be 'N F', got '" + line + "'");
    }
  }
  ds.matrix.reserve(ds.rows * ds.cols);
  size_t seen = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string prefix = "# origin:";
      if (line.rfind(prefix, 0) == 0) {
        std::istringstream os(line.substr(prefix.size()));
        std::string tag;
        while (os >> tag) ds.feature_origin.push_back(tag);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string id;
    int label;
    if (!(ls >> id >> label)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'entity_id label f1 ... fF'");
    }
    ds.entity_ids.push_back(id);
    ds.labels.push_back(label);
    for (size_t c = 0; c < ds.cols; ++c) {
      std::string tok;
      if (!(ls >> tok)) {
        throw ParseError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(ds.cols) + " feature values");
      }
      ds.matrix.push_back(std::strtof(tok.c_str(), nullptr));
    }
    ++seen;
  }
  if (seen != ds.rows) {
    throw ParseError("dataset declared " + std::to_string(ds.rows) +
                     " rows but contains " + std::to_string(seen));
  }
  ds.validate();
  return ds;
}

void save_dataset_file(const FeatureDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file '" + path + "'");
  save_dataset(ds, out);
}

FeatureDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open dataset file '" + path +
                          "' (expected 'N F' header then rows)");
  }
  return load_dataset(in);
}

void Standardizer::fit(const FeatureDataset& ds) {
  std::vector<size_t> all(ds.rows);
  for (size_t r = 0; r < ds.rows; ++r) all[r] = r;
  fit_rows(ds, all);
}

void Standardizer::fit_rows(const FeatureDataset& ds,
                            std::span<const size_t> rows) {
  if (rows.empty()) throw ValidationError("cannot standardize an empty dataset");
  mean.assign(ds.cols, 0.0);
  inv_std.assign(ds.cols, 0.0);
  for (size_t r : rows) {
    const auto x = ds.row(r);
    for (size_t c = 0; c < ds.cols; ++c) mean[c] += x[c];
  }
  for (auto& m : mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(ds.cols, 0.0);
  for (size_t r : rows) {
    const auto x = ds.row(r);
    for (size_t c = 0; c < ds.cols; ++c) {
      const double d = x[c] - mean[c];
      var[c] += d * d;
    }
  }
  for (size_t c = 0; c < ds.cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(rows.size()));
    inv_std[c] = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
}

std::vector<double> Standardizer::transform(std::span<const float> x) const {
  std::vector<double> out(x.size());
  for (size_t c = 0; c < x.size(); ++c) {
    out[c] = (x[c] - mean[c]) * inv_std[c];
  }
  return out;
}

void Standardizer::save(std::ostream& out) const {
  out << "scaler " << mean.size() << '\n';
  for (size_t c = 0; c < mean.size(); ++c) {
    out << format_double(mean[c]) << ' ' << format_double(inv_std[c]) << '\n';
  }
}

Standardizer Standardizer::load(std::istream& in) {
  Standardizer s;
  std::string tag;
  size_t n;
  if (!(in >> tag >> n) || tag != "scaler") {
    throw ParseError("expected 'scaler N' header");
  }
  s.mean.resize(n);
  s.inv_std.resize(n);
  for (size_t c = 0; c < n; ++c) {
    if (!(in >> s.mean[c] >> s.inv_std[c])) {
      throw ParseError("scaler block truncated");
    }
  }
  return s;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  uint64_t seed) {
  if (folds < 2) throw DomainError("need at least 2 folds");
  if (labels.size() < static_cast<size_t>(folds)) {
    throw ValidationError("fewer rows than folds");
  }
  std::vector<int> assignment(labels.size(), 0);
  Rng rng(seed);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<size_t> members;
    for (size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == cls) members.push_back(r);
    }
    rng.shuffle(members);
    for (size_t i = 0; i < members.size(); ++i) {
      assignment[members[i]] = static_cast<int>(i % folds);
    }
  }
  return assignment;
}

}  // namespace mge
