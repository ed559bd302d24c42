#pragma once

#include "noisegate/numkit.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace noisegate {

/// Response vector plus named covariate columns, all of length n.
class Dataset {
 public:
  Dataset() = default;
  /// Validates lengths, finiteness and name uniqueness.
  Dataset(std::string name, std::string response_name, RealVector y, RealMatrix x,
          std::vector<std::string> column_names);

  const std::string& name() const { return name_; }
  const std::string& response_name() const { return response_name_; }
  const RealVector& y() const { return y_; }
  /// n x k matrix of covariates, column j named column_names()[j].
  const RealMatrix& x() const { return x_; }
  const std::vector<std::string>& column_names() const { return names_; }
  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t k() const { return names_.size(); }

  /// Throws SchemaError for an unknown name.
  std::size_t column_index(std::string_view column) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::string name_;
  std::string response_name_;
  RealVector y_;
  RealMatrix x_;
  std::vector<std::string> names_;
};

/// One categorical source column expanded into 0/1 indicator columns.
/// Each level listed gets a column; unlisted levels form the baseline.
struct FactorEncoding {
  std::string source_column;
  std::vector<std::pair<std::string, std::string>> indicators;  ///< (generated column, level)
};

/// Manifest file format (one `key = value` per line, `#` starts a comment):
///
///     name = prostate
///     source_note = free text
///     response = lpsa
///     covariates = lcavol, lweight, age
///     factor race = Race-1:2, Race-2:1
///     intercept = true
///     standardize = false
///
/// `covariates` may name raw CSV columns or columns generated by a `factor`
/// line. `intercept` and `standardize` record the analysis convention the
/// dataset ships with; both are optional.
struct DatasetManifest {
  std::string name;
  std::string source_note;
  std::string response_column;
  std::vector<std::string> covariate_columns;
  std::vector<FactorEncoding> dummy_encodings;
  std::optional<bool> intercept;
  std::optional<bool> standardize;
};

DatasetManifest parse_manifest(std::string_view text);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Comma-separated, mandatory header row, '.' decimal separator.
Dataset read_csv(std::istream& in, const DatasetManifest& manifest);
Dataset load_csv(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Writes covariates then the response, 17 significant digits, so that
/// read_csv with manifest_for(dataset) reproduces every value exactly.
void write_csv(const Dataset& dataset, std::ostream& out);
DatasetManifest manifest_for(const Dataset& dataset);

/// Copy of `dataset` with y(index) = value; index is 1-based.
Dataset perturb_response(const Dataset& dataset, std::size_t index, double value);

/// Centers each covariate and scales it to unit sample standard deviation.
Dataset standardize_columns(const Dataset& dataset);

}  // namespace noisegate
