#include "noisegate/dataset.hpp"

#include "noisegate/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace noisegate {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool parse_flag(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "off" || value == "no" || value == "0") return false;
  throw SchemaError("manifest key '" + std::string(key) + "' expects a boolean, got '" +
                    std::string(value) + "'");
}

bool level_matches(std::string_view cell, std::string_view level) {
  if (cell == level) return true;
  const auto a = parse_double(cell);
  const auto b = parse_double(level);
  return a && b && *a == *b;
}

}  // namespace

Dataset::Dataset(std::string name, std::string response_name, RealVector y, RealMatrix x,
                 std::vector<std::string> column_names)
    : name_(std::move(name)),
      response_name_(std::move(response_name)),
      y_(std::move(y)),
      x_(std::move(x)),
      names_(std::move(column_names)) {
  if (x_.cols() == 0) x_.resize(y_.size(), 0);
  if (x_.rows() != y_.size()) throw DimensionError("covariate columns must have the response's length");
  if (static_cast<std::size_t>(x_.cols()) != names_.size())
    throw DimensionError("number of column names does not match number of columns");
  require_finite(y_, "response");
  require_finite(x_, "covariates");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw SchemaError("duplicate column name '" + n + "'");
  }
}

std::size_t Dataset::column_index(std::string_view column) const {
  const auto it = std::find(names_.begin(), names_.end(), column);
  if (it == names_.end()) throw SchemaError("no covariate named '" + std::string(column) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.name_ == b.name_ && a.response_name_ == b.response_name_ && a.names_ == b.names_ &&
         a.y_.size() == b.y_.size() && a.x_.rows() == b.x_.rows() && a.x_.cols() == b.x_.cols() &&
         a.y_ == b.y_ && a.x_ == b.x_;
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SchemaError("manifest line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "name") {
      m.name = value;
    } else if (key == "source_note") {
      m.source_note = value;
    } else if (key == "response") {
      m.response_column = value;
    } else if (key == "covariates") {
      m.covariate_columns.clear();
      if (!value.empty()) m.covariate_columns = split(value, ',');
    } else if (key.starts_with("factor ")) {
      FactorEncoding f;
      f.source_column = trim(key.substr(7));
      for (const auto& item : split(value, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos)
          throw SchemaError("manifest line " + std::to_string(line_no) + ": factor entries are 'column:level'");
        f.indicators.emplace_back(std::string(trim(std::string_view(item).substr(0, colon))),
                                  std::string(trim(std::string_view(item).substr(colon + 1))));
      }
      m.dummy_encodings.push_back(std::move(f));
    } else if (key == "intercept") {
      m.intercept = parse_flag(key, value);
    } else if (key == "standardize") {
      m.standardize = parse_flag(key, value);
    } else {
      throw SchemaError("manifest line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (m.response_column.empty()) throw SchemaError("manifest does not name a response column");
  if (std::find(m.covariate_columns.begin(), m.covariate_columns.end(), m.response_column) !=
      m.covariate_columns.end())
    throw SchemaError("response column '" + m.response_column + "' is also listed as a covariate");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

Dataset read_csv(std::istream& in, const DatasetManifest& manifest) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV is empty; a header row is required");
  const auto header = split(line, ',');
  std::map<std::string, std::size_t, std::less<>> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(header[i], i);

  auto source_index = [&](const std::string& col) {
    const auto it = position.find(col);
    if (it == position.end()) throw SchemaError("CSV has no column '" + col + "'");
    return it->second;
  };

  // Each covariate is either a raw numeric column or an indicator of a factor level.
  struct Source {
    std::size_t csv_column;
    std::optional<std::string> level;
  };
  std::map<std::string, Source> generated;
  for (const auto& f : manifest.dummy_encodings) {
    const std::size_t src = source_index(f.source_column);
    for (const auto& [col, level] : f.indicators) generated[col] = Source{src, level};
  }
  std::vector<Source> sources;
  for (const auto& col : manifest.covariate_columns) {
    if (const auto it = generated.find(col); it != generated.end()) {
      sources.push_back(it->second);
    } else {
      sources.push_back(Source{source_index(col), std::nullopt});
    }
  }
  const std::size_t response_at = source_index(manifest.response_column);

  std::vector<double> y;
  std::vector<double> values;  // row-major n x k
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    auto number = [&](std::size_t col) {
      const auto v = parse_double(cells[col]);
      if (!v)
        throw ParseError("line " + std::to_string(row) + ", column '" + header[col] + "': cannot parse '" +
                         cells[col] + "' as a number");
      return *v;
    };
    y.push_back(number(response_at));
    for (const auto& s : sources) {
      values.push_back(s.level ? (level_matches(cells[s.csv_column], *s.level) ? 1.0 : 0.0)
                               : number(s.csv_column));
    }
  }

  const auto n = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(sources.size());
  if (n == 0) throw SchemaError("CSV has a header but no data rows");
  RealMatrix x(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = values[static_cast<std::size_t>(i * k + j)];
  return Dataset(manifest.name, manifest.response_column, Eigen::Map<RealVector>(y.data(), n), std::move(x),
                 manifest.covariate_columns);
}

Dataset load_csv(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open data file " + path.string());
  return read_csv(in, manifest);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& name : dataset.column_names()) out << name << ',';
  out << dataset.response_name() << '\n';
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < dataset.x().cols(); ++j) out << dataset.x()(r, j) << ',';
    out << dataset.y()(r) << '\n';
  }
  out.precision(old_precision);
}

DatasetManifest manifest_for(const Dataset& dataset) {
  DatasetManifest m;
  m.name = dataset.name();
  m.response_column = dataset.response_name();
  m.covariate_columns = dataset.column_names();
  return m;
}

Dataset perturb_response(const Dataset& dataset, std::size_t index, double value) {
  if (index < 1 || index > dataset.n())
    throw IndexError("response index " + std::to_string(index) + " outside 1.." + std::to_string(dataset.n()));
  if (!std::isfinite(value)) throw InvalidInputError("perturbed response value must be finite");
  RealVector y = dataset.y();
  y(static_cast<Eigen::Index>(index - 1)) = value;
  return Dataset(dataset.name(), dataset.response_name(), std::move(y), dataset.x(), dataset.column_names());
}

Dataset standardize_columns(const Dataset& dataset) {
  RealMatrix x = dataset.x();
  const auto n = static_cast<double>(dataset.n());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const double sd = n > 1 ? std::sqrt(x.col(j).squaredNorm() / (n - 1.0)) : 0.0;
    if (!(sd > 0.0))
      throw DegenerateColumnError("column '" + dataset.column_names()[static_cast<std::size_t>(j)] +
                                  "' is constant and cannot be standardized");
    x.col(j) /= sd;
  }
  return Dataset(dataset.name(), dataset.response_name(), dataset.y(), std::move(x), dataset.column_names());
}

}  // namespace noisegate
