#include "kflann/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

namespace kflann {

Dataset::Dataset(std::string name, std::size_t dims, std::vector<double> values,
                 std::vector<int> labels)
    : name_(std::move(name)), dims_(dims), values_(std::move(values)), labels_(std::move(labels)) {
  if (dims_ == 0) throw DataError("dataset must have at least one feature");
  if (values_.size() % dims_ != 0)
    throw DataError("value count is not a multiple of the dimensionality");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw DataError("non-finite value in pattern " + std::to_string(k / dims_) + ", feature " +
                      std::to_string(k % dims_));
  }
  if (!labels_.empty() && labels_.size() != size())
    throw DataError("label count " + std::to_string(labels_.size()) +
                    " does not match pattern count " + std::to_string(size()));
}

Dataset Dataset::permuted(std::span<const std::size_t> order) const {
  std::vector<double> values;
  values.reserve(values_.size());
  std::vector<int> labels;
  for (auto i : order) {
    auto p = pattern(i);
    values.insert(values.end(), p.begin(), p.end());
    if (has_labels()) labels.push_back(labels_[i]);
  }
  return Dataset(name_, dims_, std::move(values), std::move(labels));
}

FeatureBounds feature_bounds(const Dataset& dataset) {
  if (dataset.empty()) throw DataError("feature bounds of an empty dataset");
  const auto n = dataset.size();
  const auto d = dataset.dims();
  FeatureBounds bounds;
  bounds.mindist.resize(d);
  bounds.maxdist.resize(d);
  std::vector<double> column(n);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t i = 0; i < n; ++i) column[i] = dataset.pattern(i)[f];
    std::sort(column.begin(), column.end());
    bounds.maxdist[f] = column.back() - column.front();
    double gap = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      double g = column[i] - column[i - 1];
      if (g > 0.0 && (gap == 0.0 || g < gap)) gap = g;
    }
    bounds.mindist[f] = gap;
  }
  return bounds;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

bool parse_int(std::string_view cell, int& out) {
  if (cell.empty()) return false;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

Dataset parse_csv(std::istream& in, bool has_labels, std::string name) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    lines.push_back(line);
    line_numbers.push_back(line_no);
  }
  if (lines.empty()) throw DataError(name + ": empty file");
  for (const auto& l : lines) rows.push_back(split(l));

  const std::size_t columns = rows.front().size();
  if (has_labels && columns < 2)
    throw DataError(name + ": labeled data needs at least 2 columns, row " +
                    std::to_string(line_numbers.front()) + " has " + std::to_string(columns));
  const std::size_t dims = columns - (has_labels ? 1 : 0);

  std::size_t first = 0;
  {
    double v;
    for (std::size_t c = 0; c < dims; ++c) {
      if (!parse_double(rows.front()[c], v)) {
        first = 1;
        break;
      }
    }
  }
  if (first == rows.size()) throw DataError(name + ": no data rows after header");

  std::vector<double> values;
  values.reserve((rows.size() - first) * dims);
  std::vector<std::string_view> raw_labels;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != columns)
      throw DataError(name + ": ragged rows, row " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(columns));
    for (std::size_t c = 0; c < dims; ++c) {
      double v;
      if (!parse_double(cells[c], v))
        throw DataError(name + ": non-numeric value '" + std::string(cells[c]) + "' at row " +
                        std::to_string(line_numbers[r]) + ", column " + std::to_string(c + 1));
      values.push_back(v);
    }
    if (has_labels) raw_labels.push_back(cells.back());
  }

  std::vector<int> labels;
  if (has_labels) {
    labels.reserve(raw_labels.size());
    bool numeric = std::all_of(raw_labels.begin(), raw_labels.end(), [](std::string_view s) {
      int v;
      return parse_int(s, v);
    });
    if (numeric) {
      for (auto s : raw_labels) {
        int v = 0;
        parse_int(s, v);
        labels.push_back(v);
      }
    } else {
      std::map<std::string_view, int> ids;
      for (auto s : raw_labels) {
        auto [it, inserted] = ids.try_emplace(s, static_cast<int>(ids.size()));
        labels.push_back(it->second);
      }
    }
  }
  return Dataset(std::move(name), dims, std::move(values), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, has_labels, path.stem().string());
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_csv(std::ostream& out, const Dataset& dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto p = dataset.pattern(i);
    for (std::size_t f = 0; f < p.size(); ++f) {
      if (f) out << ',';
      put_double(out, p[f]);
    }
    if (dataset.has_labels()) out << ',' << dataset.labels()[i];
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, dataset);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

DistanceMatrix distance_matrix(const Dataset& dataset) {
  if (dataset.empty()) throw DataError("distance matrix of an empty dataset");
  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
  DistanceMatrix m(dataset.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      if (j != i) m(i, j) = euclidean(dataset.pattern(i), dataset.pattern(j));
    }
  }
  return m;
}

DistanceMatrix distance_matrix_serial(const Dataset& dataset) {
  if (dataset.empty()) throw DataError("distance matrix of an empty dataset");
  const auto n = dataset.size();
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = euclidean(dataset.pattern(i), dataset.pattern(j));
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

void write_matrix_csv(std::ostream& out, const DistanceMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    auto row = matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      put_double(out, row[j]);
    }
    out << '\n';
  }
}

}  // namespace kflann
