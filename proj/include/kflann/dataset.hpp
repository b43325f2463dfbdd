#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kflann {

// Input errors carry the offending row/column in their message.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major pattern matrix with optional integer class labels.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::size_t dims, std::vector<double> values,
          std::vector<int> labels = {});

  std::size_t size() const { return dims_ == 0 ? 0 : values_.size() / dims_; }
  std::size_t dims() const { return dims_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> pattern(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  std::span<const double> values() const { return values_; }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<int>& labels() const { return labels_; }
  const std::string& name() const { return name_; }

  // Same patterns presented in a different order (labels follow).
  Dataset permuted(std::span<const std::size_t> order) const;

 private:
  std::string name_;
  std::size_t dims_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
};

struct FeatureBounds {
  std::vector<double> mindist;  // smallest nonzero gap between values of a feature
  std::vector<double> maxdist;  // max - min of a feature

  std::size_t dims() const { return maxdist.size(); }
};

FeatureBounds feature_bounds(const Dataset& dataset);

// A header line is detected when any feature cell of the first row is
// non-numeric. With labels, the last column is the class: integers are kept,
// anything else is mapped to dense ids in first-appearance order.
Dataset parse_csv(std::istream& in, bool has_labels, std::string name = "dataset");
Dataset load_csv(const std::filesystem::path& path, bool has_labels);

void write_csv(std::ostream& out, const Dataset& dataset);
void write_csv(const std::filesystem::path& path, const Dataset& dataset);

// Dense symmetric matrix of pairwise Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

double euclidean(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// OpenMP kernel; distance_matrix_serial is the reference it is tested against.
DistanceMatrix distance_matrix(const Dataset& dataset);
DistanceMatrix distance_matrix_serial(const Dataset& dataset);

void write_matrix_csv(std::ostream& out, const DistanceMatrix& matrix);

}  // namespace kflann
