#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "kflann/dataset.hpp"
#include "kflann/network.hpp"

namespace kflann {

class DegeneratePartition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kFitnessBias = 2e-6;

// How clusters are mapped onto classes for the error rate.
//   one_to_one: each class is claimed by at most one cluster, chosen to
//               maximise correctly placed patterns; members of unclaimed
//               clusters are errors, so over-segmentation is penalised.
//   majority:   every cluster takes its majority class.
enum class ErrorMapping { one_to_one, majority };

std::string_view to_string(ErrorMapping m);
ErrorMapping parse_error_mapping(std::string_view s);

struct ValidityReport {
  double cs = 0.0;
  std::optional<double> error_rate;  // percent; absent for unlabeled data
  double fitness = 0.0;
  std::size_t clusters = 0;
  bool degenerate = false;  // K outside [2, max_clusters] or coincident centroids; fitness 0
};

struct EvaluationOptions {
  bool unsupervised = false;  // error term replaced by 1
  ErrorMapping mapping = ErrorMapping::one_to_one;
  std::size_t max_clusters = 0;  // 0: no upper limit
};

// Conventional upper end of the cluster-count search range, floor(sqrt(n)).
std::size_t default_max_clusters(std::size_t patterns);

// CS measure: summed per-cluster mean of the farthest-member distance, over
// summed distance from each centroid to its nearest other centroid. Throws
// DegeneratePartition for K < 2, an empty cluster or a zero denominator.
double cs_measure(const Dataset& dataset, std::span<const std::size_t> assignments,
                  const Centroids& centroids);

// Same measure with pairwise distances looked up from a precomputed matrix.
// Patterns are processed in parallel; the result does not depend on the
// thread count.
double cs_measure(const DistanceMatrix& distances, std::span<const std::size_t> assignments,
                  const Centroids& centroids);
double cs_measure_serial(const DistanceMatrix& distances, std::span<const std::size_t> assignments,
                         const Centroids& centroids);


// Percentage of patterns placed in a cluster not mapped to their class.
double error_rate(std::span<const std::size_t> assignments, std::span<const int> labels,
                  ErrorMapping mapping = ErrorMapping::one_to_one);

double fitness(double cs, double error_rate);

ValidityReport evaluate(const Dataset& dataset, const ClusteringOutcome& outcome,
                        const EvaluationOptions& options = {},
                        const DistanceMatrix* distances = nullptr);

}  // namespace kflann
