#include "kflann/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace kflann {

namespace {

std::vector<std::vector<std::size_t>> group_members(std::span<const std::size_t> assignments,
                                                    std::size_t clusters) {
  std::vector<std::vector<std::size_t>> members(clusters);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= clusters)
      throw std::invalid_argument("assignment " + std::to_string(assignments[i]) +
                                  " has no centroid");
    members[assignments[i]].push_back(i);
  }
  for (std::size_t c = 0; c < clusters; ++c)
    if (members[c].empty())
      throw DegeneratePartition("cluster " + std::to_string(c) + " is empty");
  return members;
}

double separation_sum(const Centroids& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j)
      if (j != i) nearest = std::min(nearest, euclidean(centroids[i], centroids[j]));
    total += nearest;
  }
  return total;
}

void require_partition(const Centroids& centroids) {
  if (centroids.size() < 2)
    throw DegeneratePartition("CS measure needs at least two clusters");
}

// Per-cluster means of the farthest-member distances, summed in cluster order.
double scatter_sum(const std::vector<std::vector<std::size_t>>& members,
                   const std::vector<double>& farthest) {
  double total = 0.0;
  for (const auto& m : members) {
    double s = 0.0;
    for (auto i : m) s += farthest[i];
    total += s / static_cast<double>(m.size());
  }
  return total;
}

double ratio(double scatter, double separation) {
  if (!(separation > 0.0))
    throw DegeneratePartition("all centroids coincide; CS measure undefined");
  return scatter / separation;
}

}  // namespace

double cs_measure(const Dataset& dataset, std::span<const std::size_t> assignments,
                  const Centroids& centroids) {
  require_partition(centroids);
  if (assignments.size() != dataset.size())
    throw std::invalid_argument("cs_measure: assignment count does not match the dataset");
  auto members = group_members(assignments, centroids.size());
  std::vector<double> farthest(dataset.size(), 0.0);
  for (const auto& m : members)
    for (auto i : m)
      for (auto q : m)
        farthest[i] = std::max(farthest[i], euclidean(dataset.pattern(i), dataset.pattern(q)));
  return ratio(scatter_sum(members, farthest), separation_sum(centroids));
}

double cs_measure(const DistanceMatrix& distances, std::span<const std::size_t> assignments,
                  const Centroids& centroids) {
  require_partition(centroids);
  if (assignments.size() != distances.size())
    throw std::invalid_argument("cs_measure: assignment count does not match the matrix");
  auto members = group_members(assignments, centroids.size());
  std::vector<double> farthest(distances.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(distances.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto row = distances.row(i);
    double best = 0.0;
    for (auto q : members[assignments[i]]) best = std::max(best, row[q]);
    farthest[i] = best;
  }
  return ratio(scatter_sum(members, farthest), separation_sum(centroids));
}

double cs_measure_serial(const DistanceMatrix& distances, std::span<const std::size_t> assignments,
                         const Centroids& centroids) {
  require_partition(centroids);
  if (assignments.size() != distances.size())
    throw std::invalid_argument("cs_measure: assignment count does not match the matrix");
  auto members = group_members(assignments, centroids.size());
  std::vector<double> farthest(distances.size(), 0.0);
  for (const auto& m : members)
    for (auto i : m)
      for (auto q : m) farthest[i] = std::max(farthest[i], distances(i, q));
  return ratio(scatter_sum(members, farthest), separation_sum(centroids));
}

namespace {

// Maximum-weight assignment on a rows <= cols matrix (Kuhn-Munkres with
// potentials). Returns the matched weight.
long long max_assignment(const std::vector<std::vector<long long>>& weight) {
  const std::size_t n = weight.size();
  const std::size_t m = weight.front().size();
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      long long delta = inf;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        long long cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  long long total = 0;
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) total += weight[p[j] - 1][j - 1];
  return total;
}

}  // namespace

std::string_view to_string(ErrorMapping m) {
  return m == ErrorMapping::one_to_one ? "one-to-one" : "majority";
}

ErrorMapping parse_error_mapping(std::string_view s) {
  if (s == "one-to-one") return ErrorMapping::one_to_one;
  if (s == "majority") return ErrorMapping::majority;
  throw std::invalid_argument("unknown error mapping '" + std::string(s) + "'");
}

double error_rate(std::span<const std::size_t> assignments, std::span<const int> labels,
                  ErrorMapping mapping) {
  if (labels.empty()) throw std::invalid_argument("error rate needs class labels");
  if (labels.size() != assignments.size())
    throw std::invalid_argument("error rate: label count does not match assignment count");

  std::map<std::size_t, std::size_t> cluster_ids;
  std::map<int, std::size_t> class_ids;
  for (auto a : assignments) cluster_ids.try_emplace(a, 0);
  for (auto l : labels) class_ids.try_emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : class_ids) id = next++;
  next = 0;
  for (auto& [cluster, id] : cluster_ids) id = next++;

  std::vector<std::vector<long long>> counts(cluster_ids.size(),
                                             std::vector<long long>(class_ids.size(), 0));
  for (std::size_t i = 0; i < assignments.size(); ++i)
    ++counts[cluster_ids[assignments[i]]][class_ids[labels[i]]];

  long long correct = 0;
  if (mapping == ErrorMapping::majority) {
    for (const auto& row : counts) correct += *std::max_element(row.begin(), row.end());
  } else if (counts.size() <= counts.front().size()) {
    correct = max_assignment(counts);
  } else {
    std::vector<std::vector<long long>> transposed(counts.front().size(),
                                                   std::vector<long long>(counts.size()));
    for (std::size_t r = 0; r < counts.size(); ++r)
      for (std::size_t c = 0; c < counts[r].size(); ++c) transposed[c][r] = counts[r][c];
    correct = max_assignment(transposed);
  }
  const auto n = static_cast<long long>(assignments.size());
  return 100.0 * static_cast<double>(n - correct) / static_cast<double>(n);
}

double fitness(double cs, double error_rate) { return 1.0 / (cs * error_rate + kFitnessBias); }

std::size_t default_max_clusters(std::size_t patterns) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(patterns)));
  while ((k + 1) * (k + 1) <= patterns) ++k;
  while (k * k > patterns) --k;
  return std::max<std::size_t>(k, 2);
}

ValidityReport evaluate(const Dataset& dataset, const ClusteringOutcome& outcome,
                        const EvaluationOptions& options, const DistanceMatrix* distances) {
  ValidityReport report;
  report.clusters = outcome.clusters();
  if (dataset.has_labels())
    report.error_rate = error_rate(outcome.assignments, dataset.labels(), options.mapping);
  else if (!options.unsupervised)
    throw std::invalid_argument("supervised fitness needs class labels");

  if (options.max_clusters != 0 && report.clusters > options.max_clusters) {
    report.degenerate = true;
    return report;
  }
  try {
    report.cs = distances ? cs_measure(*distances, outcome.assignments, outcome.centroids)
                          : cs_measure(dataset, outcome.assignments, outcome.centroids);
  } catch (const DegeneratePartition&) {
    report.cs = 0.0;
    report.degenerate = true;
    report.fitness = 0.0;
    return report;
  }
  report.fitness = fitness(report.cs, options.unsupervised ? 1.0 : *report.error_rate);
  return report;
}

}  // namespace kflann
