#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kflann/dataset.hpp"

namespace kflann {

enum class Variant { original, enhanced };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct KflannParams {
  double vigilance = 1.0;           // fraction of features that must match, (0, 1]
  std::vector<double> tolerances;   // per-feature allowed deviation, >= 0
  Variant variant = Variant::enhanced;
  int max_epochs = 50;

  // Throws std::invalid_argument on a violated invariant.
  void validate(std::size_t dims) const;
};

using Centroids = std::vector<std::vector<double>>;

// Output layer: one weight vector per node plus the patterns it has absorbed.
class Network {
 public:
  explicit Network(std::size_t dims) : dims_(dims) {}

  std::size_t dims() const { return dims_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  std::span<const double> weights(std::size_t node) const {
    return {weights_.data() + node * dims_, dims_};
  }
  const std::vector<std::size_t>& members(std::size_t node) const { return members_[node]; }

  std::size_t add_node(std::span<const double> weights);
  void assign(std::size_t node, std::size_t pattern) { members_[node].push_back(pattern); }
  void clear();

 private:
  std::size_t dims_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> members_;
};

struct Match {
  std::size_t node = 0;
  std::size_t matched_features = 0;
  double score = 0.0;
};

// Fraction of features whose squared deviation is strictly inside the
// squared tolerance.
double match_score(std::span<const double> weights, std::span<const double> x,
                   std::span<const double> tolerances);

// Nodes whose score reaches the vigilance (inclusive), in node order.
std::vector<Match> find_matches(const Network& network, std::span<const double> x,
                                const KflannParams& params);

// Nearest matched node; ties go to the lowest node index.
std::size_t select_winner_original(std::span<const Match> matches, std::span<const double> x,
                                   const Network& network);

// Highest-scoring node; when several share the top score, the nearest of them.
std::size_t select_winner_enhanced(std::span<const Match> matches, std::span<const double> x,
                                   const Network& network);

Centroids compute_centroids(const Network& network, const Dataset& dataset);

// One presentation of the patterns in `order` to a fresh network.
Network run_epoch(const Dataset& dataset, std::span<const std::size_t> order,
                  const KflannParams& params);

struct ClusteringOutcome {
  std::vector<std::size_t> assignments;  // pattern index -> node index
  Centroids centroids;
  int epochs = 0;
  bool converged = false;
  std::vector<std::size_t> order;  // presentation order of the final epoch

  std::size_t clusters() const { return centroids.size(); }
};

inline constexpr double kCentroidTolerance = 1e-9;

// Epochs repeat until the centroids stop moving. After an unstable epoch the
// member nearest each centroid is moved to the front of the presentation
// order (clusters in node order) and the network is rebuilt.
ClusteringOutcome cluster(const Dataset& dataset, const KflannParams& params);
// Same, starting from a caller-supplied permutation instead of index order.
ClusteringOutcome cluster(const Dataset& dataset, const KflannParams& params,
                          std::vector<std::size_t> initial_order);

}  // namespace kflann
