#include "kflann/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kflann {

std::string_view to_string(Variant v) {
  return v == Variant::original ? "original" : "enhanced";
}

Variant parse_variant(std::string_view s) {
  if (s == "original") return Variant::original;
  if (s == "enhanced") return Variant::enhanced;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

void KflannParams::validate(std::size_t dims) const {
  if (!(vigilance > 0.0 && vigilance <= 1.0))
    throw std::invalid_argument("vigilance must lie in (0, 1], got " + std::to_string(vigilance));
  if (tolerances.size() != dims)
    throw std::invalid_argument("tolerance count " + std::to_string(tolerances.size()) +
                                " does not match dataset dimensionality " + std::to_string(dims));
  for (double t : tolerances)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("tolerances must be finite and non-negative");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
}

std::size_t Network::add_node(std::span<const double> weights) {
  weights_.insert(weights_.end(), weights.begin(), weights.end());
  members_.emplace_back();
  return members_.size() - 1;
}

void Network::clear() {
  weights_.clear();
  members_.clear();
}

namespace {

std::size_t matched_features(std::span<const double> w, std::span<const double> x,
                             std::span<const double> tol) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dev = w[i] - x[i];
    if (tol[i] * tol[i] - dev * dev > 0.0) ++count;
  }
  return count;
}

// Scores are compared as k/d against the vigilance; the slack absorbs
// vigilance values typed as rounded decimals (0.6667 for 2/3), measured
// in features.
constexpr double kVigilanceSlack = 1e-3;

void collect_matches(const Network& network, std::span<const double> x,
                     const KflannParams& params, std::vector<Match>& out) {
  out.clear();
  const auto d = x.size();
  const double needed = params.vigilance * static_cast<double>(d) - kVigilanceSlack;
  for (std::size_t j = 0; j < network.size(); ++j) {
    auto k = matched_features(network.weights(j), x, params.tolerances);
    if (static_cast<double>(k) >= needed)
      out.push_back({j, k, static_cast<double>(k) / static_cast<double>(d)});
  }
}

std::size_t nearest(std::span<const Match> matches, std::span<const double> x,
                    const Network& network, std::size_t required_features) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& m : matches) {
    if (m.matched_features != required_features) continue;
    double dist = squared_distance(network.weights(m.node), x);
    if (!found || dist < best_dist || (dist == best_dist && m.node < best)) {
      best = m.node;
      best_dist = dist;
      found = true;
    }
  }
  return best;
}

void check_dims(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": dimensionality mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

}  // namespace

double match_score(std::span<const double> weights, std::span<const double> x,
                   std::span<const double> tolerances) {
  check_dims(weights, x, "match_score");
  check_dims(tolerances, x, "match_score");
  if (x.empty()) throw std::invalid_argument("match_score: zero-dimensional input");
  return static_cast<double>(matched_features(weights, x, tolerances)) /
         static_cast<double>(x.size());
}

std::vector<Match> find_matches(const Network& network, std::span<const double> x,
                                const KflannParams& params) {
  if (x.size() != network.dims() || params.tolerances.size() != network.dims())
    throw std::invalid_argument("find_matches: dimensionality mismatch");
  std::vector<Match> out;
  collect_matches(network, x, params, out);
  return out;
}

std::size_t select_winner_original(std::span<const Match> matches, std::span<const double> x,
                                   const Network& network) {
  if (matches.empty()) throw std::invalid_argument("select_winner_original: no matches");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& m : matches) {
    double dist = squared_distance(network.weights(m.node), x);
    if (!found || dist < best_dist || (dist == best_dist && m.node < best)) {
      best = m.node;
      best_dist = dist;
      found = true;
    }
  }
  return best;
}

std::size_t select_winner_enhanced(std::span<const Match> matches, std::span<const double> x,
                                   const Network& network) {
  if (matches.empty()) throw std::invalid_argument("select_winner_enhanced: no matches");
  std::size_t top = 0;
  for (const auto& m : matches) top = std::max(top, m.matched_features);
  std::size_t sharing = 0;
  std::size_t unique = 0;
  for (const auto& m : matches) {
    if (m.matched_features == top) {
      ++sharing;
      unique = m.node;
    }
  }
  if (sharing == 1) return unique;
  return nearest(matches, x, network, top);
}

Centroids compute_centroids(const Network& network, const Dataset& dataset) {
  const auto d = dataset.dims();
  Centroids centroids(network.size(), std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < network.size(); ++j) {
    const auto& members = network.members(j);
    if (members.empty())
      throw std::invalid_argument("compute_centroids: node " + std::to_string(j) +
                                  " has no members");
    auto& c = centroids[j];
    for (auto i : members) {
      auto p = dataset.pattern(i);
      for (std::size_t f = 0; f < d; ++f) c[f] += p[f];
    }
    for (auto& v : c) v /= static_cast<double>(members.size());
  }
  return centroids;
}

Network run_epoch(const Dataset& dataset, std::span<const std::size_t> order,
                  const KflannParams& params) {
  Network network(dataset.dims());
  std::vector<Match> matches;
  for (auto i : order) {
    auto x = dataset.pattern(i);
    collect_matches(network, x, params, matches);
    if (matches.empty()) {
      network.assign(network.add_node(x), i);
      continue;
    }
    auto winner = params.variant == Variant::original
                      ? select_winner_original(matches, x, network)
                      : select_winner_enhanced(matches, x, network);
    network.assign(winner, i);
  }
  return network;
}

namespace {

bool unchanged(const Centroids& before, const Centroids& after) {
  if (before.size() != after.size()) return false;
  for (std::size_t j = 0; j < before.size(); ++j)
    for (std::size_t f = 0; f < before[j].size(); ++f)
      if (std::abs(before[j][f] - after[j][f]) > kCentroidTolerance) return false;
  return true;
}

Centroids node_weights(const Network& network) {
  Centroids w;
  w.reserve(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) {
    auto s = network.weights(j);
    w.emplace_back(s.begin(), s.end());
  }
  return w;
}

std::vector<std::size_t> reshuffle(const std::vector<std::size_t>& order, const Network& network,
                                   const Centroids& centroids, const Dataset& dataset) {
  std::vector<std::size_t> seeds;
  seeds.reserve(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (auto i : network.members(j)) {
      double dist = squared_distance(dataset.pattern(i), centroids[j]);
      if (dist < best_dist) {
        best = i;
        best_dist = dist;
      }
    }
    seeds.push_back(best);
  }
  std::vector<char> is_seed(dataset.size(), 0);
  for (auto s : seeds) is_seed[s] = 1;
  std::vector<std::size_t> next = seeds;
  next.reserve(order.size());
  for (auto i : order)
    if (!is_seed[i]) next.push_back(i);
  return next;
}

}  // namespace

ClusteringOutcome cluster(const Dataset& dataset, const KflannParams& params) {
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return cluster(dataset, params, std::move(order));
}

ClusteringOutcome cluster(const Dataset& dataset, const KflannParams& params,
                          std::vector<std::size_t> order) {
  if (dataset.empty()) throw std::invalid_argument("cluster: empty dataset");
  params.validate(dataset.dims());
  {
    std::vector<bool> seen(dataset.size(), false);
    if (order.size() != dataset.size())
      throw std::invalid_argument("cluster: order is not a permutation of the patterns");
    for (auto i : order) {
      if (i >= seen.size() || seen[i])
        throw std::invalid_argument("cluster: order is not a permutation of the patterns");
      seen[i] = true;
    }
  }

  ClusteringOutcome out;

  Centroids previous;
  for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
    Network network = run_epoch(dataset, order, params);
    Centroids centroids = compute_centroids(network, dataset);
    // The first epoch has no earlier centroids; its seeds play that role.
    const Centroids& reference = epoch == 1 ? node_weights(network) : previous;
    bool stable = unchanged(reference, centroids);

    out.epochs = epoch;
    out.order = order;
    if (stable || epoch == params.max_epochs) {
      out.converged = stable;
      out.assignments.assign(dataset.size(), 0);
      for (std::size_t j = 0; j < network.size(); ++j)
        for (auto i : network.members(j)) out.assignments[i] = j;
      out.centroids = std::move(centroids);
      break;
    }
    order = reshuffle(order, network, centroids, dataset);
    previous = std::move(centroids);
  }
  return out;
}

}  // namespace kflann
