#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kflann/network.hpp"
#include "kflann/synthetic.hpp"
#include "kflann/validity.hpp"
#include "oracles.hpp"

using namespace kflann;

namespace {

using Vec = std::vector<double>;

Network make_network(std::size_t dims, std::vector<Vec> nodes) {
  Network n(dims);
  for (const auto& w : nodes) n.add_node(w);
  return n;
}

KflannParams params(double rho, Vec tol, Variant v = Variant::enhanced) {
  return {rho, std::move(tol), v, 50};
}

Dataset two_groups() {
  SyntheticSpec s;
  s.dims = 2;
  s.seed = 3;
  s.clusters = {{{0, 0}, {0.3, 0.3}, 30}, {{10, 10}, {0.3, 0.3}, 30}};
  return generate_synthetic(s);
}

std::vector<std::size_t> reshuffled(const Dataset& d, const ClusteringOutcome& o) {
  oracle::Points x;
  for (std::size_t i = 0; i < d.size(); ++i) x.emplace_back(d.pattern(i).begin(), d.pattern(i).end());
  return oracle::reshuffled(x, o.assignments, o.centroids, o.order);
}

}  // namespace

TEST_CASE("match score") {
  CHECK(match_score(Vec{0, 0}, Vec{0.5, 2}, Vec{1, 1}) == 0.5);
  CHECK(match_score(Vec{1, 2, 3}, Vec{1, 2, 3}, Vec{0.1, 0.1, 0.1}) == 1.0);
  CHECK(match_score(Vec{0, 0}, Vec{1, 1}, Vec{0, 0}) == 0.0);
  // A deviation equal to the tolerance does not count.
  CHECK(match_score(Vec{0}, Vec{1}, Vec{1}) == 0.0);
  CHECK(match_score(Vec{0}, Vec{0.999}, Vec{1}) == 1.0);
  CHECK_THROWS_AS(match_score(Vec{0}, Vec{0, 1}, Vec{1}), std::invalid_argument);
  CHECK_THROWS_AS(match_score(Vec{}, Vec{}, Vec{}), std::invalid_argument);
}

TEST_CASE("find matches") {
  SUBCASE("empty network") {
    Network n(2);
    CHECK(find_matches(n, Vec{1, 1}, params(1, {1, 1})).empty());
  }
  SUBCASE("perfect match") {
    auto n = make_network(2, {{3, 4}});
    auto m = find_matches(n, Vec{3, 4}, params(1, {0.5, 0.5}));
    REQUIRE(m.size() == 1);
    CHECK(m[0].node == 0);
    CHECK(m[0].score == 1.0);
  }
  SUBCASE("score equal to vigilance is a match") {
    auto n = make_network(4, {{0, 0, 0, 0}});
    auto m = find_matches(n, Vec{0, 0, 0, 5}, params(0.75, {1, 1, 1, 1}));
    REQUIRE(m.size() == 1);
    CHECK(m[0].score == 0.75);
    CHECK(find_matches(n, Vec{0, 0, 5, 5}, params(0.75, {1, 1, 1, 1})).empty());
  }
  SUBCASE("typed two thirds selects the 2/3 grid point") {
    auto n = make_network(3, {{0, 0, 0}});
    CHECK(find_matches(n, Vec{0, 0, 5}, params(0.6667, {1, 1, 1})).size() == 1);
  }
}

TEST_CASE("original winner") {
  auto n = make_network(2, {{0, 0}, {3, 0}});
  std::vector<Match> both{{0, 2, 1.0}, {1, 2, 1.0}};
  CHECK(select_winner_original(both, Vec{1, 0}, n) == 0);
  std::vector<Match> one{{1, 1, 0.5}};
  CHECK(select_winner_original(one, Vec{1, 0}, n) == 1);
  CHECK(select_winner_original(both, Vec{1.5, 0}, n) == 0);
  CHECK_THROWS_AS(select_winner_original({}, Vec{1, 0}, n), std::invalid_argument);
}

TEST_CASE("enhanced winner") {
  auto n = make_network(4, {{0, 0, 0, 0}, {9, 9, 9, 9}});
  SUBCASE("unique top score wins even when farther") {
    std::vector<Match> m{{0, 3, 0.75}, {1, 4, 1.0}};
    CHECK(select_winner_enhanced(m, Vec{1, 1, 1, 1}, n) == 1);
  }
  SUBCASE("shared top score goes to the nearest") {
    auto n2 = make_network(1, {{0}, {3}});
    std::vector<Match> m{{0, 1, 1.0}, {1, 1, 1.0}};
    CHECK(select_winner_enhanced(m, Vec{2}, n2) == 1);  // distances 4 and 1
  }
  SUBCASE("singleton") {
    std::vector<Match> m{{0, 2, 0.5}};
    CHECK(select_winner_enhanced(m, Vec{1, 1, 1, 1}, n) == 0);
  }
  CHECK_THROWS_AS(select_winner_enhanced({}, Vec{1, 1, 1, 1}, n), std::invalid_argument);
}

TEST_CASE("rules agree when every match is perfect") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vec> nodes;
    for (int j = 0; j < 5; ++j) nodes.push_back({u(rng), u(rng)});
    auto n = make_network(2, nodes);
    Vec x{u(rng), u(rng)};
    auto m = find_matches(n, x, params(1.0, {2, 2}));
    REQUIRE(m.size() == 5);
    CHECK(select_winner_original(m, x, n) == select_winner_enhanced(m, x, n));
  }
}

TEST_CASE("match monotonicity in the tolerances") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 3);
  for (int t = 0; t < 500; ++t) {
    Vec w{u(rng), u(rng), u(rng)}, x{u(rng), u(rng), u(rng)}, tol{u(rng), u(rng), u(rng)};
    Vec wider = tol;
    for (auto& v : wider) v += u(rng);
    CHECK(match_score(w, x, wider) >= match_score(w, x, tol));
  }
}

TEST_CASE("centroids") {
  Dataset d("c", 2, {0, 0, 2, 2, 1, 0, 2, 0, 3, 0, 7, 7});
  Network n(2);
  n.add_node(d.pattern(0));
  n.assign(0, 0);
  n.assign(0, 1);
  n.add_node(d.pattern(2));
  n.assign(1, 2);
  n.assign(1, 3);
  n.assign(1, 4);
  n.add_node(d.pattern(5));
  n.assign(2, 5);
  auto c = compute_centroids(n, d);
  CHECK(c[0] == Vec{1, 1});
  CHECK(c[1] == Vec{2, 0});
  CHECK(c[2] == Vec{7, 7});

  n.add_node(d.pattern(0));
  CHECK_THROWS_AS(compute_centroids(n, d), std::invalid_argument);
}

TEST_CASE("clustering separated groups") {
  auto d = two_groups();
  for (auto v : {Variant::original, Variant::enhanced}) {
    auto o = cluster(d, params(1.0, {3, 3}, v));
    CHECK(o.converged);
    REQUIRE(o.clusters() == 2);
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK((o.assignments[i] == o.assignments[0]) == (d.labels()[i] == d.labels()[0]));
  }
}

TEST_CASE("single pattern") {
  Dataset d("one", 3, {1, 2, 3});
  auto o = cluster(d, params(1.0, {1, 1, 1}));
  CHECK(o.clusters() == 1);
  CHECK(o.centroids[0] == Vec{1, 2, 3});
  CHECK(o.epochs == 1);
  CHECK(o.converged);
}

TEST_CASE("huge tolerances and minimal vigilance give one cluster") {
  auto d = generate_synthetic(preset("syndata6"));
  auto b = feature_bounds(d);
  Vec tol;
  for (double m : b.maxdist) tol.push_back(m + 1);
  auto o = cluster(d, params(1.0 / static_cast<double>(d.dims()), tol));
  CHECK(o.clusters() == 1);
  auto r = evaluate(d, o);
  CHECK(r.degenerate);
  CHECK(r.fitness == 0.0);
}

TEST_CASE("clustering properties") {
  std::vector<Dataset> sets;
  sets.push_back(two_groups());
  sets.push_back(generate_synthetic(preset("syndata2", 5)));
  sets.push_back(generate_synthetic(preset("thyroid5")));
  std::mt19937_64 rng(8);
  for (const auto& d : sets) {
    auto b = feature_bounds(d);
    for (int t = 0; t < 6; ++t) {
      Vec tol;
      for (std::size_t f = 0; f < d.dims(); ++f)
        tol.push_back(std::uniform_real_distribution<double>(b.mindist[f], b.maxdist[f] / 2)(rng));
      double rho = static_cast<double>(1 + rng() % d.dims()) / static_cast<double>(d.dims());
      for (auto v : {Variant::original, Variant::enhanced}) {
        auto p = params(rho, tol, v);
        auto o = cluster(d, p);
        CAPTURE(d.name());
        CHECK(o.clusters() <= d.size());
        CHECK(o.clusters() >= 1);

        auto again = cluster(d, p);
        CHECK(again.assignments == o.assignments);
        CHECK(again.centroids == o.centroids);

        // Centroids agree with an independent recomputation from the assignments.
        std::vector<Vec> sum(o.clusters(), Vec(d.dims(), 0.0));
        std::vector<double> cnt(o.clusters(), 0);
        for (std::size_t i = 0; i < d.size(); ++i) {
          cnt[o.assignments[i]] += 1;
          for (std::size_t f = 0; f < d.dims(); ++f) sum[o.assignments[i]][f] += d.pattern(i)[f];
        }
        for (std::size_t j = 0; j < o.clusters(); ++j)
          for (std::size_t f = 0; f < d.dims(); ++f)
            CHECK(std::abs(sum[j][f] / cnt[j] - o.centroids[j][f]) <= 1e-9);

        if (o.converged) {
          auto net = run_epoch(d, reshuffled(d, o), p);
          auto c = compute_centroids(net, d);
          REQUIRE(c.size() == o.centroids.size());
          for (std::size_t j = 0; j < c.size(); ++j)
            for (std::size_t f = 0; f < d.dims(); ++f)
              CHECK(std::abs(c[j][f] - o.centroids[j][f]) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("initial order") {
  auto d = two_groups();
  std::vector<std::size_t> order(d.size());
  std::iota(order.rbegin(), order.rend(), 0);
  auto o = cluster(d, params(1.0, {3, 3}), order);
  CHECK(o.clusters() == 2);
  CHECK_THROWS_AS(cluster(d, params(1.0, {3, 3}), {0, 1}), std::invalid_argument);
  std::vector<std::size_t> dup(d.size(), 0);
  CHECK_THROWS_AS(cluster(d, params(1.0, {3, 3}), dup), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  auto d = two_groups();
  CHECK_THROWS_AS(cluster(d, params(0.0, {1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(cluster(d, params(1.5, {1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(cluster(d, params(1.0, {1})), std::invalid_argument);
  CHECK_THROWS_AS(cluster(d, params(1.0, {1, -1})), std::invalid_argument);
  CHECK_THROWS_AS(cluster(Dataset{}, params(1.0, {1, 1})), std::invalid_argument);
  CHECK(parse_variant("original") == Variant::original);
  CHECK_THROWS_AS(parse_variant("fancy"), std::invalid_argument);
}
