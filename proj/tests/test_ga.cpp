#include <doctest.h>

#include <cmath>
#include <random>

#include "kflann/ga.hpp"
#include "kflann/synthetic.hpp"

using namespace kflann;

namespace {

FeatureBounds bounds4() {
  FeatureBounds b;
  b.mindist = {0.1, 0.2, 0.05, 1.0};
  b.maxdist = {4.0, 2.0, 1.0, 6.0};
  return b;
}

double chi_square(const std::vector<double>& counts, const std::vector<double>& expected) {
  double s = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    s += (counts[i] - expected[i]) * (counts[i] - expected[i]) / expected[i];
  return s;
}

GaConfig small_config() {
  GaConfig c;
  c.popsize = 12;
  c.generations = 4;
  c.runs = 2;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("vigilance from control bits") {
  CHECK(vigilance_from_control(Bits{1, 0, 1, 1}) == 0.75);
  CHECK(vigilance_from_control(Bits{1, 1, 1, 1}) == 1.0);
  CHECK(vigilance_from_control(Bits{1, 0, 0, 0}) == 0.25);
  CHECK_THROWS_AS(vigilance_from_control(Bits{}), std::invalid_argument);
  CHECK(snap_vigilance(0.6667, 3) == 2.0 / 3.0);
  CHECK(snap_vigilance(0.01, 4) == 0.25);
}

TEST_CASE("decode and encode") {
  Chromosome c{{1, 0, 1, 1}, {0.1588, 0.0351, 0.5684, 0.0121}, 0.75};
  CHECK(c.length() == 9);
  auto p = decode(c, Variant::enhanced);
  CHECK(p.vigilance == 0.75);
  CHECK(p.tolerances == std::vector<double>{0.1588, 0.0351, 0.5684, 0.0121});
  CHECK(p.variant == Variant::enhanced);

  auto e = encode(p);
  CHECK(e.control == Bits{1, 1, 1, 0});
  CHECK(vigilance_from_control(e.control) == e.vigilance);
  CHECK(decode(e, Variant::enhanced).tolerances == p.tolerances);

  c.vigilance = 0;
  CHECK_THROWS_AS(decode(c, Variant::original), std::invalid_argument);
}

TEST_CASE("initial population") {
  GaConfig cfg;
  cfg.popsize = 200;
  Rng rng(5);
  auto pop = init_population(bounds4(), cfg, rng);
  REQUIRE(pop.size() == 200);
  auto range = tolerance_ranges(bounds4());
  for (const auto& c : pop) {
    CHECK(c.length() == 9);
    CHECK(c.vigilance == vigilance_from_control(c.control));
    CHECK(c.vigilance > 0.0);
    for (std::size_t f = 0; f < 4; ++f) {
      CHECK(c.coefficients[f] >= range.lower[f]);
      CHECK(c.coefficients[f] <= range.upper[f]);
    }
  }
  Rng again(5);
  auto pop2 = init_population(bounds4(), cfg, again);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(pop[i].control == pop2[i].control);
    CHECK(pop[i].coefficients == pop2[i].coefficients);
  }

  SUBCASE("collapsed ranges") {
    FeatureBounds b;
    b.mindist = {1.0, 3.0};
    b.maxdist = {2.0, 6.0};
    Rng r(1);
    for (const auto& c : init_population(b, cfg, r)) {
      CHECK(c.coefficients[0] == 1.0);
      CHECK(c.coefficients[1] == 3.0);
    }
    FeatureBounds inverted;
    inverted.mindist = {5.0};
    inverted.maxdist = {2.0};
    auto range2 = tolerance_ranges(inverted);
    CHECK(range2.collapsed == std::vector<std::size_t>{0});
    CHECK(range2.upper[0] == 5.0);
  }
  SUBCASE("direct vigilance mode") {
    cfg.cong_mode = false;
    Rng r(2);
    for (const auto& c : init_population(bounds4(), cfg, r)) {
      CHECK(c.vigilance == snap_vigilance(c.vigilance, 4));
      CHECK(vigilance_from_control(c.control) == c.vigilance);
    }
  }
}

TEST_CASE("roulette") {
  SUBCASE("pick uses the first cumulative value above r") {
    std::vector<double> cum{0.25, 0.5, 0.75, 1.0};
    CHECK(roulette_pick(cum, 0.0) == 0);
    CHECK(roulette_pick(cum, 0.25) == 1);
    CHECK(roulette_pick(cum, 0.99) == 3);
    std::vector<double> rounded{0.5, 0.9999999, 0.9999999};
    CHECK(roulette_pick(rounded, 0.99999995) == 1);
  }
  SUBCASE("equal fitness is uniform") {
    Rng rng(3);
    std::vector<double> f{1, 1, 1, 1};
    std::vector<double> counts(4, 0);
    for (auto i : roulette_select(f, 10000, rng)) counts[i] += 1;
    // 1% critical value of chi-square with 3 degrees of freedom.
    CHECK(chi_square(counts, {2500, 2500, 2500, 2500}) < 11.345);
  }
  SUBCASE("3:1 split") {
    Rng rng(4);
    std::vector<double> f{3, 1};
    double zero = 0;
    for (auto i : roulette_select(f, 100000, rng)) zero += i == 0;
    CHECK(std::abs(zero / 100000 - 0.75) <= 0.01);
  }
  SUBCASE("dominant mass") {
    Rng rng(5);
    std::vector<double> f{1, 1e-12, 1e-12, 1e-12};
    for (auto i : roulette_select(f, 1000, rng)) CHECK(i == 0);
  }
  SUBCASE("bad inputs") {
    Rng rng(6);
    std::vector<double> neg{1, -1};
    CHECK_THROWS_AS(roulette_select(neg, 2, rng), std::invalid_argument);
    CHECK_THROWS_AS(roulette_select({}, 2, rng), std::invalid_argument);
    std::vector<double> zeros{0, 0, 0};
    CHECK(roulette_select(zeros, 5, rng).size() == 5);
  }
}

TEST_CASE("uniform crossover") {
  Bits zeros{0, 0, 0, 0}, ones{1, 1, 1, 1};
  std::vector<double> draws{0.3, 0.7, 0.2, 0.9};
  auto [o1, o2] = uniform_crossover(zeros, ones, draws);
  CHECK(o1 == Bits{1, 0, 1, 0});
  CHECK(o2 == Bits{0, 1, 0, 1});

  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    auto [a, b] = uniform_crossover(zeros, ones, rng);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] != b[i]);
    auto [c, d] = uniform_crossover(ones, ones, rng);
    CHECK(c == ones);
    CHECK(d == ones);
  }
  CHECK_THROWS_AS(uniform_crossover(zeros, Bits{1}, draws), std::invalid_argument);
}

TEST_CASE("arithmetic crossover") {
  std::vector<double> one{1.0}, zero{0.0};
  auto [a, b] = arithmetic_crossover(one, zero, 0.7);
  CHECK(a[0] == doctest::Approx(0.7));
  CHECK(b[0] == doctest::Approx(0.3));

  std::vector<double> p{0.5, 2.0}, q{0.5, 2.0};
  auto [c, d] = arithmetic_crossover(p, q, 0.7);
  CHECK(c == p);
  CHECK(d == p);

  std::vector<double> r{1.0, 4.0}, s{3.0, 0.0};
  auto [m1, m2] = arithmetic_crossover(r, s, 0.5);
  CHECK(m1 == std::vector<double>{2.0, 2.0});
  CHECK(m2 == m1);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x{u(rng), u(rng)}, y{u(rng), u(rng)};
    auto [o1, o2] = arithmetic_crossover(x, y, 0.7);
    for (std::size_t i = 0; i < 2; ++i) CHECK(o1[i] + o2[i] == doctest::Approx(x[i] + y[i]));
  }
}

TEST_CASE("normal mutation") {
  Rng rng(10);
  Bits b{1, 0, 1, 1};
  for (int t = 0; t < 100; ++t) CHECK(normal_mutation(b, 0.0, rng) == b);
  for (int t = 0; t < 100; ++t) CHECK(normal_mutation(Bits{1}, 1.0, rng) == Bits{1});
  for (int t = 0; t < 200; ++t) {
    auto m = normal_mutation(b, 1.0, rng);
    int hamming = 0;
    for (std::size_t i = 0; i < 4; ++i) hamming += m[i] != b[i];
    CHECK(hamming == 1);
  }
  Bits single{0, 0, 1, 0};
  for (int t = 0; t < 200; ++t) {
    auto m = normal_mutation(single, 1.0, rng);
    CHECK(vigilance_from_control(m) > 0.0);
  }
}

TEST_CASE("non-uniform mutation") {
  CHECK(nonuniform_step(1.0, 0.0, 3.0, 0.5, true, 0, 20, 2.0) == doctest::Approx(2.0));
  CHECK(nonuniform_step(1.0, 0.0, 3.0, 0.5, false, 0, 20, 2.0) == doctest::Approx(0.5));
  CHECK(nonuniform_step(3.0, 0.0, 3.0, 0.9, true, 5, 20, 2.0) == 3.0);
  for (double r : {0.0, 0.3, 1.0}) {
    CHECK(nonuniform_step(1.7, 0.0, 3.0, r, true, 20, 20, 2.0) == 1.7);
    CHECK(nonuniform_step(1.7, 0.0, 3.0, r, false, 20, 20, 2.0) == 1.7);
  }
  CHECK_THROWS_AS(nonuniform_step(1, 0, 3, 0.5, true, 21, 20, 2), std::invalid_argument);

  Rng rng(11);
  std::vector<double> lo{0.0, 1.0}, hi{2.0, 1.5};
  for (int t = 0; t < 500; ++t) {
    auto g = nonuniform_mutation({1.0, 1.2}, lo, hi, t % 20, 20, 2.0, 1.0, rng);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(g[i] >= lo[i]);
      CHECK(g[i] <= hi[i]);
    }
  }
  CHECK(nonuniform_mutation({1.0, 1.2}, lo, hi, 0, 20, 2.0, 0.0, rng) ==
        std::vector<double>{1.0, 1.2});
}

TEST_CASE("elitism cascade") {
  using S = Slot;
  CHECK(elitism_replace({5, 6}, {1, 2}) == std::array{S::parent1, S::parent2});
  CHECK(elitism_replace({1, 1}, {10, 10}) == std::array{S::offspring1, S::offspring2});
  // Offspring 1 takes slot 1, then offspring 2 beats that slot but not parent 2.
  CHECK(elitism_replace({1, 5}, {3, 4}) == std::array{S::offspring2, S::parent2});
  // Offspring 1 loses to parent 1 but beats parent 2.
  CHECK(elitism_replace({5, 1}, {3, 0}) == std::array{S::parent1, S::offspring1});
  CHECK(elitism_replace({2, 2}, {2, 2}) == std::array{S::parent1, S::parent2});
}

TEST_CASE("config validation") {
  GaConfig c;
  CHECK_NOTHROW(c.validate());
  c.popsize = 7;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.crossover_rate = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.mutation_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.runs = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("evaluator parallel and serial paths agree") {
  auto d = generate_synthetic(preset("thyroid5"));
  auto cfg = small_config();
  cfg.popsize = 40;
  Rng rng(12);
  std::vector<Individual> a, b;
  for (auto& c : init_population(feature_bounds(d), cfg, rng)) {
    Individual ind;
    ind.params = decode(c, Variant::enhanced);
    ind.chromosome = c;
    a.push_back(ind);
    b.push_back(ind);
  }
  a.push_back(a.front());  // duplicate exercises the cache
  b.push_back(b.front());
  Evaluator pe(d, Variant::enhanced, cfg), se(d, Variant::enhanced, cfg);
  pe.evaluate(a);
  se.evaluate_serial(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].fitness() == b[i].fitness());
    CHECK(a[i].report.cs == b[i].report.cs);
    CHECK(a[i].report.clusters == b[i].report.clusters);
    CHECK(a[i].epochs == b[i].epochs);
  }
  CHECK(pe.evaluations() == se.evaluations());
  CHECK(pe.cache_hits() >= 1);
}

TEST_CASE("evolve invariants") {
  auto d = generate_synthetic(preset("thyroid5"));
  auto cfg = small_config();
  auto range = tolerance_ranges(feature_bounds(d));
  int observed = 0;
  auto check = [&](int, int, std::span<const Individual> pop) {
    ++observed;
    CHECK(pop.size() == cfg.popsize);
    for (const auto& ind : pop) {
      const auto& c = ind.chromosome;
      CHECK(c.length() == 2 * d.dims() + 1);
      CHECK(c.vigilance == vigilance_from_control(c.control));
      CHECK(c.vigilance > 0.0);
      CHECK(ind.params.vigilance == c.vigilance);
      CHECK(ind.params.tolerances == c.coefficients);
      for (std::size_t f = 0; f < d.dims(); ++f) {
        CHECK(c.coefficients[f] >= range.lower[f]);
        CHECK(c.coefficients[f] <= range.upper[f]);
      }
      if (!ind.report.degenerate)
        CHECK(ind.fitness() == doctest::Approx(fitness(ind.report.cs, *ind.report.error_rate)));
      else
        CHECK(ind.fitness() == 0.0);
    }
  };
  auto res = evolve(d, cfg, Variant::enhanced, check);
  CHECK(observed == cfg.runs * (cfg.generations + 1));
  REQUIRE(res.runs.size() == 2);
  for (const auto& h : res.runs) {
    REQUIRE(h.best_fitness.size() == static_cast<std::size_t>(cfg.generations + 1));
    for (std::size_t g = 1; g < h.best_fitness.size(); ++g)
      CHECK(h.best_fitness[g] >= h.best_fitness[g - 1]);
    CHECK(h.best.fitness() == h.best_fitness.back());
    CHECK_FALSE(better(h.best, res.best));
  }
  CHECK(res.best_outcome.clusters() == res.best.report.clusters);
}

TEST_CASE("evolve is deterministic") {
  auto d = generate_synthetic(preset("syndata2"));
  GaConfig cfg;
  cfg.popsize = 2;
  cfg.generations = 1;
  cfg.runs = 1;
  cfg.seed = 99;
  auto a = evolve(d, cfg, Variant::original);
  auto b = evolve(d, cfg, Variant::original);
  CHECK(a.best.chromosome.control == b.best.chromosome.control);
  CHECK(a.best.chromosome.coefficients == b.best.chromosome.coefficients);
  CHECK(a.best.fitness() == b.best.fitness());
  CHECK(a.best_outcome.assignments == b.best_outcome.assignments);
}

TEST_CASE("evolve direct vigilance mode keeps the grid") {
  auto d = generate_synthetic(preset("thyroid5"));
  auto cfg = small_config();
  cfg.cong_mode = false;
  auto res = evolve(d, cfg, Variant::enhanced, [&](int, int, std::span<const Individual> pop) {
    for (const auto& ind : pop) CHECK(ind.chromosome.vigilance == snap_vigilance(ind.chromosome.vigilance, d.dims()));
  });
  CHECK(res.best.params.vigilance > 0.0);
}

TEST_CASE("evolve finds the separated clusters") {
  auto d = generate_synthetic(preset("syndata1"));
  GaConfig cfg;
  cfg.runs = 2;
  cfg.seed = 3;
  auto res = evolve(d, cfg, Variant::enhanced);
  CHECK(res.best.report.clusters == 2);
  CHECK(*res.best.report.error_rate == 0.0);
}

TEST_CASE("evolve on iris") {
  auto d = load_csv(KFLANN_DATA_DIR "/iris.csv", true);
  GaConfig cfg;
  cfg.runs = 3;
  cfg.seed = 5;
  auto res = evolve(d, cfg, Variant::enhanced);
  CHECK(res.best.report.clusters == 3);
  CHECK(*res.best.report.error_rate <= 10.0);
}

TEST_CASE("evolve input checks") {
  Dataset unlabeled("u", 1, {1, 2, 3, 4});
  CHECK_THROWS_AS(evolve(unlabeled, small_config(), Variant::enhanced), std::invalid_argument);
  auto cfg = small_config();
  cfg.unsupervised = true;
  CHECK_NOTHROW(evolve(unlabeled, cfg, Variant::enhanced));
}
