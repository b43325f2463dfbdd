#include "kflann/ga.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kflann {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool all_zero(std::span<const std::uint8_t> bits) {
  return std::none_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

Bits canonical_control(double vigilance, std::size_t dims) {
  auto ones = static_cast<std::size_t>(std::lround(vigilance * static_cast<double>(dims)));
  Bits bits(dims, 0);
  for (std::size_t i = 0; i < ones && i < dims; ++i) bits[i] = 1;
  return bits;
}

}  // namespace

double vigilance_from_control(std::span<const std::uint8_t> bits) {
  if (bits.empty()) throw std::invalid_argument("empty control gene");
  auto ones = std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
  return static_cast<double>(ones) / static_cast<double>(bits.size());
}

double snap_vigilance(double v, std::size_t dims) {
  const auto d = static_cast<double>(dims);
  double k = std::clamp(std::round(v * d), 1.0, d);
  return k / d;
}

GeneRange tolerance_ranges(const FeatureBounds& bounds) {
  GeneRange range;
  for (std::size_t f = 0; f < bounds.dims(); ++f) {
    double lo = bounds.mindist[f];
    double hi = bounds.maxdist[f] / 2.0;
    if (lo > hi) {
      range.collapsed.push_back(f);
      hi = lo;
    }
    range.lower.push_back(lo);
    range.upper.push_back(hi);
  }
  return range;
}

void GaConfig::validate() const {
  if (popsize < 2 || popsize % 2 != 0)
    throw std::invalid_argument("popsize must be even and >= 2");
  if (generations < 1 || runs < 1 || max_epochs < 1)
    throw std::invalid_argument("generations, runs and max_epochs must be >= 1");
  if (!(crossover_rate > 0.0 && crossover_rate <= 1.0))
    throw std::invalid_argument("crossover rate must lie in (0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw std::invalid_argument("mutation probability must lie in [0, 1]");
  if (!(arithmetic_weight >= 0.0 && arithmetic_weight <= 1.0))
    throw std::invalid_argument("arithmetic weight must lie in [0, 1]");
  if (!(mutation_shape >= 0.0)) throw std::invalid_argument("mutation shape must be >= 0");
}

std::vector<Chromosome> init_population(const FeatureBounds& bounds, const GaConfig& config,
                                        Rng& rng) {
  const auto d = bounds.dims();
  if (d == 0) throw std::invalid_argument("init_population: zero-dimensional bounds");
  if (config.popsize < 2) throw std::invalid_argument("init_population: popsize must be >= 2");
  auto range = tolerance_ranges(bounds);
  for (auto f : range.collapsed)
    std::cerr << "warning: feature " << f << " has mindist > maxdist/2; tolerance fixed at "
              << range.lower[f] << '\n';

  std::vector<Chromosome> population(config.popsize);
  for (auto& c : population) {
    c.control.assign(d, 0);
    do {
      for (auto& b : c.control) b = static_cast<std::uint8_t>(uniform_index(rng, 2));
    } while (all_zero(c.control));
    c.coefficients.resize(d);
    for (std::size_t f = 0; f < d; ++f)
      c.coefficients[f] =
          range.lower[f] + uniform01(rng) * (range.upper[f] - range.lower[f]);
    if (config.cong_mode) {
      c.vigilance = vigilance_from_control(c.control);
    } else {
      // (0, 1] onto the grid with equal mass per grid point.
      double v = 1.0 - uniform01(rng);
      double k = std::clamp(std::ceil(v * static_cast<double>(d)), 1.0, static_cast<double>(d));
      c.vigilance = k / static_cast<double>(d);
      c.control = canonical_control(c.vigilance, d);
    }
  }
  return population;
}

KflannParams decode(const Chromosome& c, Variant variant, int max_epochs) {
  if (!(c.vigilance > 0.0)) throw std::invalid_argument("decode: vigilance slot is zero");
  KflannParams p;
  p.vigilance = c.vigilance;
  p.tolerances = c.coefficients;
  p.variant = variant;
  p.max_epochs = max_epochs;
  return p;
}

Chromosome encode(const KflannParams& params) {
  const auto d = params.tolerances.size();
  if (d == 0) throw std::invalid_argument("encode: no tolerances");
  Chromosome c;
  c.vigilance = snap_vigilance(params.vigilance, d);
  c.control = canonical_control(c.vigilance, d);
  c.coefficients = params.tolerances;
  return c;
}

std::size_t roulette_pick(std::span<const double> cumulative, double r) {
  if (cumulative.empty()) throw std::invalid_argument("roulette over an empty population");
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  if (it != cumulative.end()) return static_cast<std::size_t>(it - cumulative.begin());
  // r beyond a rounded-down total: last member with non-zero probability.
  std::size_t i = cumulative.size() - 1;
  while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
  return i;
}

std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t n,
                                         Rng& rng) {
  if (fitnesses.empty()) throw std::invalid_argument("roulette over an empty population");
  double total = 0.0;
  for (double f : fitnesses) {
    if (!(f >= 0.0) || !std::isfinite(f))
      throw std::invalid_argument("roulette fitness must be finite and non-negative");
    total += f;
  }
  std::vector<std::size_t> picks(n);
  if (total <= 0.0) {
    std::cerr << "warning: all fitnesses are zero; selecting uniformly\n";
    for (auto& p : picks) p = uniform_index(rng, fitnesses.size());
    return picks;
  }
  std::vector<double> cumulative(fitnesses.size());
  double running = 0.0;
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    running += fitnesses[i] / total;
    cumulative[i] = running;
  }
  for (auto& p : picks) p = roulette_pick(cumulative, uniform01(rng));
  return picks;
}

std::pair<Bits, Bits> uniform_crossover(const Bits& p1, const Bits& p2,
                                        std::span<const double> draws) {
  if (p1.size() != p2.size()) throw std::invalid_argument("uniform_crossover: length mismatch");
  if (draws.size() < p1.size()) throw std::invalid_argument("uniform_crossover: too few draws");
  Bits o1(p1.size()), o2(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    bool swap = draws[i] < kCrossoverMask;
    o1[i] = swap ? p2[i] : p1[i];
    o2[i] = swap ? p1[i] : p2[i];
  }
  return {std::move(o1), std::move(o2)};
}

std::pair<Bits, Bits> uniform_crossover(const Bits& p1, const Bits& p2, Rng& rng) {
  std::vector<double> draws(p1.size());
  for (auto& d : draws) d = uniform01(rng);
  return uniform_crossover(p1, p2, draws);
}

std::pair<std::vector<double>, std::vector<double>> arithmetic_crossover(
    std::span<const double> p1, std::span<const double> p2, double a) {
  if (p1.size() != p2.size())
    throw std::invalid_argument("arithmetic_crossover: length mismatch");
  if (!(a >= 0.0 && a <= 1.0))
    throw std::invalid_argument("arithmetic_crossover: weight outside [0, 1]");
  std::vector<double> o1(p1.size()), o2(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    o1[i] = a * p1[i] + (1.0 - a) * p2[i];
    o2[i] = (1.0 - a) * p1[i] + a * p2[i];
  }
  return {std::move(o1), std::move(o2)};
}

Bits normal_mutation(Bits bits, double mu, Rng& rng) {
  if (bits.empty()) return bits;
  if (uniform01(rng) < mu) {
    auto b = uniform_index(rng, bits.size());
    bits[b] = bits[b] ? 0 : 1;
    if (all_zero(bits)) bits[b] = 1;
  }
  return bits;
}

double nonuniform_step(double x, double lower, double upper, double r, bool upward, int generation,
                       int max_generation, double shape) {
  if (max_generation < 1 || generation < 0 || generation > max_generation)
    throw std::invalid_argument("nonuniform_step: generation outside [0, MAXG]");
  double decay = std::pow(1.0 - static_cast<double>(generation) / max_generation, shape);
  double y = upward ? x + r * (upper - x) * decay : x - r * (x - lower) * decay;
  return std::clamp(y, lower, upper);
}

std::vector<double> nonuniform_mutation(std::vector<double> genes, std::span<const double> lower,
                                        std::span<const double> upper, int generation,
                                        int max_generation, double shape, double mu, Rng& rng) {
  if (lower.size() != genes.size() || upper.size() != genes.size())
    throw std::invalid_argument("nonuniform_mutation: bounds length mismatch");
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (!(uniform01(rng) < mu)) continue;
    bool upward = uniform01(rng) < 0.5;
    double r = uniform01(rng);
    genes[i] = nonuniform_step(genes[i], lower[i], upper[i], r, upward, generation, max_generation,
                               shape);
  }
  return genes;
}

std::array<Slot, 2> elitism_replace(std::array<double, 2> parents, std::array<double, 2> offspring) {
  std::array<Slot, 2> slots{Slot::parent1, Slot::parent2};
  std::array<double, 2> fit = parents;
  if (offspring[0] > fit[0]) {
    slots[0] = Slot::offspring1;
    fit[0] = offspring[0];
  } else if (offspring[0] > fit[1]) {
    slots[1] = Slot::offspring1;
    fit[1] = offspring[0];
  }
  if (offspring[1] > fit[1]) {
    slots[1] = Slot::offspring2;
  } else if (offspring[1] > fit[0]) {
    slots[0] = Slot::offspring2;
  }
  return slots;
}

bool better(const Individual& a, const Individual& b) {
  if (a.fitness() != b.fitness()) return a.fitness() > b.fitness();
  double ea = a.report.error_rate.value_or(0.0);
  double eb = b.report.error_rate.value_or(0.0);
  if (ea != eb) return ea < eb;
  return a.report.clusters < b.report.clusters;
}

Evaluator::Evaluator(const Dataset& dataset, Variant variant, const GaConfig& config)
    : dataset_(dataset), variant_(variant), config_(config), distances_(distance_matrix(dataset)) {
  options_.unsupervised = config.unsupervised;
  options_.mapping = config.error_mapping;
  options_.max_clusters =
      config.max_clusters == 0 ? default_max_clusters(dataset.size()) : config.max_clusters;
}

Evaluator::Result Evaluator::run(const KflannParams& params) const {
  Result r;
  try {
    auto outcome = cluster(dataset_, params);
    r.report = kflann::evaluate(dataset_, outcome, options_, &distances_);
    r.epochs = outcome.epochs;
    r.converged = outcome.converged;
  } catch (const std::exception&) {
    r.report = ValidityReport{};
    r.report.degenerate = true;
  }
  return r;
}

void Evaluator::evaluate_impl(std::span<Individual> batch, bool parallel) {
  auto key_of = [](const KflannParams& p) {
    std::vector<double> key{p.vigilance};
    key.insert(key.end(), p.tolerances.begin(), p.tolerances.end());
    return key;
  };

  std::vector<std::vector<double>> pending;
  std::vector<const KflannParams*> pending_params;
  for (auto& ind : batch) {
    ind.params = decode(ind.chromosome, variant_, config_.max_epochs);
    auto key = key_of(ind.params);
    if (cache_.count(key)) {
      ++cache_hits_;
      continue;
    }
    if (std::find(pending.begin(), pending.end(), key) != pending.end()) {
      ++cache_hits_;
      continue;
    }
    pending.push_back(std::move(key));
    pending_params.push_back(&ind.params);
  }

  std::vector<Result> results(pending.size());
  const auto count = static_cast<std::ptrdiff_t>(pending.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) results[i] = run(*pending_params[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) results[i] = run(*pending_params[i]);
  }
  evaluations_ += pending.size();
  for (std::size_t i = 0; i < pending.size(); ++i)
    cache_.emplace(std::move(pending[i]), results[i]);

  for (auto& ind : batch) {
    const auto& r = cache_.at(key_of(ind.params));
    ind.report = r.report;
    ind.epochs = r.epochs;
    ind.converged = r.converged;
  }
}

void Evaluator::evaluate(std::span<Individual> batch) { evaluate_impl(batch, true); }
void Evaluator::evaluate_serial(std::span<Individual> batch) { evaluate_impl(batch, false); }

namespace {

const Individual& best_of(std::span<const Individual> population) {
  const Individual* best = &population.front();
  for (const auto& ind : population)
    if (better(ind, *best)) best = &ind;
  return *best;
}

// Crossover can leave the control gene all zero (1000 x 0100); one random bit
// is switched back on so the vigilance stays positive.
void sync_vigilance(Chromosome& c, bool cong_mode, Rng& rng) {
  if (cong_mode && all_zero(c.control)) c.control[uniform_index(rng, c.control.size())] = 1;
  if (cong_mode) c.vigilance = vigilance_from_control(c.control);
  else c.control = canonical_control(c.vigilance, c.dims());
}

}  // namespace

EvolveResult evolve(const Dataset& dataset, const GaConfig& config, Variant variant,
                    const GenerationObserver& observer) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("evolve: empty dataset");
  if (!config.unsupervised && !dataset.has_labels())
    throw std::invalid_argument("evolve: supervised fitness needs class labels");

  const auto d = dataset.dims();
  const auto bounds = feature_bounds(dataset);
  const auto range = tolerance_ranges(bounds);
  const std::vector<double> vig_lower(1, 1.0 / static_cast<double>(d));
  const std::vector<double> vig_upper(1, 1.0);

  Evaluator evaluator(dataset, variant, config);
  EvolveResult result;

  for (int run = 0; run < config.runs; ++run) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(run)};
    Rng rng(seq);
    evaluator.clear_cache();

    std::vector<Individual> population;
    for (auto& c : init_population(bounds, config, rng)) population.emplace_back().chromosome = std::move(c);
    evaluator.evaluate(population);

    RunHistory history;
    history.run = run;
    Individual elite = best_of(population);
    history.best_fitness.push_back(elite.fitness());
    if (observer) observer(run, 0, population);

    for (int g = 0; g < config.generations; ++g) {
      std::vector<double> fits;
      fits.reserve(population.size());
      for (const auto& ind : population) fits.push_back(ind.fitness());
      auto picks = roulette_select(fits, population.size(), rng);

      std::vector<Individual> parents;
      std::vector<Individual> children;
      parents.reserve(picks.size());
      children.reserve(picks.size());
      for (std::size_t k = 0; k + 1 < picks.size(); k += 2) {
        const auto& p1 = population[picks[k]];
        const auto& p2 = population[picks[k + 1]];
        Chromosome c1 = p1.chromosome;
        Chromosome c2 = p2.chromosome;
        if (uniform01(rng) < config.crossover_rate) {
          std::tie(c1.control, c2.control) = uniform_crossover(c1.control, c2.control, rng);
          std::tie(c1.coefficients, c2.coefficients) = arithmetic_crossover(
              p1.chromosome.coefficients, p2.chromosome.coefficients, config.arithmetic_weight);
          if (!config.cong_mode) {
            auto [v1, v2] = arithmetic_crossover(std::span(&p1.chromosome.vigilance, 1),
                                                 std::span(&p2.chromosome.vigilance, 1),
                                                 config.arithmetic_weight);
            c1.vigilance = snap_vigilance(v1[0], d);
            c2.vigilance = snap_vigilance(v2[0], d);
          }
        }
        for (auto* c : {&c1, &c2}) {
          if (config.cong_mode) c->control = normal_mutation(c->control, config.mutation_prob, rng);
          c->coefficients = nonuniform_mutation(c->coefficients, range.lower, range.upper, g,
                                                config.generations, config.mutation_shape,
                                                config.mutation_prob, rng);
          if (!config.cong_mode) {
            auto v = nonuniform_mutation({c->vigilance}, vig_lower, vig_upper, g,
                                         config.generations, config.mutation_shape,
                                         config.mutation_prob, rng);
            c->vigilance = snap_vigilance(v[0], d);
          }
          sync_vigilance(*c, config.cong_mode, rng);
        }
        parents.push_back(p1);
        parents.push_back(p2);
        children.emplace_back().chromosome = std::move(c1);
        children.emplace_back().chromosome = std::move(c2);
      }
      evaluator.evaluate(children);

      std::vector<Individual> next;
      next.reserve(population.size());
      for (std::size_t k = 0; k + 1 < parents.size(); k += 2) {
        auto slots = elitism_replace({parents[k].fitness(), parents[k + 1].fitness()},
                                     {children[k].fitness(), children[k + 1].fitness()});
        for (auto s : slots) {
          switch (s) {
            case Slot::parent1: next.push_back(parents[k]); break;
            case Slot::parent2: next.push_back(parents[k + 1]); break;
            case Slot::offspring1: next.push_back(children[k]); break;
            case Slot::offspring2: next.push_back(children[k + 1]); break;
          }
        }
      }
      population = std::move(next);

      // Carry the best chromosome forward if selection dropped it.
      if (better(elite, best_of(population))) {
        auto worst = std::min_element(population.begin(), population.end(),
                                      [](const Individual& a, const Individual& b) {
                                        return better(b, a);
                                      });
        *worst = elite;
      }
      elite = best_of(population);
      history.best_fitness.push_back(elite.fitness());
      if (observer) observer(run, g + 1, population);
    }

    history.best = elite;
    if (run == 0 || better(elite, result.best)) result.best = elite;
    result.runs.push_back(std::move(history));
  }

  result.best_outcome = cluster(dataset, result.best.params);
  result.evaluations = evaluator.evaluations();
  result.cache_hits = evaluator.cache_hits();
  return result;
}

}  // namespace kflann
