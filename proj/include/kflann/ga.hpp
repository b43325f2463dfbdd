#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "kflann/dataset.hpp"
#include "kflann/network.hpp"
#include "kflann/validity.hpp"

namespace kflann {

using Rng = std::mt19937_64;
using Bits = std::vector<std::uint8_t>;

// Solution vector: control bits (d), per-feature tolerances (d), vigilance.
struct Chromosome {
  Bits control;
  std::vector<double> coefficients;
  double vigilance = 1.0;

  std::size_t dims() const { return coefficients.size(); }
  std::size_t length() const { return control.size() + coefficients.size() + 1; }
};

double vigilance_from_control(std::span<const std::uint8_t> bits);
// Nearest point of {1/d, ..., d/d}.
double snap_vigilance(double v, std::size_t dims);

// Tolerance genes live in [mindist, maxdist / 2]. A feature whose mindist
// exceeds maxdist / 2 collapses to the single point mindist.
struct GeneRange {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> collapsed;
};
GeneRange tolerance_ranges(const FeatureBounds& bounds);

struct GaConfig {
  std::size_t popsize = 90;
  int generations = 20;  // per run (MAXITER)
  int runs = 100;        // independent restarts (MAXGEN)
  double crossover_rate = 0.7;
  double mutation_prob = 0.05;
  double arithmetic_weight = 0.7;
  double mutation_shape = 2.0;
  std::uint64_t seed = 1;
  bool cong_mode = true;  // vigilance from control bits; otherwise a real gene
  bool unsupervised = false;
  ErrorMapping error_mapping = ErrorMapping::one_to_one;
  // Partitions with more clusters score 0. 0 selects floor(sqrt(n)); use
  // SIZE_MAX to disable.
  std::size_t max_clusters = 0;
  int max_epochs = 50;

  void validate() const;
};

std::vector<Chromosome> init_population(const FeatureBounds& bounds, const GaConfig& config,
                                        Rng& rng);

KflannParams decode(const Chromosome& c, Variant variant, int max_epochs = 50);
// Canonical encoding: the vigilance is snapped to the grid and its 1-bits
// fill the front of the control gene.
Chromosome encode(const KflannParams& params);

// First index whose cumulative probability exceeds r.
std::size_t roulette_pick(std::span<const double> cumulative, double r);
std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t n, Rng& rng);

inline constexpr double kCrossoverMask = 0.5;

// Position i takes parent 2's bit when draws[i] < mask; the sibling takes the other.
std::pair<Bits, Bits> uniform_crossover(const Bits& p1, const Bits& p2,
                                        std::span<const double> draws);
std::pair<Bits, Bits> uniform_crossover(const Bits& p1, const Bits& p2, Rng& rng);

std::pair<std::vector<double>, std::vector<double>> arithmetic_crossover(
    std::span<const double> p1, std::span<const double> p2, double a);

// With probability mu flips one random bit; an all-zero result is flipped back.
Bits normal_mutation(Bits bits, double mu, Rng& rng);

// x + r (u - x) (1 - G/MAXG)^b upward, x - r (x - l) (1 - G/MAXG)^b downward.
double nonuniform_step(double x, double lower, double upper, double r, bool upward, int generation,
                       int max_generation, double shape);

std::vector<double> nonuniform_mutation(std::vector<double> genes, std::span<const double> lower,
                                        std::span<const double> upper, int generation,
                                        int max_generation, double shape, double mu, Rng& rng);

enum class Slot { parent1, parent2, offspring1, offspring2 };

// Survivor cascade: offspring 1 replaces parent 1 if fitter, else parent 2 if
// fitter; then offspring 2 against the current second slot, else the first.
std::array<Slot, 2> elitism_replace(std::array<double, 2> parents, std::array<double, 2> offspring);

struct Individual {
  Chromosome chromosome;
  KflannParams params;
  ValidityReport report;
  int epochs = 0;
  bool converged = false;

  double fitness() const { return report.fitness; }
};

// Higher fitness, then lower error rate, then fewer clusters.
bool better(const Individual& a, const Individual& b);

// Runs K-FLANN plus validity for batches of chromosomes. Results are cached
// by (vigilance, tolerances).
class Evaluator {
 public:
  Evaluator(const Dataset& dataset, Variant variant, const GaConfig& config);

  void evaluate(std::span<Individual> batch);         // OpenMP over distinct parameter sets
  void evaluate_serial(std::span<Individual> batch);  // reference path
  void clear_cache() { cache_.clear(); }

  std::size_t evaluations() const { return evaluations_; }
  std::size_t cache_hits() const { return cache_hits_; }
  const DistanceMatrix& distances() const { return distances_; }

 private:
  struct Result {
    ValidityReport report;
    int epochs = 0;
    bool converged = false;
  };
  Result run(const KflannParams& params) const;
  void evaluate_impl(std::span<Individual> batch, bool parallel);

  const Dataset& dataset_;
  Variant variant_;
  GaConfig config_;
  EvaluationOptions options_;
  DistanceMatrix distances_;
  std::map<std::vector<double>, Result> cache_;
  std::size_t evaluations_ = 0;
  std::size_t cache_hits_ = 0;
};

struct RunHistory {
  int run = 0;
  Individual best;
  std::vector<double> best_fitness;  // population best; index 0 is the initial population
};

struct EvolveResult {
  Individual best;
  ClusteringOutcome best_outcome;
  std::vector<RunHistory> runs;
  std::size_t evaluations = 0;
  std::size_t cache_hits = 0;
};

using GenerationObserver =
    std::function<void(int run, int generation, std::span<const Individual> population)>;

// Independent runs, each seeded from (config.seed, run index).
EvolveResult evolve(const Dataset& dataset, const GaConfig& config, Variant variant,
                    const GenerationObserver& observer = {});

}  // namespace kflann
