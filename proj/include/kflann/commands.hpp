#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kflann/dataset.hpp"
#include "kflann/ga.hpp"

namespace kflann {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

// A CSV path, or a preset name when no such file exists.
Dataset load_dataset(const std::string& source, bool has_labels = true);

struct ClusterArgs {
  std::string data;
  bool has_labels = true;
  double rho = 1.0;
  std::vector<double> tolerances;
  Variant variant = Variant::enhanced;
  std::optional<std::uint64_t> seed;  // shuffles the initial presentation order
  int max_epochs = 50;
  std::filesystem::path out;          // JSON result; empty skips the file
};

struct SearchArgs {
  std::string data;
  bool has_labels = true;
  std::string variant = "enhanced";  // original, enhanced or both
  GaConfig config;
  int threads = 0;  // 0 keeps the OpenMP default
  std::filesystem::path out = ".";
};

struct GenerateArgs {
  std::string preset;
  std::filesystem::path spec;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

struct DistancesArgs {
  std::string data;
  bool has_labels = true;
  std::filesystem::path out;
};

// Throw DataError / std::invalid_argument on bad input.
int cmd_cluster(const ClusterArgs& args, std::ostream& out);
int cmd_search(const SearchArgs& args, std::ostream& out);
int cmd_generate(const GenerateArgs& args, std::ostream& out);
int cmd_distances(const DistancesArgs& args, std::ostream& out);

std::string cluster_json(const Dataset& dataset, const KflannParams& params,
                         const ClusteringOutcome& outcome, const ValidityReport& report);

// Parses argv (without the program name) and dispatches; errors go to err
// and map onto the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kflann
