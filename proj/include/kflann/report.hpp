#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kflann/ga.hpp"

namespace kflann {

struct RunRecord {
  int run = 0;
  double vigilance = 0.0;
  std::vector<double> tolerances;
  std::size_t clusters = 0;
  std::optional<double> error_rate;
  double cs = 0.0;
  double fitness = 0.0;
  int epochs = 0;
  bool converged = false;
  bool degenerate = false;
};

// Column means over the per-run records.
struct AggregateRow {
  double vigilance = 0.0;
  std::vector<double> tolerances;
  std::optional<double> error_rate;
  double clusters = 0.0;
};

struct RunReport {
  std::string dataset;
  Variant variant = Variant::enhanced;
  std::vector<RunRecord> records;

  AggregateRow aggregate() const;
  // Best record (fitness, then error, then K) among those with the largest vigilance.
  const RunRecord& max_vigilance() const;
};

RunRecord to_record(int run, const Individual& best);
RunReport make_report(const std::string& dataset, Variant variant, const EvolveResult& result);

// Reals are written in shortest round-trip form so reports are byte-stable.
std::string format_real(double v);

void write_runs_csv(std::ostream& out, const RunReport& report);
// Two rows, "mean" and "max_vigilance", with the runs CSV columns.
void write_table_csv(std::ostream& out, const RunReport& report);
std::string summary_json(const RunReport& report, const GaConfig& config);
// Side-by-side rows per variant: mean K/error/vigilance/tolerances and the
// max-vigilance best.
void write_comparison_csv(std::ostream& out, const std::vector<RunReport>& reports);

// key=value lines named after GaConfig fields; '#' starts a comment.
GaConfig parse_ga_config(std::istream& in, GaConfig base = {});

}  // namespace kflann
