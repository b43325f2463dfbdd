#include "kflann/report.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace kflann {

namespace {

bool record_better(const RunRecord& a, const RunRecord& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  double ea = a.error_rate.value_or(0.0), eb = b.error_rate.value_or(0.0);
  if (ea != eb) return ea < eb;
  return a.clusters < b.clusters;
}

void write_header(std::ostream& out, const std::string& first, std::size_t dims) {
  out << first << ",vigilance";
  for (std::size_t f = 0; f < dims; ++f) out << ",tol" << f + 1;
  out << ",clusters,error_rate,cs,fitness,epochs,converged,degenerate\n";
}

void write_record(std::ostream& out, const std::string& first, const RunRecord& r) {
  out << first << ',' << format_real(r.vigilance);
  for (double t : r.tolerances) out << ',' << format_real(t);
  out << ',' << r.clusters << ',' << (r.error_rate ? format_real(*r.error_rate) : "") << ','
      << format_real(r.cs) << ',' << format_real(r.fitness) << ',' << r.epochs << ','
      << (r.converged ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << '\n';
}

nlohmann::json record_json(const RunRecord& r) {
  nlohmann::json j = {{"run", r.run},
                      {"vigilance", r.vigilance},
                      {"tolerances", r.tolerances},
                      {"clusters", r.clusters},
                      {"cs", r.cs},
                      {"fitness", r.fitness},
                      {"epochs", r.epochs},
                      {"converged", r.converged},
                      {"degenerate", r.degenerate}};
  j["error_rate"] = r.error_rate ? nlohmann::json(*r.error_rate) : nlohmann::json(nullptr);
  return j;
}

std::size_t report_dims(const RunReport& report) {
  return report.records.empty() ? 0 : report.records.front().tolerances.size();
}

}  // namespace

AggregateRow RunReport::aggregate() const {
  if (records.empty()) throw std::logic_error("report has no records");
  AggregateRow row;
  const double n = static_cast<double>(records.size());
  row.tolerances.assign(records.front().tolerances.size(), 0.0);
  double err = 0.0;
  bool have_err = true;
  for (const auto& r : records) {
    row.vigilance += r.vigilance;
    for (std::size_t f = 0; f < r.tolerances.size(); ++f) row.tolerances[f] += r.tolerances[f];
    row.clusters += static_cast<double>(r.clusters);
    if (r.error_rate)
      err += *r.error_rate;
    else
      have_err = false;
  }
  row.vigilance /= n;
  for (double& t : row.tolerances) t /= n;
  row.clusters /= n;
  if (have_err) row.error_rate = err / n;
  return row;
}

const RunRecord& RunReport::max_vigilance() const {
  if (records.empty()) throw std::logic_error("report has no records");
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) top = std::max(top, r.vigilance);
  const RunRecord* best = nullptr;
  for (const auto& r : records)
    if (r.vigilance == top && (!best || record_better(r, *best))) best = &r;
  return *best;
}

RunRecord to_record(int run, const Individual& best) {
  RunRecord r;
  r.run = run;
  r.vigilance = best.params.vigilance;
  r.tolerances = best.params.tolerances;
  r.clusters = best.report.clusters;
  r.error_rate = best.report.error_rate;
  r.cs = best.report.cs;
  r.fitness = best.report.fitness;
  r.epochs = best.epochs;
  r.converged = best.converged;
  r.degenerate = best.report.degenerate;
  return r;
}

RunReport make_report(const std::string& dataset, Variant variant, const EvolveResult& result) {
  RunReport report;
  report.dataset = dataset;
  report.variant = variant;
  for (const auto& h : result.runs) report.records.push_back(to_record(h.run, h.best));
  return report;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_real failed");
  return std::string(buf, end);
}

void write_runs_csv(std::ostream& out, const RunReport& report) {
  write_header(out, "run", report_dims(report));
  for (const auto& r : report.records) write_record(out, std::to_string(r.run), r);
}

void write_table_csv(std::ostream& out, const RunReport& report) {
  const auto dims = report_dims(report);
  out << "row,vigilance";
  for (std::size_t f = 0; f < dims; ++f) out << ",tol" << f + 1;
  out << ",clusters,error_rate\n";
  const auto mean = report.aggregate();
  out << "mean," << format_real(mean.vigilance);
  for (double t : mean.tolerances) out << ',' << format_real(t);
  out << ',' << format_real(mean.clusters) << ','
      << (mean.error_rate ? format_real(*mean.error_rate) : "") << '\n';
  const auto& top = report.max_vigilance();
  out << "max_vigilance," << format_real(top.vigilance);
  for (double t : top.tolerances) out << ',' << format_real(t);
  out << ',' << top.clusters << ',' << (top.error_rate ? format_real(*top.error_rate) : "")
      << '\n';
}

std::string summary_json(const RunReport& report, const GaConfig& config) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["variant"] = to_string(report.variant);
  j["config"] = {{"popsize", config.popsize},
                 {"generations", config.generations},
                 {"runs", config.runs},
                 {"crossover_rate", config.crossover_rate},
                 {"mutation_prob", config.mutation_prob},
                 {"arithmetic_weight", config.arithmetic_weight},
                 {"mutation_shape", config.mutation_shape},
                 {"seed", config.seed},
                 {"cong_mode", config.cong_mode},
                 {"unsupervised", config.unsupervised},
                 {"error_mapping", to_string(config.error_mapping)},
                 {"max_clusters", config.max_clusters},
                 {"max_epochs", config.max_epochs}};
  auto runs = nlohmann::json::array();
  for (const auto& r : report.records) runs.push_back(record_json(r));
  j["runs"] = std::move(runs);
  if (!report.records.empty()) {
    const auto mean = report.aggregate();
    j["mean"] = {{"vigilance", mean.vigilance},
                 {"tolerances", mean.tolerances},
                 {"clusters", mean.clusters}};
    j["mean"]["error_rate"] =
        mean.error_rate ? nlohmann::json(*mean.error_rate) : nlohmann::json(nullptr);
    j["max_vigilance"] = record_json(report.max_vigilance());
  }
  return j.dump(2) + "\n";
}

void write_comparison_csv(std::ostream& out, const std::vector<RunReport>& reports) {
  std::size_t dims = 0;
  for (const auto& r : reports) dims = std::max(dims, report_dims(r));
  out << "variant,row,vigilance";
  for (std::size_t f = 0; f < dims; ++f) out << ",tol" << f + 1;
  out << ",clusters,error_rate\n";
  for (const auto& rep : reports) {
    const auto v = to_string(rep.variant);
    const auto mean = rep.aggregate();
    out << v << ",mean," << format_real(mean.vigilance);
    for (double t : mean.tolerances) out << ',' << format_real(t);
    out << ',' << format_real(mean.clusters) << ','
        << (mean.error_rate ? format_real(*mean.error_rate) : "") << '\n';
    const auto& top = rep.max_vigilance();
    out << v << ",max_vigilance," << format_real(top.vigilance);
    for (double t : top.tolerances) out << ',' << format_real(t);
    out << ',' << top.clusters << ',' << (top.error_rate ? format_real(*top.error_rate) : "")
        << '\n';
  }
}

namespace {

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

GaConfig parse_ga_config(std::istream& in, GaConfig c) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "popsize")
      c.popsize = parse_number<std::size_t>(key, value);
    else if (key == "generations")
      c.generations = parse_number<int>(key, value);
    else if (key == "runs")
      c.runs = parse_number<int>(key, value);
    else if (key == "crossover_rate")
      c.crossover_rate = parse_number<double>(key, value);
    else if (key == "mutation_prob")
      c.mutation_prob = parse_number<double>(key, value);
    else if (key == "arithmetic_weight")
      c.arithmetic_weight = parse_number<double>(key, value);
    else if (key == "mutation_shape")
      c.mutation_shape = parse_number<double>(key, value);
    else if (key == "seed")
      c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "cong_mode")
      c.cong_mode = parse_bool(key, value);
    else if (key == "unsupervised")
      c.unsupervised = parse_bool(key, value);
    else if (key == "error_mapping")
      c.error_mapping = parse_error_mapping(value);
    else if (key == "max_clusters")
      c.max_clusters = parse_number<std::size_t>(key, value);
    else if (key == "max_epochs")
      c.max_epochs = parse_number<int>(key, value);
    else
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
  }
  return c;
}

}  // namespace kflann
