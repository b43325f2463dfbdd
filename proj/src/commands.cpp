#include "kflann/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "kflann/report.hpp"
#include "kflann/synthetic.hpp"

namespace kflann {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

bool is_preset(const std::string& name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

Dataset load_dataset(const std::string& source, bool has_labels) {
  if (!fs::exists(source) && is_preset(source)) return generate_synthetic(preset(source));
  return load_csv(source, has_labels);
}

std::string cluster_json(const Dataset& dataset, const KflannParams& params,
                         const ClusteringOutcome& outcome, const ValidityReport& report) {
  nlohmann::json j;
  j["dataset"] = dataset.name();
  j["variant"] = to_string(params.variant);
  j["vigilance"] = params.vigilance;
  j["tolerances"] = params.tolerances;
  j["clusters"] = outcome.clusters();
  j["error_rate"] = report.error_rate ? nlohmann::json(*report.error_rate) : nlohmann::json(nullptr);
  j["cs"] = report.cs;
  j["fitness"] = report.fitness;
  j["degenerate"] = report.degenerate;
  j["epochs"] = outcome.epochs;
  j["converged"] = outcome.converged;
  j["assignments"] = outcome.assignments;
  j["centroids"] = outcome.centroids;
  return j.dump(2) + "\n";
}

int cmd_cluster(const ClusterArgs& args, std::ostream& out) {
  const auto data = load_dataset(args.data, args.has_labels);
  if (args.tolerances.size() != data.dims())
    throw std::invalid_argument("dimension mismatch: dataset has d=" +
                                std::to_string(data.dims()) + " features but " +
                                std::to_string(args.tolerances.size()) + " tolerances were given");
  KflannParams params{args.rho, args.tolerances, args.variant, args.max_epochs};

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (args.seed) {
    Rng rng(*args.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto outcome = cluster(data, params, std::move(order));

  EvaluationOptions opts;
  opts.unsupervised = !data.has_labels();
  const auto report = evaluate(data, outcome, opts);

  out << "dataset " << data.name() << " (" << data.size() << " x " << data.dims() << ")\n"
      << "variant " << to_string(params.variant) << ", vigilance " << format_real(params.vigilance)
      << "\n"
      << "clusters " << outcome.clusters() << (report.degenerate ? " (degenerate)" : "") << "\n";
  if (report.error_rate) out << "error rate " << format_real(*report.error_rate) << "%\n";
  out << "cs " << format_real(report.cs) << ", fitness " << format_real(report.fitness) << "\n"
      << "epochs " << outcome.epochs << (outcome.converged ? ", converged" : ", NOT converged")
      << "\n";

  if (!args.out.empty()) {
    auto f = open_out(args.out);
    f << cluster_json(data, params, outcome, report);
  }
  return outcome.converged ? kExitOk : kExitNotConverged;
}

int cmd_search(const SearchArgs& args, std::ostream& out) {
  std::vector<Variant> variants;
  if (args.variant == "both")
    variants = {Variant::original, Variant::enhanced};
  else
    variants = {parse_variant(args.variant)};
  args.config.validate();
  const auto data = load_dataset(args.data, args.has_labels && !args.config.unsupervised);
  if (!args.config.unsupervised && !data.has_labels())
    throw std::invalid_argument("dataset has no labels; pass --unsupervised to search without them");
  if (args.threads > 0) omp_set_num_threads(args.threads);
  fs::create_directories(args.out);

  std::vector<RunReport> reports;
  for (auto v : variants) {
    const auto result = evolve(data, args.config, v);
    auto report = make_report(data.name(), v, result);
    const auto name = std::string(to_string(v));
    {
      auto f = open_out(args.out / (name + "_runs.csv"));
      write_runs_csv(f, report);
    }
    {
      auto f = open_out(args.out / (name + "_table.csv"));
      write_table_csv(f, report);
    }
    {
      auto f = open_out(args.out / (name + "_summary.json"));
      f << summary_json(report, args.config);
    }
    const auto mean = report.aggregate();
    const auto& top = report.max_vigilance();
    out << name << ": " << report.records.size() << " runs, mean K " << format_real(mean.clusters);
    if (mean.error_rate) out << ", mean error " << format_real(*mean.error_rate) << "%";
    out << "; max vigilance " << format_real(top.vigilance) << " K " << top.clusters;
    if (top.error_rate) out << " error " << format_real(*top.error_rate) << "%";
    out << "\n";
    reports.push_back(std::move(report));
  }
  if (reports.size() > 1) {
    auto f = open_out(args.out / "comparison.csv");
    write_comparison_csv(f, reports);
  }
  return kExitOk;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  if (args.preset.empty() == args.spec.empty())
    throw std::invalid_argument("give exactly one of --preset or --spec");
  auto spec = args.preset.empty() ? load_synthetic_spec(args.spec) : preset(args.preset);
  if (args.seed) spec.seed = *args.seed;
  const auto data = generate_synthetic(spec);
  {
    auto f = open_out(args.out);
    write_csv(f, data);
  }
  std::map<int, std::size_t> counts;
  for (int l : data.labels()) ++counts[l];
  out << data.name() << ": " << data.size() << " patterns, " << data.dims() << " features, "
      << counts.size() << " classes (";
  bool first = true;
  for (const auto& [label, n] : counts) {
    out << (first ? "" : "/") << n;
    first = false;
  }
  out << ")\n";
  return kExitOk;
}

int cmd_distances(const DistancesArgs& args, std::ostream& out) {
  const auto data = load_dataset(args.data, args.has_labels);
  const auto dm = distance_matrix(data);
  {
    auto f = open_out(args.out);
    write_matrix_csv(f, dm);
  }
  out << "wrote " << data.size() << "x" << data.size() << " distance matrix to "
      << args.out.string() << "\n";
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"K-FLANN / EK-FLANN clustering with GA parameter search", "kflann"};
  app.require_subcommand(1);

  ClusterArgs ca;
  std::string cluster_variant = "enhanced";
  bool cluster_no_labels = false;
  std::optional<std::uint64_t> cluster_seed;
  auto* cl = app.add_subcommand("cluster", "Run one clustering with fixed parameters");
  cl->add_option("--data", ca.data, "CSV file or preset name")->required();
  cl->add_option("--rho", ca.rho, "Vigilance in (0, 1]")->required();
  cl->add_option("--tol", ca.tolerances, "Per-feature tolerances, comma separated")
      ->required()
      ->delimiter(',');
  cl->add_option("--variant", cluster_variant)
      ->check(CLI::IsMember({"original", "enhanced"}))
      ->capture_default_str();
  cl->add_option("--seed", cluster_seed, "Shuffle the initial presentation order");
  cl->add_option("--max-epochs", ca.max_epochs)->capture_default_str();
  cl->add_option("--out", ca.out, "Write the result as JSON");
  cl->add_flag("--no-labels", cluster_no_labels, "Last CSV column is a feature, not a label");

  SearchArgs sa;
  bool search_no_labels = false;
  std::string config_file, cong_mode, error_mapping;
  std::optional<std::size_t> popsize, max_clusters;
  std::optional<int> runs, gens, max_epochs;
  std::optional<double> cr, mu, b;
  std::optional<std::uint64_t> search_seed;
  bool unsupervised = false;
  auto* se = app.add_subcommand("search", "GA search for vigilance and tolerances");
  se->add_option("--data", sa.data, "CSV file or preset name")->required();
  se->add_option("--variant", sa.variant)
      ->check(CLI::IsMember({"original", "enhanced", "both"}))
      ->capture_default_str();
  se->add_option("--config", config_file, "key=value file of GA settings")
      ->check(CLI::ExistingFile);
  se->add_option("--popsize", popsize);
  se->add_option("--runs", runs);
  se->add_option("--gens", gens, "Generations per run");
  se->add_option("--cr", cr, "Crossover rate");
  se->add_option("--mu", mu, "Mutation probability");
  se->add_option("--b", b, "Non-uniform mutation shape");
  se->add_option("--cong-mode", cong_mode, "Vigilance from control bits")
      ->check(CLI::IsMember({"on", "off"}));
  se->add_option("--error-mapping", error_mapping)
      ->check(CLI::IsMember({"one-to-one", "majority"}));
  se->add_option("--max-clusters", max_clusters, "Fitness 0 above this K (0: sqrt(n))");
  se->add_option("--max-epochs", max_epochs);
  se->add_flag("--unsupervised", unsupervised, "Fitness from CS alone");
  se->add_option("--threads", sa.threads, "OpenMP threads (1 = serial)");
  se->add_option("--seed", search_seed);
  se->add_option("--out", sa.out, "Output directory")->capture_default_str();
  se->add_flag("--no-labels", search_no_labels);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  auto* preset_opt = gen->add_option("--preset", ga.preset, "syndata1..syndata6, thyroid5");
  auto* spec_opt = gen->add_option("--spec", ga.spec, "JSON cluster spec")->check(CLI::ExistingFile);
  preset_opt->excludes(spec_opt);
  gen->add_option("--out", ga.out)->required();
  gen->add_option("--seed", ga.seed);

  DistancesArgs da;
  bool dist_no_labels = false;
  auto* di = app.add_subcommand("distances", "Write the pairwise distance matrix");
  di->add_option("--data", da.data)->required();
  di->add_option("--out", da.out)->required();
  di->add_flag("--no-labels", dist_no_labels);

  std::vector<std::string> argv_store{"kflann"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*cl) {
      ca.variant = parse_variant(cluster_variant);
      ca.has_labels = !cluster_no_labels;
      ca.seed = cluster_seed;
      return cmd_cluster(ca, out);
    }
    if (*se) {
      if (!config_file.empty()) {
        std::ifstream f(config_file);
        sa.config = parse_ga_config(f, sa.config);
      }
      if (popsize) sa.config.popsize = *popsize;
      if (runs) sa.config.runs = *runs;
      if (gens) sa.config.generations = *gens;
      if (cr) sa.config.crossover_rate = *cr;
      if (mu) sa.config.mutation_prob = *mu;
      if (b) sa.config.mutation_shape = *b;
      if (!cong_mode.empty()) sa.config.cong_mode = cong_mode == "on";
      if (!error_mapping.empty()) sa.config.error_mapping = parse_error_mapping(error_mapping);
      if (max_clusters) sa.config.max_clusters = *max_clusters;
      if (max_epochs) sa.config.max_epochs = *max_epochs;
      if (unsupervised) sa.config.unsupervised = true;
      if (search_seed) sa.config.seed = *search_seed;
      sa.has_labels = !search_no_labels;
      return cmd_search(sa, out);
    }
    if (*gen) return cmd_generate(ga, out);
    if (*di) {
      da.has_labels = !dist_no_labels;
      return cmd_distances(da, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace kflann
