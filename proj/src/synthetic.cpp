#include "kflann/synthetic.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace kflann {

void SyntheticSpec::validate() const {
  if (dims == 0) throw DataError("synthetic spec: dimensionality must be >= 1");
  if (clusters.empty()) throw DataError("synthetic spec: no clusters");
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cl = clusters[c];
    const auto where = "synthetic spec: cluster " + std::to_string(c);
    if (cl.center.size() != dims) throw DataError(where + " center has wrong dimensionality");
    if (cl.stddev.size() != dims) throw DataError(where + " stddev has wrong dimensionality");
    if (cl.count == 0) throw DataError(where + " has zero patterns");
    for (double s : cl.stddev)
      if (!(s >= 0.0)) throw DataError(where + " has a negative standard deviation");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> values;
  std::vector<int> labels;
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    const auto& cl = spec.clusters[c];
    for (std::size_t i = 0; i < cl.count; ++i) {
      for (std::size_t f = 0; f < spec.dims; ++f) {
        double z = unit(rng);
        values.push_back(cl.stddev[f] == 0.0 ? cl.center[f] : cl.center[f] + cl.stddev[f] * z);
      }
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(spec.name, spec.dims, std::move(values), std::move(labels));
}

namespace {

ClusterSpec blob(std::vector<double> center, double sigma, std::size_t count) {
  std::vector<double> sd(center.size(), sigma);
  return {std::move(center), std::move(sd), count};
}

SyntheticSpec make(std::string name, std::uint64_t seed, std::vector<ClusterSpec> clusters) {
  SyntheticSpec s;
  s.name = std::move(name);
  s.dims = clusters.front().center.size();
  s.clusters = std::move(clusters);
  s.seed = seed;
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"syndata1", "syndata2", "syndata3", "syndata4",
                                                 "syndata5", "syndata6", "thyroid5"};
  return names;
}

SyntheticSpec preset(std::string_view name) {
  // Unit-variance blobs unless noted, so center offsets read as sigmas.
  // syndata1/4/5 are well separated (8+ sigma), syndata2 half separated
  // (~4.5 sigma), syndata3 (~1.7 sigma) and syndata6 (~2.4 sigma over 8
  // features) overlap. thyroid5 mimics the 150/35/30 New Thyroid shape.
  if (name == "syndata1")
    return make("syndata1", 101, {blob({0.0, 0.0}, 1.0, 500), blob({8.0, 2.0}, 1.0, 500)});
  if (name == "syndata2")
    return make("syndata2", 102, {blob({0.0, 0.0}, 1.0, 500), blob({4.5, 0.5}, 1.0, 500)});
  if (name == "syndata3")
    return make("syndata3", 103, {blob({0.0, 0.0}, 1.0, 500), blob({1.6, 0.5}, 1.0, 500)});
  if (name == "syndata4")
    return make("syndata4", 104,
                {blob({0, 0, 0, 0, 0, 0, 0, 0}, 1.0, 250), blob({6, 6, 0, 0, 6, 0, 6, 0}, 1.0, 150),
                 blob({0, 6, 6, 6, 0, 6, 0, 6}, 1.0, 100)});
  if (name == "syndata5")
    return make("syndata5", 105,
                {blob({0, 0, 0, 0, 0, 0, 0, 0}, 1.0, 150), blob({6, 0, 6, 0, 6, 0, 6, 0}, 1.0, 150),
                 blob({0, 6, 0, 6, 0, 6, 0, 6}, 1.0, 100)});
  if (name == "syndata6")
    return make("syndata6", 106,
                {blob({0, 0, 0, 0, 0, 0, 0, 0}, 1.0, 100),
                 blob({1.2, 1.2, 0, 0, 1.2, 0, 1.2, 0}, 1.0, 150),
                 blob({0, 1.2, 1.2, 1.2, 0, 1.2, 0, 1.2}, 1.0, 100)});
  if (name == "thyroid5")
    return make("thyroid5", 107,
                {blob({0, 0, 0, 0, 0}, 1.0, 150), blob({2.0, -1.5, -1.5, 0, 1.5}, 1.2, 35),
                 blob({-1.5, 2.0, 1.5, 1.5, 0}, 1.2, 30)});
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw DataError("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

SyntheticSpec preset(std::string_view name, std::uint64_t seed) {
  auto s = preset(name);
  s.seed = seed;
  return s;
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    SyntheticSpec s;
    s.name = j.value("name", std::string("synthetic"));
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& c : j.at("clusters")) {
      ClusterSpec cl;
      cl.center = c.at("center").get<std::vector<double>>();
      cl.stddev = c.at("stddev").get<std::vector<double>>();
      cl.count = c.at("count").get<std::size_t>();
      s.clusters.push_back(std::move(cl));
    }
    s.dims = s.clusters.empty() ? 0 : s.clusters.front().center.size();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synthetic spec: ") + e.what());
  }
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_synthetic_spec(in);
}

}  // namespace kflann
