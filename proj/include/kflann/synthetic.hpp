#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kflann/dataset.hpp"

namespace kflann {

// Axis-aligned Gaussian blob.
struct ClusterSpec {
  std::vector<double> center;
  std::vector<double> stddev;  // per feature, >= 0
  std::size_t count = 0;
};

struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t dims = 0;
  std::vector<ClusterSpec> clusters;
  std::uint64_t seed = 0;

  void validate() const;
};

// Patterns are emitted cluster by cluster; labels are cluster indices.
Dataset generate_synthetic(const SyntheticSpec& spec);

// syndata1..syndata6 follow the shapes of the benchmark roster:
//   syndata1  1000 x 2, 2 classes, well separated
//   syndata2  1000 x 2, 2 classes, half separated
//   syndata3  1000 x 2, 2 classes, overlapped
//   syndata4   500 x 8, 3 classes (250/150/100), well separated
//   syndata5   400 x 8, 3 classes (150/150/100), well separated
//   syndata6   350 x 8, 3 classes (100/150/100), overlapped
//   thyroid5   215 x 5, 3 classes (150/35/30), one dominant class with two
//              small, partly overlapping ones
const std::vector<std::string>& preset_names();
SyntheticSpec preset(std::string_view name);
SyntheticSpec preset(std::string_view name, std::uint64_t seed);

// JSON: {"name": "...", "seed": 7, "clusters": [{"center": [..], "stddev": [..], "count": N}]}
SyntheticSpec parse_synthetic_spec(std::istream& in);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

}  // namespace kflann
