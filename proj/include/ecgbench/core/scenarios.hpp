#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecgbench/core/synth.hpp"

namespace ecgbench {

/// How the stand-in for the neural delineator renders its probability map.
struct MapOptions {
  bool omit_nonconducted_p = true;
  /// Extra T-wave candidates injected into the TP segment of these beats.
  std::vector<int> spurious_t_beats;
  double confidence = 0.9;
  std::uint64_t seed = 0;
};

/// A synthetic record built to exercise one path of one diagnosis diagram.
struct Scenario {
  std::string name;
  std::string diagnosis;
  std::string path_id;
  /// finding id -> expected presence along the targeted path
  std::map<std::string, bool> programmed;
  SyntheticSpec spec;
  MapOptions map;
};

const std::vector<std::string>& scenario_names();

/// Throws SpecError for unknown names. `seed` drives the parameter jitter.
Scenario make_scenario(const std::string& name, std::uint64_t seed);

/// `count` scenarios cycling through every name, with distinct seeds.
std::vector<Scenario> scenario_suite(std::size_t count, std::uint64_t seed);

}  // namespace ecgbench
