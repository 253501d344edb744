#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nstorus/config.hpp"
#include "nstorus/generators.hpp"
#include "nstorus/serialize.hpp"

namespace nstorus {

/// A fully specified run: configuration, initial data source, experiment id,
/// output directory and seed. With a fixed seed every output byte is
/// reproducible.
struct RunManifest {
  int version = 1;
  std::string experiment;  // solve | certify | decay | uniqueness | majorant-check | props
  SolverConfig config;
  InitialSpec initial;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool reproducible = false;
  json extra = json::object();  // experiment-specific sections (uniqueness, certify, props)
};

RunManifest manifest_from_json(const json& j);
RunManifest load_manifest(const std::string& path);
json manifest_to_json(const RunManifest& m);

/// Runs the named experiment, writes its artifacts under output_dir and a
/// summary JSON to `out`. Returns the process exit code: 0 success,
/// 1 numerical failure, 2 usage/config error. Errors are reported as
/// machine-readable JSON on `out`.
int run_experiment(const RunManifest& manifest, std::ostream& out);

}  // namespace nstorus
