#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nstorus/config.hpp"
#include "nstorus/field.hpp"

namespace nstorus {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON field schema
//
//   {
//     "dim": n, "trunc": N, "components": m,
//     "coeffs": [ component ][ [ [k_1, ..., k_n], re, im ], ... ]
//   }
//
// One entry per retained mode, in lexicographic k order. Doubles are emitted
// with shortest round-trip precision, so write/read reproduces the field
// bit-exactly.
// ---------------------------------------------------------------------------

inline json field_to_json(const SpectralField& f) {
  json out;
  out["dim"] = f.dim();
  out["trunc"] = f.trunc();
  out["components"] = f.components();
  json comps = json::array();
  for (int c = 0; c < f.components(); ++c) {
    json entries = json::array();
    for (Eigen::Index i = 0; i < f.num_modes(); ++i) {
      json ktuple = json::array();
      for (int d = 0; d < f.dim(); ++d) ktuple.push_back(f.modes().k(i, d));
      entries.push_back(json::array({ktuple, f(i, c).real(), f(i, c).imag()}));
    }
    comps.push_back(std::move(entries));
  }
  out["coeffs"] = std::move(comps);
  return out;
}

inline SpectralField field_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const int trunc = j.at("trunc").get<int>();
  const int components = j.at("components").get<int>();
  SpectralField f(dim, trunc, components);
  const json& comps = j.at("coeffs");
  if (static_cast<int>(comps.size()) != components)
    throw ConfigError("coeffs", "field json: component count mismatch");
  std::vector<int> k(dim);
  for (int c = 0; c < components; ++c) {
    for (const json& entry : comps.at(c)) {
      const json& ktuple = entry.at(0);
      if (static_cast<int>(ktuple.size()) != dim)
        throw ConfigError("coeffs", "field json: wavevector arity mismatch");
      for (int d = 0; d < dim; ++d) k[d] = ktuple.at(d).get<int>();
      f.set_coeff(k, {entry.at(1).get<double>(), entry.at(2).get<double>()}, c);
    }
  }
  if (!f.all_finite()) throw ConfigError("coeffs", "field json: non-finite coefficient");
  return f;
}

// ---------------------------------------------------------------------------
// Binary layout "TMF1" (little-endian):
//   bytes 0..3   magic "TMF1"
//   uint32       n (dim), m (components), N (trunc)
//   float64 x 2  (re, im) per coefficient, component-major, modes in
//                lexicographic k order
// ---------------------------------------------------------------------------

inline void field_to_binary(const SpectralField& f, std::ostream& os) {
  os.write("TMF1", 4);
  const std::uint32_t header[3] = {static_cast<std::uint32_t>(f.dim()),
                                   static_cast<std::uint32_t>(f.components()),
                                   static_cast<std::uint32_t>(f.trunc())};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (int c = 0; c < f.components(); ++c)
    for (Eigen::Index i = 0; i < f.num_modes(); ++i) {
      const double pair[2] = {f(i, c).real(), f(i, c).imag()};
      os.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
}

inline SpectralField field_from_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TMF1", 4) != 0)
    throw ConfigError("magic", "field binary: bad magic");
  std::uint32_t header[3];
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!is) throw ConfigError("header", "field binary: truncated header");
  SpectralField f(static_cast<int>(header[0]), static_cast<int>(header[2]),
                  static_cast<int>(header[1]));
  for (int c = 0; c < f.components(); ++c)
    for (Eigen::Index i = 0; i < f.num_modes(); ++i) {
      double pair[2];
      is.read(reinterpret_cast<char*>(pair), sizeof(pair));
      if (!is) throw ConfigError("coeffs", "field binary: truncated payload");
      f(i, c) = {pair[0], pair[1]};
    }
  if (!f.all_finite()) throw ConfigError("coeffs", "field binary: non-finite coefficient");
  return f;
}

inline void save_field(const SpectralField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    os << field_to_json(f).dump();
  else
    field_to_binary(f, os);
}

inline SpectralField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open for reading: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return field_from_json(json::parse(is));
  return field_from_binary(is);
}

// ---------------------------------------------------------------------------
// SolverConfig <-> JSON
// ---------------------------------------------------------------------------

inline json config_to_json(const SolverConfig& c) {
  return json{{"dim", c.dim},
              {"trunc", c.trunc},
              {"viscosity", c.viscosity},
              {"smoothness", c.smoothness},
              {"horizon", c.horizon},
              {"time_grid", c.time_grid},
              {"picard_tol", c.picard_tol},
              {"quad_tol", c.quad_tol},
              {"max_iterations", c.max_iterations},
              {"threads", c.threads}};
}

inline SolverConfig config_from_json(const json& j) {
  SolverConfig c;
  auto read = [&](const char* key, auto& slot, bool required) {
    if (j.contains(key)) {
      try {
        slot = j.at(key).get<std::decay_t<decltype(slot)>>();
      } catch (const json::exception&) {
        throw ConfigError(key, std::string("config.") + key + ": wrong type");
      }
    } else if (required) {
      throw ConfigError(key, std::string("config.") + key + " is required");
    }
  };
  read("dim", c.dim, true);
  read("trunc", c.trunc, true);
  read("viscosity", c.viscosity, true);
  read("smoothness", c.smoothness, true);
  read("horizon", c.horizon, true);
  read("time_grid", c.time_grid, true);
  read("picard_tol", c.picard_tol, false);
  read("quad_tol", c.quad_tol, false);
  read("max_iterations", c.max_iterations, false);
  read("threads", c.threads, false);
  c.validate();
  return c;
}

}  // namespace nstorus
