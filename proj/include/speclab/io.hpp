#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/potential.hpp"

namespace speclab {

using json = nlohmann::json;

// Fixed formatting: shortest round-trip representation, '.' decimal,
// identical across runs and thread counts (CSV byte-determinism).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_line(const std::vector<double>& values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  return line;
}

inline std::string csv_header(const std::vector<std::string>& cols) {
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  line += '\n';
  return line;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
}

// --------------------------------------------------------------------------
// Potential model <-> JSON (schema speclab-potential-v1, documented in
// docs/formats.md)

inline json potential_to_json(const PotentialModel& pot) {
  json j;
  j["schema"] = "speclab-potential-v1";
  switch (pot.kind) {
    case PotentialModel::Kind::random_bounded: j["kind"] = "random_bounded"; break;
    case PotentialModel::Kind::decaying: j["kind"] = "decaying"; break;
    case PotentialModel::Kind::oscillatory_Q: j["kind"] = "oscillatory_Q"; break;
    case PotentialModel::Kind::constant_imag: j["kind"] = "constant_imag"; break;
    case PotentialModel::Kind::custom: j["kind"] = "custom"; break;
  }
  j["l_max"] = pot.l_max;
  j["reality"] = pot.reality;
  j["grid"] = pot.grid;
  j["seed"] = pot.seed;
  json coeffs = json::array();
  for (int l = -pot.l_max; l <= pot.l_max; ++l) {
    json prof = json::array();
    for (const auto& v : pot.profile(l))
      prof.push_back({v.real(), v.imag()});
    coeffs.push_back(prof);
  }
  j["coeffs"] = coeffs;
  json env;
  if (pot.sup_bound) env["bound"] = *pot.sup_bound;
  if (pot.decay_gamma) env["gamma"] = *pot.decay_gamma;
  if (pot.amplitude_lambda) env["lambda"] = *pot.amplitude_lambda;
  j["envelope"] = env;
  return j;
}

inline PotentialModel potential_from_json(const json& j) {
  if (!j.contains("schema") || j["schema"] != "speclab-potential-v1")
    throw std::invalid_argument("potential json: missing/unknown schema");
  PotentialModel pot;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "random_bounded")
    pot.kind = PotentialModel::Kind::random_bounded;
  else if (kind == "decaying")
    pot.kind = PotentialModel::Kind::decaying;
  else if (kind == "oscillatory_Q")
    pot.kind = PotentialModel::Kind::oscillatory_Q;
  else if (kind == "constant_imag")
    pot.kind = PotentialModel::Kind::constant_imag;
  else if (kind == "custom")
    pot.kind = PotentialModel::Kind::custom;
  else
    throw std::invalid_argument("potential json: unknown kind " + kind);
  pot.l_max = j.at("l_max").get<int>();
  pot.reality = j.at("reality").get<bool>();
  pot.grid = j.at("grid").get<std::vector<double>>();
  pot.seed = j.value("seed", 0ULL);
  detail::check_grid(pot.grid);
  const json& coeffs = j.at("coeffs");
  if (coeffs.size() != static_cast<std::size_t>(pot.n_profiles()))
    throw std::invalid_argument("potential json: wrong number of profiles");
  for (const auto& prof : coeffs) {
    std::vector<cplx> p;
    if (prof.size() != pot.grid.size())
      throw std::invalid_argument("potential json: profile length mismatch");
    for (const auto& v : prof)
      p.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    pot.values.push_back(std::move(p));
  }
  if (j.contains("envelope")) {
    const json& env = j["envelope"];
    if (env.contains("bound")) pot.sup_bound = env["bound"].get<double>();
    if (env.contains("gamma")) pot.decay_gamma = env["gamma"].get<double>();
    if (env.contains("lambda"))
      pot.amplitude_lambda = env["lambda"].get<double>();
  }
  if (pot.reality && !reality_holds(pot, 1e-12))
    throw std::invalid_argument("potential json: reality flag violated");
  return pot;
}

// Run manifest: config echo + hash + provenance.
inline json run_manifest(const json& config, std::uint64_t seed,
                         const std::string& experiment) {
  json m;
  m["experiment"] = experiment;
  m["seed"] = seed;
  m["config"] = config;
  m["config_hash"] = fnv1a64(config.dump());
  m["format_version"] = 1;
  return m;
}

}  // namespace speclab
