#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "acm/errors.hpp"
#include "acm/model.hpp"

namespace acm {

struct SweepSpec {
  std::string axis = "s";  // s, nbar or detuning
  double from = 0.0;
  double to = 10.0;
  int points = 201;
  bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
  ModelParams params;
  std::string run = "simulate";
  long n_steps = 8000;
  SweepSpec sweep;
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  // initial atom state for simulate: ground, excited, plus or bloch
  std::string initial = "excited";
  std::array<double, 3> bloch{0.0, 0.0, 1.0};

  bool operator==(const RunConfig&) const = default;

  void validate() const {
    params.validate();
    if (run != "simulate" && run != "steady" && run != "spectrum" && run != "sweep" && run != "verify")
      throw ConfigError("run must be one of simulate, steady, spectrum, sweep, verify");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (sweep.axis != "s" && sweep.axis != "nbar" && sweep.axis != "detuning")
      throw ConfigError("sweep.axis must be s, nbar or detuning");
    if (!std::isfinite(sweep.from) || !std::isfinite(sweep.to)) throw ConfigError("sweep range must be finite");
    if (!(sweep.to > sweep.from)) throw ConfigError("sweep.to must exceed sweep.from");
    if (sweep.points < 2) throw ConfigError("sweep.points must be >= 2");
    if ((sweep.axis == "s" || sweep.axis == "nbar") && sweep.from < 0.0)
      throw ConfigError("sweep over " + sweep.axis + " needs a non-negative range");
    if (initial != "ground" && initial != "excited" && initial != "plus" && initial != "bloch")
      throw ConfigError("initial must be ground, excited, plus or bloch");
    const double r2 = bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2];
    if (r2 > 1.0 + 1e-12) throw ConfigError("bloch vector lies outside the unit ball");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  }

  CplxMatrix initial_state() const {
    if (initial == "ground") return ground_state();
    if (initial == "excited") return excited_state();
    if (initial == "plus") return bloch_state(1.0, 0.0, 0.0);
    return bloch_state(bloch[0], bloch[1], bloch[2]);
  }
};

inline void to_json(nlohmann::json& j, const SweepSpec& s) {
  j = nlohmann::json{{"axis", s.axis}, {"from", s.from}, {"to", s.to}, {"points", s.points}};
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown " + where + " key '" + item.key() + "'");
  }
}

inline void from_json(const nlohmann::json& j, SweepSpec& s) {
  reject_unknown(j, {"axis", "from", "to", "points"}, "sweep");
  const SweepSpec d;
  try {
    s.axis = j.value("axis", d.axis);
    s.from = j.value("from", d.from);
    s.to = j.value("to", d.to);
    s.points = j.value("points", d.points);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep: ") + e.what());
  }
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"params", c.params}, {"run", c.run},         {"n_steps", c.n_steps},
                     {"sweep", c.sweep},   {"output_dir", c.output_dir}, {"seed", c.seed},
                     {"initial", c.initial}, {"bloch", c.bloch}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  reject_unknown(j, {"params", "run", "n_steps", "sweep", "output_dir", "seed", "initial", "bloch"}, "config");
  RunConfig d;
  try {
    c.params = j.contains("params") ? j.at("params").get<ModelParams>() : d.params;
    c.run = j.value("run", d.run);
    c.n_steps = j.value("n_steps", d.n_steps);
    c.sweep = j.contains("sweep") ? j.at("sweep").get<SweepSpec>() : d.sweep;
    c.output_dir = j.value("output_dir", d.output_dir);
    c.seed = j.value("seed", d.seed);
    c.initial = j.value("initial", d.initial);
    c.bloch = j.value("bloch", d.bloch);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return j.get<RunConfig>();
}

}  // namespace acm
