#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "acm/densemath.hpp"
#include "acm/errors.hpp"

namespace acm {

// Basis convention: |e> is index 0 and |g> is index 1; the atom is the first
// tensor factor of every joint operator.
inline constexpr std::size_t EXCITED = 0;
inline constexpr std::size_t GROUND = 1;

inline constexpr double LEAK_LIMIT = 1e-6;

struct ModelParams {
  double gamma = 1.0;
  double rabi = 0.0;
  double omega0 = 1000.0;
  double omegaL = 1000.0;
  double nbar = 0.0;
  double dt = 1e-3;
  int fock_dim = 12;
  double hbar = 1.0;

  // delta = omega0 - omegaL
  double detuning() const { return omega0 - omegaL; }

  double beta() const {
    if (nbar <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log1p(1.0 / nbar) / omega0;
  }

  void validate() const {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (fock_dim < 2) throw ConfigError("fock_dim must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
    if (!(omega0 > 0.0)) throw ConfigError("omega0 must be > 0");
    if (!std::isfinite(rabi) || !std::isfinite(omegaL)) throw ConfigError("rabi and omegaL must be finite");
    if (hbar != 1.0) throw ConfigError("hbar is fixed to 1");
  }

  std::vector<std::string> regime_warnings() const {
    std::vector<std::string> w;
    if (gamma * dt > 0.05) w.push_back("gamma*dt = " + std::to_string(gamma * dt) + " exceeds 0.05");
    if (std::abs(rabi) > 0.1 * omega0) w.push_back("rabi exceeds 0.1*omega0");
    if (std::abs(omegaL - omega0) > 0.1 * omega0) w.push_back("|omegaL - omega0| exceeds 0.1*omega0");
    return w;
  }

  bool operator==(const ModelParams&) const = default;
};

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"gamma", p.gamma}, {"rabi", p.rabi},   {"omega0", p.omega0},     {"omegaL", p.omegaL},
                     {"nbar", p.nbar},   {"dt", p.dt},       {"fock_dim", p.fock_dim}, {"hbar", p.hbar}};
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
  if (!j.is_object()) throw ConfigError("params must be a JSON object");
  static const char* known[] = {"gamma", "rabi", "omega0", "omegaL", "nbar", "dt", "fock_dim", "hbar"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown params key '" + item.key() + "'");
  }
  ModelParams d;
  try {
    p.gamma = j.value("gamma", d.gamma);
    p.rabi = j.value("rabi", d.rabi);
    p.omega0 = j.value("omega0", d.omega0);
    p.omegaL = j.value("omegaL", d.omegaL);
    p.nbar = j.value("nbar", d.nbar);
    p.dt = j.value("dt", d.dt);
    p.fock_dim = j.value("fock_dim", d.fock_dim);
    p.hbar = j.value("hbar", d.hbar);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  p.validate();
}

struct QubitOps {
  CplxMatrix sigma_minus;
  CplxMatrix sigma_plus;
  CplxMatrix sigma_z;
  CplxMatrix H_S;
};

inline QubitOps qubit_ops(double omega0 = 1.0) {
  QubitOps q{CplxMatrix(2, 2), CplxMatrix(2, 2), CplxMatrix(2, 2), CplxMatrix(2, 2)};
  q.sigma_minus(GROUND, EXCITED) = 1.0;
  q.sigma_plus(EXCITED, GROUND) = 1.0;
  q.sigma_z(EXCITED, EXCITED) = 1.0;
  q.sigma_z(GROUND, GROUND) = -1.0;
  q.H_S = (0.5 * omega0) * q.sigma_z;
  return q;
}

inline QubitOps qubit_ops(const ModelParams& p) { return qubit_ops(p.omega0); }

struct FockOps {
  CplxMatrix b;
  CplxMatrix number;
};

inline FockOps fock_ops(int d) {
  if (d < 2) throw DimensionError("fock dimension must be >= 2");
  const auto n = static_cast<std::size_t>(d);
  FockOps f{CplxMatrix(n, n), CplxMatrix(n, n)};
  for (std::size_t k = 1; k < n; ++k) f.b(k - 1, k) = std::sqrt(static_cast<double>(k));
  for (std::size_t k = 0; k < n; ++k) f.number(k, k) = static_cast<double>(k);
  return f;
}

struct UnitState {
  CplxMatrix rho;
  cplx alpha = 0.0;
  double truncation_leak = 0.0;
};

inline UnitState thermal_state(double nbar, int d) {
  if (nbar < 0.0) throw ConfigError("nbar must be >= 0");
  if (d < 1) throw DimensionError("fock dimension must be >= 1");
  const auto n = static_cast<std::size_t>(d);
  UnitState u{CplxMatrix(n, n), 0.0, 0.0};
  const double q = nbar / (nbar + 1.0);
  double w = 1.0 / (nbar + 1.0);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    u.rho(k, k) = w;
    total += w;
    w *= q;
  }
  u.truncation_leak = std::max(0.0, 1.0 - total);
  u.rho *= 1.0 / total;
  return u;
}

inline CplxMatrix displacement(cplx alpha, int d) {
  if (std::norm(alpha) > d / 9.0) {
    throw AmplitudeError("displacement: |alpha|^2 = " + std::to_string(std::norm(alpha)) + " exceeds d/9 = " +
                         std::to_string(d / 9.0));
  }
  const auto f = fock_ops(d);
  return matexp(alpha * f.b.adjoint() - std::conj(alpha) * f.b);
}

inline double time_of(long n, const ModelParams& p) { return static_cast<double>(n) * p.dt; }

inline cplx unit_amplitude(long n, const ModelParams& p) {
  const double mag = 0.5 * p.rabi * std::sqrt(p.dt / p.gamma);
  return mag * std::exp(cplx(0.0, -(p.omegaL - p.omega0) * time_of(n, p)));
}

// Displaced thermal unit D(alpha) eta_th D(alpha)^dagger truncated to d levels.
// Built in a padded space so that the leak includes the displaced spill.
inline UnitState displaced_thermal(cplx alpha, double nbar, int d) {
  const int pad = 16;
  const int big = d + pad;
  const double q = nbar / (nbar + 1.0);
  CplxMatrix eta(static_cast<std::size_t>(big), static_cast<std::size_t>(big));
  double w = 1.0 / (nbar + 1.0);
  for (int k = 0; k < big; ++k) {
    eta(k, k) = w;
    w *= q;
  }
  CplxMatrix full = eta;
  if (alpha != 0.0) {
    const CplxMatrix D = displacement(alpha, big);
    full = D * eta * D.adjoint();
  }
  const auto n = static_cast<std::size_t>(d);
  UnitState u{CplxMatrix(n, n), alpha, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u.rho(i, j) = full(i, j);
  const double tr = u.rho.trace().real();
  u.truncation_leak = std::max(0.0, 1.0 - tr);
  u.rho *= 1.0 / tr;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (u.rho(i, j) + std::conj(u.rho(j, i)));
      u.rho(i, j) = avg;
      u.rho(j, i) = std::conj(avg);
    }
  return u;
}

inline UnitState fresh_unit(long n, const ModelParams& p, int d) { return displaced_thermal(unit_amplitude(n, p), p.nbar, d); }

// Smallest d >= p.fock_dim for which the fresh unit leaks less than LEAK_LIMIT.
inline int effective_fock_dim(const ModelParams& p, int cap = 160) {
  const cplx alpha = unit_amplitude(0, p);
  for (int d = std::max(2, p.fock_dim); d <= cap; ++d) {
    if (std::norm(alpha) > d / 9.0) continue;
    const double q = p.nbar / (p.nbar + 1.0);
    if (std::pow(q, d) > 10 * LEAK_LIMIT) continue;
    if (displaced_thermal(alpha, p.nbar, d).truncation_leak < LEAK_LIMIT) return d;
  }
  throw NumericalDegradation("no Fock truncation up to " + std::to_string(cap) + " keeps the unit leak below 1e-6");
}

inline CplxMatrix excited_state() {
  CplxMatrix s(2, 2);
  s(EXCITED, EXCITED) = 1.0;
  return s;
}

inline CplxMatrix ground_state() {
  CplxMatrix s(2, 2);
  s(GROUND, GROUND) = 1.0;
  return s;
}

// Atom state from Bloch coordinates, <sigma_x> = x etc., with
// sigma_- = (sigma_x - i sigma_y)/2 in the |e>,|g> basis.
inline CplxMatrix bloch_state(double x, double y, double z) {
  CplxMatrix s(2, 2);
  s(EXCITED, EXCITED) = 0.5 * (1.0 + z);
  s(GROUND, GROUND) = 0.5 * (1.0 - z);
  // <sigma_-> = Tr(sigma_- rho) = rho(e,g) = (x - i y)/2
  s(EXCITED, GROUND) = cplx(0.5 * x, -0.5 * y);
  s(GROUND, EXCITED) = cplx(0.5 * x, 0.5 * y);
  return s;
}

struct Bloch {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Bloch bloch_of(const CplxMatrix& s) {
  const cplx sm = s(EXCITED, GROUND);
  return {2.0 * sm.real(), -2.0 * sm.imag(), (s(EXCITED, EXCITED) - s(GROUND, GROUND)).real()};
}

inline cplx sigma_minus_mean(const CplxMatrix& s) { return s(EXCITED, GROUND); }

inline double sigma_z_mean(const CplxMatrix& s) { return (s(EXCITED, EXCITED) - s(GROUND, GROUND)).real(); }

// Frame change between the interaction picture (w.r.t. omega0) used by the
// collision engine and the frame rotating at omegaL used by the OBE solver:
// rho_rot = W rho_int W^dagger with W = exp(-i delta t sigma_z / 2).
inline CplxMatrix to_rotating(const CplxMatrix& s_int, double t, const ModelParams& p) {
  const double ph = p.detuning() * t;
  CplxMatrix r = s_int;
  const cplx f = std::exp(cplx(0.0, -ph));
  r(EXCITED, GROUND) *= f;
  r(GROUND, EXCITED) *= std::conj(f);
  return r;
}

inline CplxMatrix to_interaction(const CplxMatrix& s_rot, double t, const ModelParams& p) {
  const double ph = p.detuning() * t;
  CplxMatrix r = s_rot;
  const cplx f = std::exp(cplx(0.0, ph));
  r(EXCITED, GROUND) *= f;
  r(GROUND, EXCITED) *= std::conj(f);
  return r;
}

}  // namespace acm
