#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "acm/collider.hpp"
#include "acm/densemath.hpp"
#include "acm/energetics.hpp"
#include "acm/model.hpp"

namespace acm {

inline double von_neumann(const CplxMatrix& rho) {
  double s = 0.0;
  for (double l : eigvalsh(rho))
    if (l > 0.0) s -= l * std::log(l);
  return s;
}

// D(rho || sigma) = Tr rho (ln rho - ln sigma); +inf when the support of rho
// is not contained in that of sigma.
inline double relative_entropy(const CplxMatrix& rho, const CplxMatrix& sigma, double floor = 1e-14) {
  const CplxMatrix null_part = apply_hermitian(sigma, [floor](double l) { return l > floor ? 0.0 : 1.0; });
  if (expectation(null_part, rho).real() > 1e-12) return std::numeric_limits<double>::infinity();
  const CplxMatrix lr = apply_hermitian(rho, [](double l) { return l > 0.0 ? std::log(l) : 0.0; });
  const CplxMatrix ls = apply_hermitian(sigma, [floor](double l) { return l > floor ? std::log(l) : 0.0; });
  return expectation(lr - ls, rho).real();
}

// phi_n = -sqrt(gamma dt) <sigma_->_{t_n}
inline std::vector<cplx> displacement_record(const TrajectoryRecord& rec) {
  const double k = -std::sqrt(rec.p.gamma * rec.p.dt);
  std::vector<cplx> phi;
  phi.reserve(rec.sigma_minus.size());
  for (std::size_t n = 0; n + 1 < rec.sigma_minus.size(); ++n) phi.push_back(k * rec.sigma_minus[n]);
  return phi;
}

// Time series of the entropy bookkeeping at the recorded trajectory times.
// Needs a ledger that evaluated every step from n = 0.
struct EntropyReport {
  double beta = 0.0;
  std::vector<double> t;
  std::vector<double> dS_S;
  std::vector<double> Sigma;
  std::vector<double> bSigma;
  std::vector<double> Sigma_minus_bSigma;
  std::vector<double> minus_beta_selfwork;  // -beta * cumulative W_self
  std::vector<cplx> displacement;
  bool finite_beta = true;
};

inline EntropyReport entropy_report(const TrajectoryRecord& rec, const EnergyLedger& ledger) {
  const ModelParams& p = rec.p;
  if (ledger.stride() != 1 || ledger.cumulative().size() + 1 < rec.sigma_minus.size()) {
    throw ConfigError("entropy_report needs a ledger with stride 1 covering the whole trajectory");
  }
  EntropyReport r;
  r.beta = p.beta();
  r.finite_beta = std::isfinite(r.beta);
  r.displacement = displacement_record(rec);
  const double S0 = von_neumann(rec.states.front());
  for (std::size_t i = 0; i < rec.t.size(); ++i) {
    const long n = std::lround(rec.t[i] / p.dt);
    double Q = 0.0, bQf = 0.0, Ws = 0.0;
    if (n > 0) {
      const auto& c = ledger.cumulative()[static_cast<std::size_t>(n - 1)];
      Q = c[4];
      bQf = c[8];
      Ws = c[9];
    }
    const double dS = von_neumann(rec.states[i]) - S0;
    r.t.push_back(rec.t[i]);
    r.dS_S.push_back(dS);
    if (r.finite_beta) {
      r.Sigma.push_back(dS - r.beta * Q);
      r.bSigma.push_back(dS + r.beta * bQf);
      r.Sigma_minus_bSigma.push_back(-r.beta * (Q + bQf));
      r.minus_beta_selfwork.push_back(-r.beta * Ws);
    } else {
      // beta = inf: finite only when the heat pieces vanish
      const double inf = std::numeric_limits<double>::infinity();
      r.Sigma.push_back(Q == 0.0 ? dS : (Q < 0.0 ? inf : -inf));
      r.bSigma.push_back(bQf == 0.0 ? dS : (bQf > 0.0 ? inf : -inf));
      r.Sigma_minus_bSigma.push_back(std::numeric_limits<double>::quiet_NaN());
      r.minus_beta_selfwork.push_back(Ws == 0.0 ? 0.0 : inf);
    }
  }
  return r;
}

inline std::vector<double> sigma_standard(const EntropyReport& r) { return r.Sigma; }
inline std::vector<double> sigma_bipartite(const EntropyReport& r) { return r.bSigma; }

struct SmallInstanceEntropy {
  double Sigma_re = 0.0;
  double bSigma_re = 0.0;
  double Sigma_clausius = 0.0;
  double bSigma_clausius = 0.0;
  double mutual_information = 0.0;
};

// Exact joint state of atom x unit_0 x unit_1 after up to two collisions and
// the relative entropies against the thermal-displaced and the
// atom-displaced field references.
inline SmallInstanceEntropy small_instance_relative_entropy(const ModelParams& p, int d_small, int n_collisions,
                                                            const CplxMatrix& s0) {
  if (d_small < 2 || d_small > 5) throw MemoryGuard("small_instance_relative_entropy: d_small must be in [2, 5]");
  if (n_collisions < 0 || n_collisions > 2) throw ConfigError("n_collisions must be 0, 1 or 2");
  if (!std::isfinite(p.beta())) throw ConfigError("small_instance_relative_entropy needs nbar > 0");
  const std::size_t d = static_cast<std::size_t>(d_small);
  const double beta = p.beta();
  const CplxMatrix V = build_Vn(p, d_small);
  const CplxMatrix U = matexp(cplx(0.0, -1.0) * V);
  const UnitState u0 = displaced_thermal(unit_amplitude(0, p), p.nbar, d_small);
  const UnitState u1 = displaced_thermal(unit_amplitude(1, p), p.nbar, d_small);

  // U acting on (atom, unit_1) inside (atom, unit_0, unit_1)
  CplxMatrix U1(2 * d * d, 2 * d * d);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t k1 = 0; k1 < d; ++k1)
      for (std::size_t a2 = 0; a2 < 2; ++a2)
        for (std::size_t k2 = 0; k2 < d; ++k2) {
          const cplx u = U(a * d + k1, a2 * d + k2);
          if (u == 0.0) continue;
          for (std::size_t k0 = 0; k0 < d; ++k0) U1((a * d + k0) * d + k1, (a2 * d + k0) * d + k2) = u;
        }
  const CplxMatrix U0 = kron(U, CplxMatrix::identity(d));

  CplxMatrix rho = kron(s0, kron(u0.rho, u1.rho));
  CplxMatrix s = s0;
  cplx phi[2] = {0.0, 0.0};
  double Q = 0.0, bQf = 0.0;
  const CplxMatrix* units[2] = {&u0.rho, &u1.rho};
  for (int k = 0; k < n_collisions; ++k) {
    phi[k] = -std::sqrt(p.gamma * p.dt) * sigma_minus_mean(s);
    const CollisionDeltas cd = split_collision(V, U, s, *units[k]);
    const double t = time_of(k, p);
    const LedgerIncrement inc = bipartite_flows(cd, s, t, p);
    const CplxMatrix& Uk = k == 0 ? U0 : U1;
    rho = mul(mul(Uk, rho), Uk.adjoint());
    const CplxMatrix s_next = partial_trace(rho, 2, d * d, Keep::A);
    const double dV = coupling_energy(s_next, t + p.dt, p) - coupling_energy(s, t, p);
    Q += inc.dU_S + dV - inc.dW;
    bQf += inc.dbQ_f;
    s = s_next;
  }
  const CplxMatrix rf = partial_trace(rho, 2, d * d, Keep::B);
  auto reference = [&](cplx shift0, cplx shift1) {
    const UnitState a = displaced_thermal(unit_amplitude(0, p) + shift0, p.nbar, d_small);
    const UnitState b = displaced_thermal(unit_amplitude(1, p) + shift1, p.nbar, d_small);
    return kron(s, kron(a.rho, b.rho));
  };
  SmallInstanceEntropy r;
  const double dS = von_neumann(s) - von_neumann(s0);
  r.Sigma_re = relative_entropy(rho, reference(0.0, 0.0));
  r.bSigma_re = relative_entropy(rho, reference(phi[0], phi[1]));
  r.Sigma_clausius = dS - beta * Q;
  r.bSigma_clausius = dS + beta * bQf;
  r.mutual_information = von_neumann(s) + von_neumann(rf) - von_neumann(rho);
  return r;
}

struct SelfworkProbe {
  double epsilon = 0.0;
  double max_value = 0.0;  // in gamma*hbar*omega0
  Bloch argmax;
  double bound = 0.0;
  double positive_fraction = 0.0;
  long points = 0;
};

// Lattice sweep of the Bloch ball at resonance; values in gamma*hbar*omega0.
inline SelfworkProbe selfwork_sign_probe(const ModelParams& p, int per_axis = 101) {
  if (p.detuning() != 0.0) throw ConfigError("selfwork_sign_probe needs omegaL == omega0");
  if (per_axis < 3) throw ConfigError("selfwork_sign_probe needs at least 3 points per axis");
  SelfworkProbe r;
  r.epsilon = p.rabi / p.omega0;
  r.bound = 0.125 * (std::sqrt(1.0 + r.epsilon * r.epsilon) - 1.0);
  r.max_value = -std::numeric_limits<double>::infinity();
  long positive = 0;
  const double unit = p.gamma * p.omega0;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      for (int k = 0; k < per_axis; ++k) {
        const double x = -1.0 + 2.0 * i / (per_axis - 1);
        const double y = -1.0 + 2.0 * j / (per_axis - 1);
        const double z = -1.0 + 2.0 * k / (per_axis - 1);
        if (x * x + y * y + z * z > 1.0) continue;
        const double w = flows_from_rotating(bloch_state(x, y, z), p).W_self / unit;
        ++r.points;
        if (w > 0.0) ++positive;
        if (w > r.max_value) {
          r.max_value = w;
          r.argmax = {x, y, z};
        }
      }
  r.positive_fraction = static_cast<double>(positive) / static_cast<double>(r.points);
  return r;
}

}  // namespace acm
