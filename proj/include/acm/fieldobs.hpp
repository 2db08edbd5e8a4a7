#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "acm/collider.hpp"
#include "acm/densemath.hpp"
#include "acm/energetics.hpp"
#include "acm/model.hpp"
#include "acm/obe.hpp"

namespace acm {

struct InOut {
  cplx b_in = 0.0;
  cplx b_out = 0.0;
};

// s is the engine (interaction-picture) state at time t; the input mean
// carries the same phase as the unit amplitudes, <b_in> = alpha_n / sqrt(dt).
inline InOut mean_in_out(const CplxMatrix& s, const ModelParams& p, double t) {
  InOut r;
  r.b_in = 0.5 * p.rabi / std::sqrt(p.gamma) * std::exp(cplx(0.0, p.detuning() * t));
  r.b_out = r.b_in - std::sqrt(p.gamma) * sigma_minus_mean(s);
  return r;
}

// Photon flows per unit time. n_in and n_out count photons above the flat
// thermal floor nbar/dt that every unit carries in and out.
struct PhotonFlows {
  double n_in = 0.0;
  double n_out = 0.0;
  double n_stim = 0.0;
  double n_spont = 0.0;
  double n_otimes = 0.0;
  double n_chi = 0.0;
};

inline PhotonFlows photon_flows_from(const InOut& io, const CplxMatrix& s, const ModelParams& p) {
  const double z = sigma_z_mean(s);
  const cplx c = sigma_minus_mean(s);
  const double m = std::norm(c);
  PhotonFlows f;
  f.n_in = std::norm(io.b_in);
  f.n_otimes = std::norm(io.b_out) - std::norm(io.b_in);
  f.n_stim = f.n_otimes - p.gamma * m;
  f.n_spont = p.gamma * ((p.nbar + 0.5) * z + 0.5);
  f.n_chi = f.n_spont - p.gamma * m;
  f.n_out = f.n_in + f.n_stim + f.n_spont;
  return f;
}

inline PhotonFlows photon_flows(const CplxMatrix& s, const ModelParams& p, double t) {
  return photon_flows_from(mean_in_out(s, p, t), s, p);
}

struct EnergyFlowIdentities {
  double Udot_S = 0.0;
  double Udot_f = 0.0;
  double bWdot_S = 0.0;
  double bWdot_f = 0.0;
  double bQdot_S = 0.0;
  double bQdot_f = 0.0;
};

// Photons leaving the atom are counted at omega0 on the atom side and at
// omegaL on the field side.
inline EnergyFlowIdentities energy_flow_identities(const PhotonFlows& f, const ModelParams& p) {
  const double dn = f.n_out - f.n_in;
  EnergyFlowIdentities e;
  e.Udot_S = -p.omega0 * dn;
  e.Udot_f = p.omegaL * dn;
  e.bWdot_S = -p.omega0 * f.n_otimes;
  e.bWdot_f = p.omegaL * f.n_otimes;
  e.bQdot_S = -p.omega0 * f.n_chi;
  e.bQdot_f = p.omegaL * f.n_chi;
  return e;
}

// Weight of the coherent line at omegaL, equal to n_otimes at steady state.
// s_ss is in the rotating frame, where it is time independent.
inline double elastic_weight(const CplxMatrix& s_ss, const ModelParams& p) {
  const cplx c = sigma_minus_mean(s_ss);
  return -p.rabi * c.real() + p.gamma * std::norm(c);
}

struct SpectrumResult {
  double elastic_weight = 0.0;
  std::vector<double> omega;
  std::vector<double> sdot_chi;
  double nbar_floor = 0.0;
  double max_imag = 0.0;
  double n_chi = 0.0;  // steady-state n_chi from the atom averages
  CplxMatrix s_ss{2, 2};
};

inline std::vector<double> default_spectrum_grid(const ModelParams& p, std::size_t points = 4001,
                                                 double span_factor = 40.0) {
  const double scale = std::max({p.gamma * (2.0 * p.nbar + 1.0), std::abs(p.rabi), std::abs(p.detuning())});
  const double half = span_factor * scale;
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = p.omegaL - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

// Regression source for the correlation spectrum:
// (nbar+1) dsigma_- rho - nbar rho dsigma_-, traceless.
inline CplxMatrix spectrum_source(const CplxMatrix& s_ss, const ModelParams& p) {
  const auto q = qubit_ops(p);
  const CplxMatrix ds = q.sigma_minus - sigma_minus_mean(s_ss) * CplxMatrix::identity(2);
  return (p.nbar + 1.0) * mul(ds, s_ss) - p.nbar * mul(s_ss, ds);
}

struct SpectrumPoint {
  double value = 0.0;
  double imag = 0.0;
};

inline SpectrumPoint spectrum_at(const Liouvillian& L, const CplxMatrix& s_ss, const CplxMatrix& X,
                                 double delta) {
  const auto q = qubit_ops(L.p);
  const CplxMatrix Y = unvec(mul(deflated_resolvent(L, cplx(0.0, delta), s_ss), vec(X)));
  const CplxMatrix Yt = unvec(mul(deflated_resolvent(L, cplx(0.0, -delta), s_ss), vec(X.adjoint())));
  const cplx F = expectation(q.sigma_plus, Y);
  const cplx Ft = expectation(q.sigma_minus, Yt);
  const cplx S = L.p.gamma / (2.0 * std::numbers::pi) * (F + Ft);
  return {S.real(), S.imag()};
}

inline SpectrumResult incoherent_spectrum(const CplxMatrix& s_ss, const ModelParams& p,
                                          const std::vector<double>& grid) {
  if (grid.size() < 2) throw ConfigError("spectrum grid needs at least 2 points");
  const Liouvillian L = build_liouvillian(p);
  const CplxMatrix X = spectrum_source(s_ss, p);
  SpectrumResult r;
  r.s_ss = s_ss;
  r.elastic_weight = elastic_weight(s_ss, p);
  r.nbar_floor = p.nbar / (2.0 * std::numbers::pi);
  r.n_chi = photon_flows(s_ss, p, 0.0).n_chi;
  r.omega = grid;
  r.sdot_chi.reserve(grid.size());
  for (double w : grid) {
    const SpectrumPoint sp = spectrum_at(L, s_ss, X, w - p.omegaL);
    r.sdot_chi.push_back(sp.value);
    r.max_imag = std::max(r.max_imag, std::abs(sp.imag));
  }
  return r;
}

inline SpectrumResult incoherent_spectrum(const ModelParams& p) {
  return incoherent_spectrum(steady_state(build_liouvillian(p)), p, default_spectrum_grid(p));
}

// Trapezoid over the grid plus the 1/w^2 tails beyond each end.
inline double spectrum_integral(const SpectrumResult& r) {
  const auto& w = r.omega;
  const auto& s = r.sdot_chi;
  const std::size_t n = w.size();
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) acc += 0.5 * (w[i] - w[i - 1]) * (s[i] + s[i - 1]);
  const double wc = 0.5 * (w.front() + w.back());
  acc += s.back() * (w.back() - wc) + s.front() * (wc - w.front());
  return acc;
}

// Integral of (omega - omegaL) S(omega), with the tail of the odd part added
// for a grid centred on omegaL.
inline double spectrum_first_moment(const SpectrumResult& r, double omegaL) {
  const auto& w = r.omega;
  const auto& s = r.sdot_chi;
  const std::size_t n = w.size();
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    acc += 0.5 * (w[i] - w[i - 1]) * ((w[i] - omegaL) * s[i] + (w[i - 1] - omegaL) * s[i - 1]);
  const double W = 0.5 * (w.back() - w.front());
  acc += (s.back() - s.front()) * W * W;
  return acc;
}

struct SpectralEnergetics {
  double bw_f_line = 0.0;  // weight of the omega * S_otimes delta line at omegaL
  std::vector<double> bq_density;
  double bq_f_integral = 0.0;
};

inline SpectralEnergetics spectral_energetics(const SpectrumResult& spec, const ModelParams& p) {
  SpectralEnergetics e;
  e.bw_f_line = p.omegaL * spec.elastic_weight;
  e.bq_density.resize(spec.omega.size());
  for (std::size_t i = 0; i < spec.omega.size(); ++i) e.bq_density[i] = spec.omega[i] * spec.sdot_chi[i];
  e.bq_f_integral = p.omegaL * spectrum_integral(spec) + spectrum_first_moment(spec, p.omegaL);
  return e;
}

// Largest local maximum of the sampled curve above omegaL, refined by
// golden-section search on the resolvent spectrum.
inline double sampled_upper_peak(const SpectrumResult& r, const ModelParams& p) {
  std::size_t best = r.omega.size();
  const double lo = p.omegaL + 0.5 * std::max(p.gamma, std::abs(p.rabi));
  for (std::size_t i = 1; i + 1 < r.omega.size(); ++i) {
    if (r.omega[i] <= lo) continue;
    if (r.sdot_chi[i] >= r.sdot_chi[i - 1] && r.sdot_chi[i] >= r.sdot_chi[i + 1]) {
      if (best == r.omega.size() || r.sdot_chi[i] > r.sdot_chi[best]) best = i;
    }
  }
  if (best == r.omega.size()) return std::numeric_limits<double>::quiet_NaN();
  const Liouvillian L = build_liouvillian(p);
  const CplxMatrix X = spectrum_source(r.s_ss, p);
  double a = r.omega[best - 1] - p.omegaL, b = r.omega[best + 1] - p.omegaL;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = spectrum_at(L, r.s_ss, X, c).value, fd = spectrum_at(L, r.s_ss, X, d).value;
  for (int it = 0; it < 80 && b - a > 1e-12 * (1.0 + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = spectrum_at(L, r.s_ss, X, c).value;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = spectrum_at(L, r.s_ss, X, d).value;
    }
  }
  return p.omegaL + 0.5 * (a + b);
}

struct SpectralLine {
  double center = 0.0;
  double half_width = 0.0;
};

// Line centres of the sampled curve from a least-squares rational fit
// S = P/Q with deg P = 5 and Q monic of degree 6, i.e. three Lorentzian lines
// with dispersive parts. Only samples within the fit window are used.
inline std::vector<SpectralLine> fit_spectral_lines(const SpectrumResult& r, const ModelParams& p,
                                                    double window_factor = 3.0) {
  const double sc = std::max(p.gamma, std::abs(p.rabi));
  const double W = window_factor * sc + std::abs(p.detuning());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.omega.size(); ++i)
    if (std::abs(r.omega[i] - p.omegaL) <= W) idx.push_back(i);
  if (idx.size() < 24) throw ConditioningError("fit_spectral_lines: too few samples in the fit window");
  const int nq = 6, np = 6;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), nq + np);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t row = 0; row < idx.size(); ++row) {
    const double u = (r.omega[idx[row]] - p.omegaL) / sc;
    const double S = r.sdot_chi[idx[row]];
    double pw = 1.0;
    for (int j = 0; j < nq; ++j) {
      A(static_cast<Eigen::Index>(row), j) = S * pw;
      if (j < np) A(static_cast<Eigen::Index>(row), nq + j) = -pw;
      pw *= u;
    }
    rhs(static_cast<Eigen::Index>(row)) = -S * pw;
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(nq, nq);
  for (int i = 1; i < nq; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < nq; ++i) comp(i, nq - 1) = -sol(i);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<SpectralLine> lines;
  for (int i = 0; i < nq; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (z.imag() <= 0.0) continue;
    lines.push_back({p.omegaL + z.real() * sc, z.imag() * sc});
  }
  std::sort(lines.begin(), lines.end(), [](const SpectralLine& a, const SpectralLine& b) { return a.center < b.center; });
  return lines;
}

inline double upper_sideband(const SpectrumResult& r, const ModelParams& p) {
  const auto lines = fit_spectral_lines(r, p);
  if (lines.empty()) return std::numeric_limits<double>::quiet_NaN();
  return lines.back().center;
}

// Apply a 4x4 column-stacked superoperator to the atom factor of an
// operator on atom x rest.
inline CplxMatrix apply_atom_superop(const CplxMatrix& S, const CplxMatrix& Y, std::size_t rest) {
  CplxMatrix out(Y.rows(), Y.cols());
  for (std::size_t k = 0; k < rest; ++k)
    for (std::size_t l = 0; l < rest; ++l) {
      cplx in[4];
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 2; ++i) in[i + 2 * j] = Y(i * rest + k, j * rest + l);
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 2; ++i) {
          cplx acc = 0.0;
          for (std::size_t c = 0; c < 4; ++c) acc += S(i + 2 * j, c) * in[c];
          out(i * rest + k, j * rest + l) = acc;
        }
    }
  return out;
}

// Interaction-picture OBE propagator from t0 to t1 as a superoperator.
inline CplxMatrix interaction_propagator(const Liouvillian& L, double t0, double t1) {
  const ModelParams& p = L.p;
  auto frame = [&](double t, double sign) {
    CplxMatrix F = CplxMatrix::identity(4);
    const cplx f = std::exp(cplx(0.0, -sign * p.detuning() * t));
    F(0 + 2 * 1, 0 + 2 * 1) = f;             // (e,g) entry
    F(1 + 2 * 0, 1 + 2 * 0) = std::conj(f);  // (g,e) entry
    return F;
  };
  return mul(frame(t1, -1.0), mul(propagator(L, t1 - t0), frame(t0, 1.0)));
}

struct TwoUnitResult {
  cplx direct = 0.0;   // Tr{b_m^dagger b_n Delta}, Delta from the full second-order change of collision n
  cplx otimes = 0.0;
  cplx chi = 0.0;
  cplx baseline = 0.0;  // same correlator without the first-collision change
};

// Units n = 0 and m = n + lag on atom x unit_n x unit_m. The atom starts in
// the OBE steady state, collides with unit n, evolves with the OBE map until
// t_m and then collides with unit m.
inline TwoUnitResult two_unit_oracle(const ModelParams& p, int d_small, long lag, bool force_product = false) {
  if (d_small < 2 || d_small > 6) throw MemoryGuard("two_unit_oracle: d_small must be in [2, 6]");
  if (lag < 0) throw ConfigError("two_unit_oracle: lag must be >= 0");
  const std::size_t d = static_cast<std::size_t>(d_small);
  const Liouvillian L = build_liouvillian(p);
  const CplxMatrix s = steady_state(L);  // equals the interaction-picture state at t = 0
  const CplxMatrix V = build_Vn(p, d_small);
  const CplxMatrix U = matexp(cplx(0.0, -1.0) * V);
  const UnitState un = displaced_thermal(unit_amplitude(0, p), p.nbar, d_small);
  const CplxMatrix rho = kron(s, un.rho);
  CollisionDeltas cd = split_collision(V, U, s, un.rho);
  if (force_product) cd.dchi = CplxMatrix(2 * d, 2 * d);
  const CplxMatrix direct = force_product ? cd.dotimes : dyson2(V, rho);
  const auto f = fock_ops(d_small);

  TwoUnitResult r;
  if (lag == 0) {
    const CplxMatrix nn = kron(CplxMatrix::identity(2), f.number);
    r.direct = expectation(nn, direct);
    r.otimes = expectation(nn, cd.dotimes);
    r.chi = expectation(nn, cd.dchi);
    r.baseline = expectation(nn, rho);
    return r;
  }
  const UnitState um = displaced_thermal(unit_amplitude(lag, p), p.nbar, d_small);
  const CplxMatrix E = interaction_propagator(L, p.dt, time_of(lag, p));
  // atom x unit_m x unit_n ordering keeps U_m a plain kron with the identity
  const CplxMatrix Um = kron(U, CplxMatrix::identity(d));
  // b_m^dagger b_n on (atom, unit_m, unit_n)
  const CplxMatrix obs = kron(CplxMatrix::identity(2), kron(f.b.adjoint(), f.b));
  auto correlate = [&](const CplxMatrix& Y) {
    const CplxMatrix Ye = apply_atom_superop(E, Y, d);
    // insert unit_m between the atom and unit_n
    CplxMatrix J(2 * d * d, 2 * d * d);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t a2 = 0; a2 < 2; ++a2)
          for (std::size_t k2 = 0; k2 < d; ++k2) {
            const cplx y = Ye(a * d + k, a2 * d + k2);
            if (y == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j)
              for (std::size_t j2 = 0; j2 < d; ++j2)
                J((a * d + j) * d + k, (a2 * d + j2) * d + k2) = y * um.rho(j, j2);
          }
    return expectation(obs, mul(mul(Um, J), Um.adjoint()));
  };
  r.direct = correlate(direct);
  r.otimes = correlate(cd.dotimes);
  r.chi = correlate(cd.dchi);
  r.baseline = correlate(rho);
  return r;
}

// Phase-summed oracle for the correlation spectrum at omega, using lags
// 0..max_lag of the chi correlator.
inline double two_unit_spectrum(const ModelParams& p, const std::vector<cplx>& g_chi, double omega) {
  // the correlator is taken in the frame rotating at omega0
  const double delta = omega - p.omega0;
  cplx acc = g_chi.empty() ? 0.0 : g_chi[0];
  for (std::size_t k = 1; k < g_chi.size(); ++k) {
    const cplx ph = std::exp(cplx(0.0, -delta * time_of(static_cast<long>(k), p)));
    acc += ph * g_chi[k] + std::conj(ph * g_chi[k]);
  }
  return acc.real() / (2.0 * std::numbers::pi);
}

}  // namespace acm
