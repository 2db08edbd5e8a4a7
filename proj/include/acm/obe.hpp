#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "acm/densemath.hpp"
#include "acm/errors.hpp"
#include "acm/model.hpp"

namespace acm {

// Column stacking: vec(rho)[i + 2j] = rho(i, j), so vec(A rho B) = (B^T x A) vec(rho).
inline CplxMatrix vec(const CplxMatrix& m) {
  CplxMatrix v(m.rows() * m.cols(), 1);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) v(i + m.rows() * j, 0) = m(i, j);
  return v;
}

inline CplxMatrix unvec(const CplxMatrix& v, std::size_t n = 2) {
  if (v.size() != n * n) throw DimensionError("unvec: vector length does not match " + std::to_string(n) + "x" + std::to_string(n));
  CplxMatrix m(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, j) = v.data()[i + n * j];
  return m;
}

struct Liouvillian {
  CplxMatrix mat{4, 4};
  bool rotating = true;
  ModelParams p;

  double rate_scale() const {
    return std::max({p.gamma * (2.0 * p.nbar + 1.0), std::abs(p.rabi), std::abs(p.detuning())});
  }
};

inline CplxMatrix rotating_hamiltonian(const ModelParams& p) {
  const auto q = qubit_ops(p);
  return (0.5 * p.detuning()) * q.sigma_z + cplx(0.0, 0.5 * p.rabi) * (q.sigma_plus - q.sigma_minus);
}

inline CplxMatrix hamiltonian_superop(const CplxMatrix& H) {
  const CplxMatrix I = CplxMatrix::identity(H.rows());
  return cplx(0.0, -1.0) * (kron(I, H) - kron(H.transpose(), I));
}

inline CplxMatrix dissipator_superop(const CplxMatrix& c) {
  const std::size_t n = c.rows();
  const CplxMatrix I = CplxMatrix::identity(n);
  const CplxMatrix cdc = mul(c.adjoint(), c);
  return kron(c.adjoint().transpose(), c) - 0.5 * kron(I, cdc) - 0.5 * kron(cdc.transpose(), I);
}

inline Liouvillian build_liouvillian(const ModelParams& p) {
  const auto q = qubit_ops(p);
  Liouvillian L;
  L.p = p;
  L.mat = hamiltonian_superop(rotating_hamiltonian(p)) +
          dissipator_superop(std::sqrt(p.gamma * (p.nbar + 1.0)) * q.sigma_minus) +
          dissipator_superop(std::sqrt(p.gamma * p.nbar) * q.sigma_plus);
  return L;
}

inline CplxMatrix apply(const Liouvillian& L, const CplxMatrix& s) { return unvec(mul(L.mat, vec(s))); }

inline std::vector<cplx> eigenvalues(const Liouvillian& L) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = L.mat(i, j);
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  return ev;
}

struct ObeSeries {
  std::vector<double> t;
  std::vector<CplxMatrix> states;  // frame rotating at omegaL
};

inline ObeSeries integrate(const Liouvillian& L, const CplxMatrix& s0, double t_end, double dt_ode,
                           long sample_every = 1) {
  const double limit = 0.05 / L.rate_scale();
  if (!(dt_ode > 0.0) || dt_ode > limit * (1.0 + 1e-12)) {
    throw StepSizeError("dt_ode = " + std::to_string(dt_ode) + " exceeds 0.05/max rate = " + std::to_string(limit));
  }
  if (sample_every < 1) sample_every = 1;
  const long steps = std::lround(t_end / dt_ode);
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
  ObeSeries out;
  CplxMatrix v = vec(s0);
  out.t.push_back(0.0);
  out.states.push_back(s0);
  for (long n = 0; n < steps; ++n) {
    const CplxMatrix k1 = mul(L.mat, v);
    const CplxMatrix k2 = mul(L.mat, v + (0.5 * h) * k1);
    const CplxMatrix k3 = mul(L.mat, v + (0.5 * h) * k2);
    const CplxMatrix k4 = mul(L.mat, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((n + 1) % sample_every == 0 || n + 1 == steps) {
      out.t.push_back(static_cast<double>(n + 1) * h);
      out.states.push_back(unvec(v));
    }
  }
  for (const auto& s : out.states) require_density(s, "OBE sample");
  return out;
}

inline CplxMatrix steady_state(const Liouvillian& L) {
  const auto ev = eigenvalues(L);
  if (std::abs(ev[1]) < 1e-10) throw DegenerateNullSpace("Liouvillian has a degenerate null space");
  CplxMatrix A = L.mat;
  CplxMatrix b(4, 1);
  // replace the first equation by the trace condition
  for (std::size_t j = 0; j < 4; ++j) A(0, j) = 0.0;
  A(0, 0) = 1.0;
  A(0, 3) = 1.0;
  b(0, 0) = 1.0;
  CplxMatrix s = unvec(solve(A, b));
  const cplx c = 0.5 * (s(0, 1) + std::conj(s(1, 0)));
  s(0, 1) = c;
  s(1, 0) = std::conj(c);
  s(0, 0) = s(0, 0).real();
  s(1, 1) = s(1, 1).real();
  require_density(s, "OBE steady state");
  return s;
}

inline CplxMatrix checked_inverse(const CplxMatrix& A, const std::string& what) {
  CplxMatrix inv;
  try {
    inv = inverse(A);
  } catch (const ConditioningError&) {
    throw ConditioningError(what + ": singular matrix");
  }
  const double cond = norm1(A) * norm1(inv);
  if (!std::isfinite(cond) || cond > 1e12) {
    throw ConditioningError(what + ": condition number " + std::to_string(cond));
  }
  return inv;
}

// (z Id - L)^{-1}
inline CplxMatrix resolvent(const Liouvillian& L, cplx z) {
  return checked_inverse(z * CplxMatrix::identity(4) - L.mat, "resolvent");
}

// (z Id - L + k |rho_ss><<I|)^{-1}: agrees with the plain resolvent on
// traceless inputs and stays regular at z = 0.
inline CplxMatrix deflated_resolvent(const Liouvillian& L, cplx z, const CplxMatrix& rho_ss) {
  const CplxMatrix r = vec(rho_ss);
  CplxMatrix tr(1, 4);
  tr(0, 0) = 1.0;
  tr(0, 3) = 1.0;
  const double k = L.rate_scale();
  return checked_inverse(z * CplxMatrix::identity(4) - L.mat + k * mul(r, tr), "deflated resolvent");
}

inline CplxMatrix propagator(const Liouvillian& L, double tau) { return matexp(tau * L.mat); }

}  // namespace acm
