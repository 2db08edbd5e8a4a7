#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "acm/densemath.hpp"
#include "acm/errors.hpp"
#include "acm/model.hpp"

namespace acm {

inline CplxMatrix build_Vn(const ModelParams& p, int d) {
  const auto q = qubit_ops(p);
  const auto f = fock_ops(d);
  const double g = std::sqrt(p.gamma * p.dt);
  return cplx(0.0, g) * (kron(q.sigma_plus, f.b) - kron(q.sigma_minus, f.b.adjoint()));
}

inline CplxMatrix build_Vn(const ModelParams& p) { return build_Vn(p, p.fock_dim); }

struct JointState {
  CplxMatrix rho;
  long step = 0;
  double time = 0.0;
};

struct CollisionDeltas {
  CplxMatrix d1;
  CplxMatrix dchi1;
  CplxMatrix d2S;
  CplxMatrix d2f;
  CplxMatrix d2chi;
  CplxMatrix dotimes;
  CplxMatrix dchi;
  CplxMatrix dexact;
};

struct CollisionResult {
  JointState post;
  CollisionDeltas deltas;
  CplxMatrix atom_out;
  CplxMatrix unit_out;
};

// Partial expectations <V>_f = Tr_f{V (I x eta)} and <V>_S = Tr_S{V (s x I)}.
inline CplxMatrix field_average(const CplxMatrix& V, const CplxMatrix& eta) {
  const std::size_t d = eta.rows();
  return partial_trace(mul(V, kron(CplxMatrix::identity(2), eta)), 2, d, Keep::A);
}

inline CplxMatrix atom_average(const CplxMatrix& V, const CplxMatrix& s) {
  const std::size_t d = V.rows() / 2;
  return partial_trace(mul(V, kron(s, CplxMatrix::identity(d))), 2, d, Keep::B);
}

inline CollisionDeltas split_collision(const CplxMatrix& V, const CplxMatrix& U, const CplxMatrix& s,
                                       const CplxMatrix& eta) {
  const std::size_t d = eta.rows();
  const CplxMatrix rho = kron(s, eta);
  const CplxMatrix Vf = kron(field_average(V, eta), CplxMatrix::identity(d));
  const CplxMatrix Vs = kron(CplxMatrix::identity(2), atom_average(V, s));
  const CplxMatrix W = V - Vf - Vs;
  const cplx mi(0.0, -1.0);

  CollisionDeltas c;
  c.d1 = mi * commutator(V, rho);
  c.dchi1 = mi * commutator(W, rho);
  c.d2S = -0.5 * commutator(V, commutator(Vf, rho));
  c.d2f = -0.5 * commutator(V, commutator(Vs, rho));
  c.d2chi = -0.5 * commutator(V, commutator(W, rho));

  const CplxMatrix d1S = partial_trace(c.d1, 2, d, Keep::A);
  const CplxMatrix d1f = partial_trace(c.d1, 2, d, Keep::B);
  c.dotimes = kron(d1S, eta) + kron(s, d1f) + c.d2S + c.d2f;
  c.dchi = c.dchi1 + c.d2chi;
  c.dexact = mul(mul(U, rho), U.adjoint()) - rho;
  return c;
}

// Second-order Dyson change -i[V,rho] - (1/2)[V,[V,rho]].
inline CplxMatrix dyson2(const CplxMatrix& V, const CplxMatrix& rho) {
  const CplxMatrix c1 = commutator(V, rho);
  return cplx(0.0, -1.0) * c1 - 0.5 * commutator(V, c1);
}

inline CollisionResult finish_collision(CollisionDeltas&& deltas, const CplxMatrix& s, const CplxMatrix& eta,
                                        long n, const ModelParams& p) {
  const std::size_t d = eta.rows();
  CollisionResult r;
  r.post.rho = kron(s, eta) + deltas.dexact;
  r.post.step = n + 1;
  r.post.time = time_of(n + 1, p);
  if (!looks_like_density(r.post.rho)) {
    throw NumericalDegradation("collision " + std::to_string(n) + ": joint state left the density-matrix set");
  }
  r.atom_out = partial_trace(r.post.rho, 2, d, Keep::A);
  r.unit_out = partial_trace(r.post.rho, 2, d, Keep::B);
  r.deltas = std::move(deltas);
  return r;
}

// Uncached single collision; the Fock dimension is taken from the unit.
inline CollisionResult collide_exact(const CplxMatrix& s, const UnitState& unit, const ModelParams& p, long n = 0) {
  if (s.rows() != 2 || !s.is_square()) throw DimensionError("collide_exact: atom state must be 2x2");
  const int d = static_cast<int>(unit.rho.rows());
  const CplxMatrix V = build_Vn(p, d);
  const CplxMatrix U = matexp(cplx(0.0, -1.0) * V);
  return finish_collision(split_collision(V, U, s, unit.rho), s, unit.rho, n, p);
}

inline std::pair<CplxMatrix, CplxMatrix> step_reduced(const CplxMatrix& s, const UnitState& unit,
                                                      const ModelParams& p) {
  auto r = collide_exact(s, unit, p);
  return {std::move(r.atom_out), std::move(r.unit_out)};
}

// Value-type engine. Caches V, U, the resonant unit eta_0 and the exact atom
// map of one collision against eta_0. Later units differ from eta_0 by the
// phase rotation exp(i phi N) with phi = delta t_n, and because U conserves
// P_e + N that rotation moves onto the atom as Z = exp(i phi P_e).
class Collider {
 public:
  explicit Collider(const ModelParams& p, bool auto_dim = true)
      : p_(p), d_(auto_dim ? effective_fock_dim(p) : p.fock_dim) {
    p_.validate();
    V_ = build_Vn(p_, d_);
    U_ = matexp(cplx(0.0, -1.0) * V_);
    unit0_ = displaced_thermal(unit_amplitude(0, p_), p_.nbar, d_);
    if (unit0_.truncation_leak >= LEAK_LIMIT) {
      throw NumericalDegradation("unit truncation leak " + std::to_string(unit0_.truncation_leak) +
                                 " at fock_dim " + std::to_string(d_));
    }
    const CplxMatrix Ud = U_.adjoint();
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        CplxMatrix e(2, 2);
        e(i, j) = 1.0;
        const CplxMatrix out = mul(mul(U_, kron(e, unit0_.rho)), Ud);
        map_[2 * i + j] = partial_trace(out, 2, static_cast<std::size_t>(d_), Keep::A);
      }
  }

  const ModelParams& params() const { return p_; }
  int fock_dim() const { return d_; }
  const CplxMatrix& V() const { return V_; }
  const CplxMatrix& U() const { return U_; }

  double phase(long n) const { return p_.detuning() * time_of(n, p_); }

  UnitState unit(long n) const {
    const double phi = phase(n);
    if (phi == 0.0) return unit0_;
    UnitState u = unit0_;
    u.alpha = unit_amplitude(n, p_);
    for (int j = 0; j < d_; ++j)
      for (int k = 0; k < d_; ++k) u.rho(j, k) *= std::exp(cplx(0.0, phi * (j - k)));
    return u;
  }

  // Reduced atom after collision n, without building the joint state.
  CplxMatrix step_atom(const CplxMatrix& s, long n) const {
    const double phi = phase(n);
    const cplx z = std::exp(cplx(0.0, phi));
    // s' = Z^dagger s Z only touches the coherences
    CplxMatrix in = s;
    in(EXCITED, GROUND) *= std::conj(z);
    in(GROUND, EXCITED) *= z;
    CplxMatrix out(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) out += in(i, j) * map_[2 * i + j];
    out(EXCITED, GROUND) *= z;
    out(GROUND, EXCITED) *= std::conj(z);
    return out;
  }

  CollisionResult collide(const CplxMatrix& s, long n) const {
    const UnitState u = unit(n);
    return finish_collision(split_collision(V_, U_, s, u.rho), s, u.rho, n, p_);
  }

 private:
  ModelParams p_;
  int d_;
  CplxMatrix V_{1, 1};
  CplxMatrix U_{1, 1};
  UnitState unit0_;
  std::array<CplxMatrix, 4> map_{CplxMatrix(2, 2), CplxMatrix(2, 2), CplxMatrix(2, 2), CplxMatrix(2, 2)};
};

struct StepView {
  long n;
  double t;
  const ModelParams& p;
  const CplxMatrix& s_in;   // interaction picture, at t_n
  const CplxMatrix& s_out;  // interaction picture, at t_{n+1}
  const CollisionResult* full;  // null unless some observer asked for deltas
  const Collider& engine;
};

class Observer {
 public:
  virtual ~Observer() = default;
  virtual bool wants_deltas(long n) const {
    (void)n;
    return false;
  }
  virtual void on_step(const StepView& v) = 0;
};

struct TrajectoryOptions {
  long record_stride = 1;
  int check_every = 1000;
};

struct TrajectoryRecord {
  ModelParams p;
  int fock_dim = 0;
  std::vector<double> t;
  std::vector<CplxMatrix> states;  // interaction picture
  std::vector<cplx> sigma_minus;   // <sigma_-> in the interaction picture at every t_n, n = 0..N
  CplxMatrix final_state{2, 2};

  CplxMatrix rotating(std::size_t i) const { return to_rotating(states[i], t[i], p); }
  Bloch bloch(std::size_t i) const { return bloch_of(rotating(i)); }
};

inline TrajectoryRecord run_trajectory(const Collider& engine, const CplxMatrix& s0, long n_steps,
                                       const std::vector<Observer*>& observers = {},
                                       TrajectoryOptions opts = {}) {
  const ModelParams& p = engine.params();
  require_density(s0, "initial atom state");
  if (opts.record_stride < 1) opts.record_stride = 1;
  TrajectoryRecord rec;
  rec.p = p;
  rec.fock_dim = engine.fock_dim();
  rec.sigma_minus.reserve(static_cast<std::size_t>(n_steps) + 1);
  CplxMatrix s = s0;
  rec.t.push_back(0.0);
  rec.states.push_back(s);
  rec.sigma_minus.push_back(sigma_minus_mean(s));
  for (long n = 0; n < n_steps; ++n) {
    bool want = false;
    for (const auto* o : observers) want = want || o->wants_deltas(n);
    CplxMatrix next(2, 2);
    std::unique_ptr<CollisionResult> full;
    if (want) {
      full = std::make_unique<CollisionResult>(engine.collide(s, n));
      next = full->atom_out;
    } else {
      next = engine.step_atom(s, n);
    }
    // keep the atom exactly Hermitian with unit trace against round-off drift
    const cplx c = 0.5 * (next(EXCITED, GROUND) + std::conj(next(GROUND, EXCITED)));
    next(EXCITED, GROUND) = c;
    next(GROUND, EXCITED) = std::conj(c);
    const double tr = (next(EXCITED, EXCITED) + next(GROUND, GROUND)).real();
    next *= 1.0 / tr;
    if (opts.check_every > 0 && (n % opts.check_every == 0 || n + 1 == n_steps)) {
      require_density(next, "atom state after collision " + std::to_string(n));
    }
    const StepView view{n, time_of(n, p), p, s, next, full.get(), engine};
    for (auto* o : observers) o->on_step(view);
    s = std::move(next);
    rec.sigma_minus.push_back(sigma_minus_mean(s));
    if ((n + 1) % opts.record_stride == 0 || n + 1 == n_steps) {
      rec.t.push_back(time_of(n + 1, p));
      rec.states.push_back(s);
    }
  }
  rec.final_state = s;
  return rec;
}

inline TrajectoryRecord run_trajectory(const ModelParams& p, const CplxMatrix& s0, long n_steps,
                                       const std::vector<Observer*>& observers = {},
                                       TrajectoryOptions opts = {}) {
  const Collider engine(p);
  return run_trajectory(engine, s0, n_steps, observers, opts);
}

}  // namespace acm
