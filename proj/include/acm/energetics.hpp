#pragma once

#include <cmath>
#include <vector>

#include "acm/collider.hpp"
#include "acm/densemath.hpp"
#include "acm/model.hpp"
#include "acm/obe.hpp"

namespace acm {

// Atom averages in the frame rotating at omegaL.
struct AtomAverages {
  cplx c = 0.0;       // <sigma_->
  double x = 0.0;     // 2 Re c
  double z = 0.0;     // <sigma_z>
  double m = 0.0;     // |<sigma_->|^2
  double hd = 0.0;    // <H_D> = Omega Im c
};

inline AtomAverages averages_rotating(const CplxMatrix& s_rot, const ModelParams& p) {
  AtomAverages a;
  a.c = sigma_minus_mean(s_rot);
  a.x = 2.0 * a.c.real();
  a.z = sigma_z_mean(s_rot);
  a.m = std::norm(a.c);
  a.hd = p.rabi * a.c.imag();
  return a;
}

inline AtomAverages averages_interaction(const CplxMatrix& s_int, double t, const ModelParams& p) {
  return averages_rotating(to_rotating(s_int, t, p), p);
}

// Instantaneous flows (energy per time, hbar = 1).
struct Flows {
  double Udot_S = 0.0;
  double Udot_f = 0.0;
  double Vdot = 0.0;
  double bW_S = 0.0;
  double bW_f = 0.0;
  double bQ_S = 0.0;
  double bQ_f = 0.0;
  double W = 0.0;
  double Q = 0.0;
  double W_self = 0.0;
};

inline Flows flows_from_averages(const AtomAverages& a, const ModelParams& p) {
  const double g = p.gamma, w0 = p.omega0, wL = p.omegaL, nb = p.nbar, Om = p.rabi, de = p.detuning();
  Flows f;
  f.Udot_S = 0.5 * w0 * Om * a.x - g * w0 * (nb + 0.5) * a.z - 0.5 * g * w0;
  f.Vdot = -0.5 * de * Om * a.x - g * (nb + 0.5) * a.hd;
  f.Udot_f = -f.Udot_S - f.Vdot;
  f.bW_S = 0.5 * w0 * Om * a.x - g * w0 * a.m;
  f.bW_f = -0.5 * wL * Om * a.x - 0.5 * g * a.hd * a.z + g * w0 * a.m;
  f.bQ_S = g * w0 * a.m - 0.5 * g * w0 - g * w0 * (nb + 0.5) * a.z;
  f.bQ_f = -g * w0 * a.m + 0.5 * g * w0 + g * (nb + 0.5) * (w0 * a.z + a.hd) + 0.5 * g * a.hd * a.z;
  f.W = 0.5 * wL * Om * a.x;
  f.Q = -g * w0 * (nb + 0.5) * a.z - 0.5 * g * w0 - g * (nb + 0.5) * a.hd;
  f.W_self = 0.5 * g * a.hd * a.z - g * w0 * a.m;
  return f;
}

// s is the engine (interaction-picture) state at time t.
inline Flows flows_from_bloch(const CplxMatrix& s, double t, const ModelParams& p) {
  return flows_from_averages(averages_interaction(s, t, p), p);
}

inline Flows flows_from_rotating(const CplxMatrix& s_rot, const ModelParams& p) {
  return flows_from_averages(averages_rotating(s_rot, p), p);
}

struct StandardFlows {
  double Wdot = 0.0;
  double Qdot = 0.0;
  double Udot = 0.0;
};

inline StandardFlows standard_flows(const CplxMatrix& s, double t, const ModelParams& p) {
  const Flows f = flows_from_bloch(s, t, p);
  return {f.W, f.Q, f.W + f.Q};
}

inline double coupling_energy(const CplxMatrix& s, double t, const ModelParams& p) {
  return averages_interaction(s, t, p).hd;
}

inline double saturation(const ModelParams& p) {
  const double de = p.detuning();
  const double g = p.gamma * (2.0 * p.nbar + 1.0);
  return 2.0 * p.rabi * p.rabi / (4.0 * de * de + g * g);
}

// Rabi frequency that gives saturation s at the given detuning.
inline double rabi_for_saturation(double s, const ModelParams& p) {
  const double de = p.detuning();
  const double g = p.gamma * (2.0 * p.nbar + 1.0);
  return std::sqrt(0.5 * s * (4.0 * de * de + g * g));
}

// Steady-state flows in units of gamma*hbar*omega0.
inline double steady_bwork(double s, double nbar) {
  const double k = 1.0 / ((2.0 * nbar + 1.0) * (2.0 * nbar + 1.0));
  return 0.5 * s / ((1.0 + s) * (1.0 + s)) * (1.0 + s - k);
}

inline double steady_selfwork(double s, double nbar) {
  return -s / (2.0 * (2.0 * nbar + 1.0) * (2.0 * nbar + 1.0) * (1.0 + s) * (1.0 + s));
}

inline Flows steady_flows(const ModelParams& p) { return flows_from_rotating(steady_state(build_liouvillian(p)), p); }

// Trace of H_S x I and I x N against a joint-space operator.
inline double atom_energy_of(const CplxMatrix& m, const ModelParams& p) {
  const std::size_t d = m.rows() / 2;
  double e = 0.0;
  for (std::size_t k = 0; k < d; ++k) e += (m(EXCITED * d + k, EXCITED * d + k) - m(GROUND * d + k, GROUND * d + k)).real();
  return 0.5 * p.omega0 * e;
}

inline double photon_number_of(const CplxMatrix& m) {
  const std::size_t d = m.rows() / 2;
  double n = 0.0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t k = 0; k < d; ++k) n += static_cast<double>(k) * m(a * d + k, a * d + k).real();
  return n;
}

// Increments of one collision. Raw quantities come from traces against the
// deltas; the field side adds the lab-frame terms evaluated on the pre-state.
struct LedgerIncrement {
  double dbW_S = 0.0;
  double dbQ_S = 0.0;
  double dbW_f = 0.0;
  double dbQ_f = 0.0;
  double dU_S = 0.0;
  double dU_S_exact = 0.0;
  double dU_f = 0.0;
  double dN_otimes = 0.0;
  double dN_chi = 0.0;
  double dW = 0.0;
  double dW_self = 0.0;
};

inline LedgerIncrement bipartite_flows(const CollisionDeltas& d, const CplxMatrix& s_pre, double t,
                                       const ModelParams& p) {
  const AtomAverages a = averages_interaction(s_pre, t, p);
  const double dt = p.dt, g = p.gamma;
  LedgerIncrement r;
  r.dbW_S = atom_energy_of(d.dotimes, p);
  r.dbQ_S = atom_energy_of(d.dchi, p);
  r.dU_S = r.dbW_S + r.dbQ_S;
  r.dU_S_exact = atom_energy_of(d.dexact, p);
  r.dN_otimes = photon_number_of(d.dotimes);
  r.dN_chi = photon_number_of(d.dchi);
  r.dbW_f = p.omega0 * r.dN_otimes + dt * (0.5 * p.detuning() * p.rabi * a.x - 0.5 * g * a.hd * a.z);
  r.dbQ_f = p.omega0 * r.dN_chi + dt * (g * (p.nbar + 0.5) * a.hd + 0.5 * g * a.hd * a.z);
  r.dU_f = r.dbW_f + r.dbQ_f;
  r.dW = dt * 0.5 * p.omegaL * p.rabi * a.x;
  r.dW_self = atom_energy_of(d.d2f, p) + dt * 0.5 * g * a.hd * a.z;
  return r;
}

struct LedgerRow {
  double t = 0.0;
  LedgerIncrement inc;
  double dV = 0.0;
  double dQ = 0.0;
  double balance = 0.0;
  double frame = 0.0;
};

inline double ledger_value(const LedgerRow& r, int col) {
  switch (col) {
    case 0: return r.inc.dU_S;
    case 1: return r.inc.dU_f;
    case 2: return r.dV;
    case 3: return r.inc.dW;
    case 4: return r.dQ;
    case 5: return r.inc.dbW_S;
    case 6: return r.inc.dbW_f;
    case 7: return r.inc.dbQ_S;
    case 8: return r.inc.dbQ_f;
    case 9: return r.inc.dW_self;
    case 10: return r.balance;
    default: return r.frame;
  }
}

inline constexpr int LEDGER_COLUMNS = 12;
inline const char* const LEDGER_NAMES[LEDGER_COLUMNS] = {"U_S",  "U_f",  "V",    "W",      "Q",
                                                         "bW_S", "bW_f", "bQ_S", "bQ_f",
                                                         "W_self", "balance_residual", "frame_residual"};

// Observer that collects ledger rows. Steps in [from, to) with the given
// stride are evaluated with full deltas; cumulative totals weight each
// sampled increment by the stride, which is exact for stride 1.
class EnergyLedger : public Observer {
 public:
  EnergyLedger(long from = 0, long to = -1, long stride = 1) : from_(from), to_(to), stride_(stride < 1 ? 1 : stride) {}

  bool wants_deltas(long n) const override {
    return n >= from_ && (to_ < 0 || n < to_) && (n - from_) % stride_ == 0;
  }

  void on_step(const StepView& v) override {
    if (!v.full || !wants_deltas(v.n)) return;
    const ModelParams& p = v.p;
    LedgerRow row;
    row.t = v.t;
    row.inc = bipartite_flows(v.full->deltas, v.s_in, v.t, p);
    row.dV = coupling_energy(v.s_out, v.t + p.dt, p) - coupling_energy(v.s_in, v.t, p);
    row.dQ = row.inc.dU_S + row.dV - row.inc.dW;
    row.balance = row.inc.dbW_S + row.inc.dbW_f + row.inc.dbQ_S + row.inc.dbQ_f + row.dV;
    row.frame = row.inc.dU_f - p.omegaL * (row.inc.dN_otimes + row.inc.dN_chi);
    rows_.push_back(row);
    std::vector<double> c(LEDGER_COLUMNS);
    for (int k = 0; k < LEDGER_COLUMNS; ++k) {
      total_[k] += static_cast<double>(stride_) * ledger_value(row, k);
      c[k] = total_[k];
    }
    cumulative_.push_back(std::move(c));
  }

  const std::vector<LedgerRow>& rows() const { return rows_; }
  const std::vector<std::vector<double>>& cumulative() const { return cumulative_; }
  long stride() const { return stride_; }

  // Mean of column col over the sampled rows, as a flow (per unit time).
  double mean_flow(int col, const ModelParams& p) const {
    if (rows_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rows_) s += ledger_value(r, col);
    return s / (static_cast<double>(rows_.size()) * p.dt);
  }

 private:
  long from_, to_, stride_;
  std::vector<LedgerRow> rows_;
  std::vector<std::vector<double>> cumulative_;
  double total_[LEDGER_COLUMNS] = {};
};

}  // namespace acm
