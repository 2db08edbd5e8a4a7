#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "acm/collider.hpp"
#include "acm/config.hpp"
#include "acm/csv.hpp"
#include "acm/densemath.hpp"
#include "acm/energetics.hpp"
#include "acm/entropy.hpp"
#include "acm/fieldobs.hpp"
#include "acm/model.hpp"
#include "acm/obe.hpp"

namespace acm {

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v)); };
  j = nlohmann::json{{"name", c.name}, {"tolerance", num(c.tolerance)}, {"observed", num(c.observed)}, {"passed", c.passed}};
}

inline nlohmann::json report_json(const VerifyReport& r) {
  return nlohmann::json{{"passed", r.passed()}, {"checks", r.checks}};
}

// Replaceable pieces of the field-observable layer, so that a deliberately
// broken implementation can be run through the same suite.
struct VerifyHooks {
  std::function<InOut(const CplxMatrix&, const ModelParams&, double)> mean_in_out = acm::mean_in_out;
};

inline CplxMatrix random_density(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  CplxMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  CplxMatrix r = mul(a, a.adjoint());
  r *= 1.0 / r.trace().real();
  return r;
}

inline CplxMatrix random_bloch_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const double x = u(rng), y = u(rng), z = u(rng);
    if (x * x + y * y + z * z <= 1.0) return bloch_state(x, y, z);
  }
}

class Verifier {
 public:
  Verifier(const RunConfig& cfg, VerifyHooks hooks = {}) : cfg_(cfg), hooks_(std::move(hooks)), rng_(cfg.seed) {}

  VerifyReport run() {
    report_ = {};
    densemath_checks();
    model_checks();
    collider_checks();
    obe_checks();
    energetics_checks();
    fieldobs_checks();
    io_checks();
    entropy_checks();
    config_checks();
    return report_;
  }

 private:
  void add(const std::string& name, double observed, double tol) {
    report_.checks.push_back({name, tol, observed, std::isfinite(observed) && observed <= tol});
  }

  // the grid used by most checks: the configured point plus fixed ones
  std::vector<ModelParams> grid() const {
    std::vector<ModelParams> g;
    g.push_back(cfg_.params);
    for (double Om : {0.7, 2.0})
      for (double nb : {0.0, 0.2})
        for (double de : {0.0, 1.0}) {
          ModelParams p;
          p.rabi = Om;
          p.nbar = nb;
          p.omegaL = p.omega0 - de;
          g.push_back(p);
        }
    return g;
  }

  void densemath_checks() {
    double e1 = 0, e2 = 0, e3 = 0;
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
      CplxMatrix a(4, 4);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) a(i, j) = cplx(g(rng_), g(rng_));
      a *= 2.0 / norm1(a);
      e1 = std::max(e1, max_abs(mul(matexp(a), matexp(-a)) - CplxMatrix::identity(4)));
      const CplxMatrix ra = random_density(rng_, 2), rb = random_density(rng_, 3);
      e2 = std::max(e2, max_abs(partial_trace(kron(ra, rb), 2, 3, Keep::A) - ra));
      e3 = std::max(e3, std::abs(lindblad_J(a, random_density(rng_, 4)).trace()));
    }
    add("densemath.matexp_inverse", e1, 1e-10);
    add("densemath.partial_trace_product", e2, 1e-12);
    add("densemath.lindblad_traceless", e3, 1e-12);
  }

  void model_checks() {
    double e = 0, leak = 0, rec = 0;
    for (const auto& p : grid()) {
      const int d = effective_fock_dim(p);
      const UnitState u = fresh_unit(3, p, d);
      e = std::max(e, std::abs(expectation(fock_ops(d).b, u.rho) - u.alpha));
      leak = std::max(leak, u.truncation_leak);
      const double t = time_of(3, p);
      const cplx want = 0.5 * p.rabi * std::exp(cplx(0.0, -(p.omegaL - p.omega0) * t));
      rec = std::max(rec, std::abs(std::sqrt(p.gamma) * hooks_.mean_in_out(ground_state(), p, t).b_in - want));
    }
    add("model.unit_mean_amplitude", e, 1e-8);
    add("model.unit_truncation_leak", leak, LEAK_LIMIT);
    add("model.input_reconstruction", rec, 1e-10);
  }

  void collider_checks() {
    double herm = 0, split = 0, comm = 0;
    for (const auto& p : grid()) {
      const Collider c(p);
      const auto r = c.collide(random_bloch_state(rng_), 2);
      const auto& D = r.deltas;
      for (const CplxMatrix* m : {&D.d1, &D.dchi1, &D.d2S, &D.d2f, &D.d2chi, &D.dotimes, &D.dchi, &D.dexact})
        herm = std::max({herm, hermiticity_error(*m), std::abs(m->trace())});
      split = std::max(split, max_abs(D.dotimes + D.dchi - (D.d1 + D.d2S + D.d2f + D.d2chi)));
      const auto q = qubit_ops(p);
      const auto f = fock_ops(c.fock_dim());
      const CplxMatrix Nex = kron(mul(q.sigma_plus, q.sigma_minus), CplxMatrix::identity(c.fock_dim())) +
                             kron(CplxMatrix::identity(2), f.number);
      comm = std::max(comm, max_abs(commutator(c.V(), Nex)));
    }
    add("collider.deltas_hermitian_traceless", herm, 1e-10);
    add("collider.splitting_completeness", split, 1e-12);
    add("collider.excitation_conservation", comm, 1e-12);

    // exactness gap exponent over three halvings of dt
    std::vector<double> gaps, dts;
    for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) {
      ModelParams p;
      p.rabi = 2.0;
      p.dt = dt;
      const auto r = collide_exact(bloch_state(0.6, 0.2, 0.3), fresh_unit(0, p, 12), p);
      gaps.push_back(max_abs(r.deltas.dexact - r.deltas.dotimes - r.deltas.dchi));
      dts.push_back(dt);
    }
    add("collider.exactness_gap_exponent", std::abs(fit_slope(dts, gaps) - 1.5), 0.2);
  }

  static double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = std::log(x[i]), b = std::log(y[i]);
      sx += a;
      sy += b;
      sxx += a * a;
      sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  void obe_checks() {
    double trace_pres = 0, fixed = 0, traj = 0;
    for (const auto& p : grid()) {
      const Liouvillian L = build_liouvillian(p);
      CplxMatrix one(1, 4);
      one(0, 0) = 1.0;
      one(0, 3) = 1.0;
      trace_pres = std::max(trace_pres, max_abs(mul(one, L.mat)));
      const CplxMatrix ss = steady_state(L);
      const Collider c(p);
      fixed = std::max(fixed, max_abs(to_rotating(c.step_atom(ss, 0), p.dt, p) - ss) / std::pow(p.gamma * p.dt, 1.5));
      // short trajectory against RK4
      const long N = std::lround(2.0 / p.dt);
      const auto rec = run_trajectory(c, excited_state(), N, {}, {100});
      const auto ob = integrate(L, excited_state(), time_of(N, p), p.dt, 100);
      for (std::size_t i = 0; i < rec.t.size() && i < ob.t.size(); ++i)
        traj = std::max(traj, max_abs(rec.rotating(i) - ob.states[i]) / (p.gamma * p.dt));
    }
    add("obe.trace_preservation", trace_pres, 1e-12);
    add("obe.steady_state_collision_fixed_point", fixed, 10.0);
    add("obe.collision_vs_rk4_over_gamma_dt", traj, 5.0);
  }

  void energetics_checks() {
    double bal = 0, lim = 0, decomp = 0, first_law = 0;
    for (const auto& p : grid()) {
      const Collider c(p);
      EnergyLedger L;
      run_trajectory(c, bloch_state(0.5, -0.3, 0.4), 1000, {&L});
      lim = 10.0 * std::pow(p.gamma * p.dt, 1.5) * p.gamma * p.omega0;
      for (const auto& r : L.rows()) {
        bal = std::max(bal, std::abs(r.balance) / lim);
        first_law = std::max(first_law, std::abs(r.inc.dU_S - r.inc.dbW_S - r.inc.dbQ_S));
        // b-work on the field splits into minus the drive work and the self-work
        decomp = std::max(decomp, std::abs(r.inc.dbW_f + r.inc.dW + r.inc.dW_self) /
                                      (p.gamma * p.omega0 * p.dt));
      }
    }
    add("energetics.balance_residual_over_bound", bal, 1.0);
    add("energetics.atom_first_law", first_law, 1e-12);
    add("energetics.field_bwork_decomposition", decomp, 5.0 * std::sqrt(1e-3));

    double ss = 0;
    for (double s : {0.25, 1.0, 4.0}) {
      ModelParams p;
      p.rabi = rabi_for_saturation(s, p);
      const Flows f = steady_flows(p);
      ss = std::max(ss, std::abs(f.bW_S / (p.gamma * p.omega0) - steady_bwork(s, p.nbar)));
      ss = std::max(ss, std::abs(f.W_self / (p.gamma * p.omega0) - steady_selfwork(s, p.nbar)));
    }
    add("energetics.steady_closed_forms", ss, 1e-10);
  }

  void fieldobs_checks() {
    double sum = 0;
    for (const auto& p : grid())
      for (int k = 0; k < 100; ++k) {
        const CplxMatrix s = random_bloch_state(rng_);
        const PhotonFlows f = photon_flows_from(hooks_.mean_in_out(s, p, 0.37), s, p);
        const double m = p.gamma * std::norm(sigma_minus_mean(s));
        sum = std::max({sum, std::abs(f.n_out - f.n_in - f.n_stim - f.n_spont),
                        std::abs(f.n_out - f.n_in - f.n_otimes - f.n_chi), std::abs(f.n_otimes - f.n_stim - m),
                        std::abs(f.n_spont - f.n_chi - m)});
      }
    add("fieldobs.photon_sum_rules", sum, 1e-10);

    ModelParams p = cfg_.params;
    if (p.rabi == 0.0) p.rabi = 2.0;
    const SpectrumResult r = incoherent_spectrum(p);
    add("fieldobs.spectrum_integral_relative", std::abs(spectrum_integral(r) / r.n_chi - 1.0), 1e-3);
    add("fieldobs.spectrum_imaginary_part", r.max_imag, 1e-10);
    const PhotonFlows ss = photon_flows(r.s_ss, p, 0.0);
    add("fieldobs.elastic_weight_is_n_otimes", std::abs(r.elastic_weight - ss.n_otimes), 1e-10);
  }

  // Field-observable energetics against the collision engine.
  void io_checks() {
    double mean_err = 0, bw_err = 0, us_err = 0;
    for (const auto& p : grid()) {
      if (p.rabi == 0.0) continue;
      const Collider c(p);
      const CplxMatrix s = bloch_state(0.4, 0.3, -0.2);
      const long n = 7;
      const auto r = c.collide(s, n);
      const double t = time_of(n, p);
      const InOut io = hooks_.mean_in_out(s, p, t);
      const cplx b_unit = expectation(fock_ops(c.fock_dim()).b, r.unit_out) / std::sqrt(p.dt);
      const double scale = std::abs(io.b_in) + std::sqrt(p.gamma);
      mean_err = std::max(mean_err, std::abs(b_unit - io.b_out) / scale);
      const auto e = energy_flow_identities(photon_flows_from(io, s, p), p);
      const LedgerIncrement inc = bipartite_flows(r.deltas, s, t, p);
      const double unit = p.gamma * p.omega0;
      bw_err = std::max(bw_err, std::abs(e.bWdot_S - inc.dbW_S / p.dt) / unit);
      us_err = std::max(us_err, std::abs(e.Udot_S - inc.dU_S_exact / p.dt) / unit);
    }
    add("io.output_unit_mean", mean_err, 10.0 * 1e-3);
    add("io.atom_bwork_vs_engine", bw_err, 1e-2);
    add("io.atom_energy_balance_vs_engine", us_err, 1e-2);
  }

  void entropy_checks() {
    double neg_b = 0, neg_gap = 0;
    for (double nb : {0.1, 0.5}) {
      ModelParams p;
      p.nbar = nb;
      p.rabi = rabi_for_saturation(1.0, p);
      const Collider c(p);
      EnergyLedger L;
      const auto rec = run_trajectory(c, ground_state(), 3000, {&L}, {100});
      const auto e = entropy_report(rec, L);
      for (std::size_t i = 0; i < e.t.size(); ++i) {
        neg_b = std::max(neg_b, -e.bSigma[i]);
        neg_gap = std::max(neg_gap, -e.Sigma_minus_bSigma[i]);
      }
    }
    add("entropy.bsigma_nonnegative", neg_b, 1e-9);
    add("entropy.sigma_above_bsigma", neg_gap, 1e-9);
    ModelParams p;
    p.rabi = 0.01 * p.omega0;
    const auto probe = selfwork_sign_probe(p, 41);
    add("entropy.selfwork_bound_excess", probe.max_value - probe.bound, 1e-12);
  }

  void config_checks() {
    const nlohmann::json j = cfg_;
    const RunConfig back = j.get<RunConfig>();
    add("cli.config_roundtrip", back == cfg_ ? 0.0 : 1.0, 0.0);
  }

  RunConfig cfg_;
  VerifyHooks hooks_;
  std::mt19937_64 rng_;
  VerifyReport report_;
};

inline VerifyReport run_verification(const RunConfig& cfg, VerifyHooks hooks = {}) {
  Verifier v(cfg, std::move(hooks));
  return v.run();
}

}  // namespace acm
