#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "acm/collider.hpp"
#include "acm/energetics.hpp"
#include "acm/entropy.hpp"
#include "acm/verify.hpp"

using namespace acm;

namespace {

ModelParams params(double rabi, double nbar = 0.0, double delta = 0.0) {
  ModelParams p;
  p.rabi = rabi;
  p.nbar = nbar;
  p.omegaL = p.omega0 - delta;
  return p;
}

struct Simulated {
  TrajectoryRecord rec;
  EnergyLedger ledger;
  EntropyReport report;
};

Simulated run(const ModelParams& p, const CplxMatrix& s0, double t_total, long stride = 100) {
  Simulated r;
  TrajectoryOptions o;
  o.record_stride = stride;
  r.rec = run_trajectory(p, s0, std::lround(t_total / p.dt), {&r.ledger}, o);
  r.report = entropy_report(r.rec, r.ledger);
  return r;
}

double binary_entropy(double q) { return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q); }

}  // namespace

TEST(VonNeumann, Examples) {
  EXPECT_NEAR(von_neumann(excited_state()), 0.0, 1e-15);
  EXPECT_NEAR(von_neumann(bloch_state(0.6, 0.0, 0.8)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann(0.5 * CplxMatrix::identity(2)), std::log(2.0), 1e-15);
  const double nb = 0.5;
  const CplxMatrix th = steady_state(build_liouvillian(params(0.0, nb)));
  EXPECT_NEAR(von_neumann(th), binary_entropy(nb / (2.0 * nb + 1.0)), 1e-12);
  EXPECT_NEAR(von_neumann(th), binary_entropy(0.25), 1e-12);
}

TEST(RelativeEntropy, KleinInequalityAndSupport) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const CplxMatrix a = random_density(rng, 3), b = random_density(rng, 3);
    EXPECT_GE(relative_entropy(a, b), -1e-12);
    EXPECT_NEAR(relative_entropy(a, a), 0.0, 1e-10);
  }
  EXPECT_TRUE(std::isinf(relative_entropy(excited_state(), ground_state())));
  // diagonal pair reduces to the classical divergence
  const CplxMatrix a = CplxMatrix::diagonal({0.3, 0.7}), b = CplxMatrix::diagonal({0.6, 0.4});
  EXPECT_NEAR(relative_entropy(a, b), 0.3 * std::log(0.5) + 0.7 * std::log(1.75), 1e-14);
}

TEST(EntropyProduction, NoDynamicsGivesZero) {
  const ModelParams p = params(0.0, 0.3);
  const CplxMatrix th = steady_state(build_liouvillian(p));
  const Simulated r = run(p, th, 1.0);
  for (std::size_t i = 0; i < r.report.t.size(); ++i) {
    EXPECT_NEAR(r.report.Sigma[i], 0.0, 1e-9);
    EXPECT_NEAR(r.report.bSigma[i], 0.0, 1e-9);
  }
}

TEST(EntropyProduction, ZeroTemperatureSentinels) {
  const ModelParams p = params(0.0);
  const Simulated quiet = run(p, ground_state(), 0.5);
  EXPECT_FALSE(quiet.report.finite_beta);
  EXPECT_EQ(quiet.report.Sigma.back(), 0.0);
  const Simulated decay = run(p, excited_state(), 0.5);
  EXPECT_TRUE(std::isinf(decay.report.Sigma.back()));
  EXPECT_GT(decay.report.Sigma.back(), 0.0);
}

TEST(EntropyProduction, SecondLawsOnTheResonantGrid) {
  for (double nb : {0.1, 0.2, 0.5})
    for (double s : {0.25, 1.0, 4.0}) {
      ModelParams p = params(0.0, nb);
      p.rabi = rabi_for_saturation(s, p);
      const Simulated r = run(p, ground_state(), 10.0);
      const double bw = p.beta() * p.omega0;
      // O(gamma dt) per unit time on the scale beta*gamma*omega0
      const double eq_tol = p.gamma * p.dt * bw * p.gamma * r.report.t.back();
      for (std::size_t i = 0; i < r.report.t.size(); ++i) {
        EXPECT_GE(r.report.Sigma[i], -1e-9);
        EXPECT_GE(r.report.bSigma[i], -1e-9);
        EXPECT_LE(r.report.bSigma[i], r.report.Sigma[i] + 1e-9);
        EXPECT_NEAR(r.report.Sigma_minus_bSigma[i], r.report.minus_beta_selfwork[i], eq_tol);
      }
    }
}

TEST(EntropyProduction, ResonantBipartiteFormUsesAtomHeat) {
  ModelParams p = params(1.2, 0.2);
  const Simulated r = run(p, bloch_state(0.3, 0.0, 0.5), 4.0);
  const auto& cum = r.ledger.cumulative();
  const double dS = r.report.dS_S.back();
  // resonance: bSigma = dS - beta * bQ_S, column 7 is the atom b-heat
  const double bQS = cum[cum.size() - 1][7];
  EXPECT_NEAR(r.report.bSigma.back(), dS - p.beta() * bQS, 5.0 * p.gamma * p.dt * p.beta() * p.omega0);
}

TEST(EntropyProduction, StepRefinementOfSpontaneousEmission) {
  ModelParams a = params(0.0, 0.2);
  ModelParams b = a;
  b.dt = a.dt / 2.0;
  const Simulated ra = run(a, excited_state(), 3.0, 1000);
  const Simulated rb = run(b, excited_state(), 3.0, 2000);
  ASSERT_EQ(ra.report.t.size(), rb.report.t.size());
  for (std::size_t i = 0; i < ra.report.t.size(); ++i) EXPECT_NEAR(ra.report.Sigma[i], rb.report.Sigma[i], 1e-3);
}

TEST(Displacement, DiagonalAtomLeavesFieldUndisplaced) {
  const Simulated r = run(params(0.0, 0.4), CplxMatrix::diagonal({0.3, 0.7}), 0.5);
  for (const cplx& phi : r.report.displacement) EXPECT_EQ(phi, cplx(0.0));
}

TEST(Displacement, PlusStateFirstAmplitude) {
  const ModelParams p = params(0.0);
  const Simulated r = run(p, bloch_state(1.0, 0.0, 0.0), 0.1);
  EXPECT_NEAR(std::abs(r.report.displacement.front()), 0.5 * std::sqrt(p.gamma * p.dt), 1e-15);
}

TEST(Displacement, QuadratureIdentityWithoutDrive) {
  const ModelParams p = params(0.0);
  const Simulated r = run(p, bloch_state(0.8, 0.0, 0.2), 5.0);
  double phi2 = 0.0, riemann = 0.0;
  for (std::size_t n = 0; n < r.report.displacement.size(); ++n) {
    phi2 += std::norm(r.report.displacement[n]);
    riemann += p.gamma * std::norm(r.rec.sigma_minus[n]) * p.dt;
  }
  EXPECT_NEAR(phi2, riemann, 1e-12);
  const double selfwork = r.ledger.cumulative().back()[9];
  EXPECT_NEAR(phi2, -selfwork / p.omega0, 1e-6);
}

TEST(SmallInstance, ZeroCollisionsAndKlein) {
  ModelParams p = params(1.0, 0.2);
  p.dt = 0.02;
  const SmallInstanceEntropy z = small_instance_relative_entropy(p, 4, 0, excited_state());
  EXPECT_NEAR(z.Sigma_re, 0.0, 1e-12);
  EXPECT_NEAR(z.bSigma_re, 0.0, 1e-12);
  EXPECT_THROW(small_instance_relative_entropy(p, 6, 2, excited_state()), MemoryGuard);
  EXPECT_THROW(small_instance_relative_entropy(params(1.0), 4, 2, excited_state()), ConfigError);
}

TEST(SmallInstance, RelativeEntropyMatchesClausiusForms) {
  for (double s : {0.25, 1.0, 4.0}) {
    ModelParams p = params(0.0, 0.2);
    p.dt = 0.02;
    p.rabi = rabi_for_saturation(s, p);
    const double tol = 5.0 * p.gamma * p.dt;
    for (const CplxMatrix& s0 : {ground_state(), excited_state(), bloch_state(1.0, 0.0, 0.0), bloch_state(0.0, 0.6, 0.3)}) {
      const SmallInstanceEntropy r = small_instance_relative_entropy(p, 5, 2, s0);
      EXPECT_GE(r.Sigma_re, -1e-12);
      EXPECT_GE(r.bSigma_re, -1e-12);
      EXPECT_LE(r.bSigma_re, r.Sigma_re + tol);
      EXPECT_NEAR(r.Sigma_re, r.Sigma_clausius, tol);
      EXPECT_NEAR(r.bSigma_re, r.bSigma_clausius, tol);
      EXPECT_GE(r.mutual_information, -1e-12);
    }
  }
}

TEST(SelfworkProbe, NoDriveIsNeverPositive) {
  const SelfworkProbe r = selfwork_sign_probe(params(0.0), 41);
  EXPECT_GE(r.points, 10000);
  EXPECT_EQ(r.max_value, 0.0);
  EXPECT_EQ(r.argmax.x, 0.0);
  EXPECT_EQ(r.argmax.y, 0.0);
  EXPECT_EQ(r.positive_fraction, 0.0);
  EXPECT_THROW(selfwork_sign_probe(params(0.0, 0.0, 1.0)), ConfigError);
}

TEST(SelfworkProbe, BoundedAndShrinking) {
  double prev = 1.0;
  for (double eps : {0.1, 0.01, 0.001}) {
    ModelParams p;
    p.rabi = eps * p.omega0;
    const SelfworkProbe r = selfwork_sign_probe(p);
    EXPECT_LE(r.max_value, r.bound + 1e-12);
    if (eps == 0.01) { EXPECT_LE(r.max_value, 1.3e-5); }
    EXPECT_LE(r.positive_fraction, prev);
    prev = r.positive_fraction;
  }
}
