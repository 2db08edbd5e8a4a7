#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"

#include "acm/model.hpp"

using namespace acm;

TEST(QubitOps, AlgebraAndConvention) {
  const auto q = qubit_ops(2.5);
  EXPECT_EQ(max_abs(mul(q.sigma_minus, q.sigma_plus) + mul(q.sigma_plus, q.sigma_minus) - CplxMatrix::identity(2)), 0.0);
  EXPECT_EQ(max_abs(commutator(q.sigma_plus, q.sigma_minus) - q.sigma_z), 0.0);
  EXPECT_DOUBLE_EQ(expectation(q.H_S, excited_state()).real(), 1.25);
  // |e> is basis index 0 and sigma_- maps it to |g>
  EXPECT_EQ(EXCITED, 0u);
  EXPECT_EQ(mul(q.sigma_minus, excited_state())(GROUND, EXCITED), cplx(1.0));
}

TEST(FockOps, TruncatedCommutator) {
  const int d = 7;
  const auto f = fock_ops(d);
  const CplxMatrix c = commutator(f.b, f.b.adjoint());
  CplxMatrix want = CplxMatrix::identity(d);
  want(d - 1, d - 1) = 1.0 - d;
  // sqrt(k)^2 is exact up to one rounding
  EXPECT_LT(max_abs(c - want), 1e-14);
}

TEST(FockOps, LoweringAndSpectrum) {
  const auto f = fock_ops(5);
  CplxMatrix one(5, 1);
  one(1, 0) = 1.0;
  const CplxMatrix r = mul(f.b, one);
  EXPECT_EQ(r(0, 0), cplx(1.0));
  EXPECT_EQ(max_abs(r) , 1.0);
  const auto ev = eigvalsh(f.number);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(ev[k], k, 1e-14);
  EXPECT_THROW(fock_ops(1), DimensionError);
}

TEST(ThermalState, VacuumAtZeroTemperature) {
  const UnitState u = thermal_state(0.0, 6);
  CplxMatrix want(6, 6);
  want(0, 0) = 1.0;
  EXPECT_EQ(max_abs(u.rho - want), 0.0);
  EXPECT_EQ(u.truncation_leak, 0.0);
}

TEST(ThermalState, MeanWithinLeak) {
  for (double nb : {0.1, 0.5, 2.0}) {
    const int d = 40;
    const UnitState u = thermal_state(nb, d);
    const double mean = expectation(fock_ops(d).number, u.rho).real();
    const double leak = u.truncation_leak;
    EXPECT_LE(std::abs(mean - nb), std::max(1e-14, leak * d / (1.0 - leak) * (1.0 + 1e-6))) << nb;
  }
}

TEST(ThermalState, PurityClosedSum) {
  const double nb = 0.5;
  const int d = 24;
  const UnitState u = thermal_state(nb, d);
  // geometric sum of squared weights, exact for the renormalized truncation
  const double q = nb / (nb + 1.0);
  const double purity = (1.0 - q) * (1.0 - q) * (1.0 - std::pow(q * q, d)) / (1.0 - q * q) /
                        std::pow(1.0 - std::pow(q, d), 2.0);
  EXPECT_NEAR(mul(u.rho, u.rho).trace().real(), purity, 1e-14);
  EXPECT_NEAR(purity, 1.0 / (2.0 * nb + 1.0), 1e-4);
}

TEST(Displacement, IdentityAndInverse) {
  EXPECT_LT(max_abs(displacement(0.0, 8) - CplxMatrix::identity(8)), 1e-15);
  const cplx a(0.15, -0.1);
  EXPECT_LT(max_abs(mul(displacement(a, 12), displacement(-a, 12)) - CplxMatrix::identity(12)), 1e-8);
  EXPECT_THROW(displacement(2.0, 12), AmplitudeError);
}

TEST(Displacement, CoherentStateMean) {
  const int d = 12;
  const cplx a = 0.2;
  CplxMatrix vac(d, 1);
  vac(0, 0) = 1.0;
  const CplxMatrix psi = mul(displacement(a, d), vac);
  const CplxMatrix rho = mul(psi, psi.adjoint());
  EXPECT_LT(std::abs(expectation(fock_ops(d).b, rho) - a), 1e-8);
  // Poisson amplitudes e^{-|a|^2/2} a^k / sqrt(k!)
  double fact = 1.0;
  for (int k = 0; k < 6; ++k) {
    if (k > 0) fact *= k;
    const double want = std::exp(-0.5 * std::norm(a)) * std::pow(a.real(), k) / std::sqrt(fact);
    EXPECT_NEAR(psi(k, 0).real(), want, 1e-12);
  }
}

TEST(UnitAmplitude, ZeroDriveAndResonance) {
  ModelParams p;
  for (long n : {0L, 5L, 1000L}) EXPECT_EQ(unit_amplitude(n, p), cplx(0.0));
  p.rabi = 1.3;
  p.dt = 4e-3;
  const double want = 0.5 * 1.3 * std::sqrt(4e-3);
  for (long n : {0L, 17L, 999L}) EXPECT_NEAR(std::abs(unit_amplitude(n, p) - want), 0.0, 1e-15);
}

TEST(UnitAmplitude, PhaseAdvancePerStep) {
  ModelParams p;
  p.rabi = 1.0;
  p.omegaL = p.omega0 + 0.05;
  const double step = std::arg(unit_amplitude(1, p) / unit_amplitude(0, p));
  EXPECT_NEAR(step, -5e-5, 1e-15);
}

TEST(FreshUnit, MeanAndFluctuations) {
  ModelParams p;
  p.rabi = 2.0;
  p.nbar = 0.3;
  p.omegaL = p.omega0 - 1.0;
  // a few levels above the minimal truncation so that the mean is exact to 1e-8
  const int d = effective_fock_dim(p) + 6;
  const auto f = fock_ops(d);
  for (long n : {0L, 3L, 250L}) {
    const UnitState u = fresh_unit(n, p, d);
    EXPECT_TRUE(check_density(u.rho).ok);
    EXPECT_LT(u.truncation_leak, LEAK_LIMIT);
    const cplx b = expectation(f.b, u.rho);
    EXPECT_LT(std::abs(b - unit_amplitude(n, p)), 1e-8);
    const double fluct = expectation(f.number, u.rho).real() - std::norm(b);
    EXPECT_NEAR(fluct, p.nbar, 1e-5);
  }
}

TEST(FreshUnit, InputReconstruction) {
  ModelParams p;
  p.rabi = 1.7;
  p.gamma = 0.8;
  p.omegaL = p.omega0 + 0.4;
  const int d = effective_fock_dim(p);
  const auto f = fock_ops(d);
  for (long n : {0L, 10L, 123L}) {
    const double t = time_of(n, p);
    const cplx b = expectation(f.b, fresh_unit(n, p, d).rho) / std::sqrt(p.dt);
    const cplx want = 0.5 * p.rabi * std::exp(cplx(0.0, -(p.omegaL - p.omega0) * t));
    EXPECT_LT(std::abs(std::sqrt(p.gamma) * b - want), 1e-8);
  }
}

TEST(EffectiveDim, RaisesForHotUnits) {
  ModelParams p;
  EXPECT_EQ(effective_fock_dim(p), 12);
  p.nbar = 2.0;
  const int d = effective_fock_dim(p);
  EXPECT_GT(d, 12);
  EXPECT_LT(displaced_thermal(0.0, 2.0, d).truncation_leak, LEAK_LIMIT);
  EXPECT_GE(displaced_thermal(0.0, 2.0, d - 1).truncation_leak, LEAK_LIMIT);
}

TEST(Params, BetaAndValidation) {
  ModelParams p;
  EXPECT_TRUE(std::isinf(p.beta()));
  p.nbar = 0.5;
  EXPECT_NEAR(p.beta() * p.omega0, std::log(3.0), 1e-15);
  p.gamma = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Params, JsonRoundTripAndUnknownKeys) {
  ModelParams p;
  p.rabi = 0.7;
  p.nbar = 0.2;
  p.omegaL = 999.0;
  const nlohmann::json j = p;
  EXPECT_EQ(j.get<ModelParams>(), p);
  nlohmann::json bad = j;
  bad["gama"] = 1.0;
  EXPECT_THROW(bad.get<ModelParams>(), ConfigError);
}

TEST(Frames, RotatingRoundTrip) {
  ModelParams p;
  p.omegaL = p.omega0 - 0.7;
  const CplxMatrix s = bloch_state(0.3, -0.4, 0.5);
  const CplxMatrix r = to_rotating(s, 2.3, p);
  EXPECT_LT(max_abs(to_interaction(r, 2.3, p) - s), 1e-15);
  EXPECT_NEAR(std::abs(sigma_minus_mean(r)), std::abs(sigma_minus_mean(s)), 1e-15);
  const Bloch b = bloch_of(bloch_state(0.3, -0.4, 0.5));
  EXPECT_NEAR(b.x, 0.3, 1e-15);
  EXPECT_NEAR(b.y, -0.4, 1e-15);
  EXPECT_NEAR(b.z, 0.5, 1e-15);
}
