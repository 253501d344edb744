#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "nstorus/generators.hpp"
#include "nstorus/ns_mild.hpp"
#include "test_util.hpp"

using namespace nstorus;
using nstorus::testing::random_field;
using nstorus::testing::random_solenoidal;

namespace {

/// Exact Taylor-Green state at time t: the initial modes scaled by e^{-2νt}.
SpectralField taylor_green_exact(int trunc, double t, double nu) {
  SpectralField v = taylor_green(trunc);
  v *= std::exp(-2.0 * nu * t);
  return v;
}

SolverConfig small_config() {
  SolverConfig c;
  c.dim = 2;
  c.trunc = 8;
  c.viscosity = 1.0;
  c.smoothness = 2.0;
  c.horizon = 0.5;
  c.time_grid = 32;
  c.picard_tol = 1e-11;
  return c;
}

}  // namespace

TEST_CASE("nonlinear term vanishes on constant fields") {
  SpectralField v(2, 4, 2);
  v.set_coeff({0, 0}, 0.7, 0);
  v.set_coeff({0, 0}, -0.3, 1);
  CHECK(nonlinear_term(v).l1() == 0.0);
}

TEST_CASE("Taylor-Green advection is a pure gradient") {
  const SpectralField v = taylor_green(8);
  CHECK(nonlinear_term(v, ConvolveMethod::Direct).l1() <= 1e-13);
  CHECK(nonlinear_term(v, ConvolveMethod::Fft).l1() <= 1e-13);
}

TEST_CASE("nonlinear term equals the operator-composition oracle") {
  std::mt19937_64 rng(21);
  const SpectralField v = random_solenoidal(2, 6, rng);
  const SpectralField fast = nonlinear_term(v, ConvolveMethod::Fft);

  // Oracle: literal A^a_l ∂_j (v^j v^l) through the public single operators,
  // direct convolution throughout.
  SpectralField oracle(v.modes_ptr(), 2);
  for (int a = 0; a < 2; ++a) {
    SpectralField acc(v.modes_ptr(), 1);
    for (int l = 0; l < 2; ++l)
      for (int j = 0; j < 2; ++j)
        acc += a_operator(
            derivative(convolve(component(v, j), component(v, l), ConvolveMethod::Direct), j),
            a, l);
    oracle.coeffs().col(a) = acc.coeffs().col(0);
  }
  CHECK(l1_distance(fast, oracle) <= 1e-12 * std::max(1.0, oracle.l1()));

  const double scale = fast.l1();
  CHECK(divergence(fast).l1() <= 1e-12 * scale);
}

TEST_CASE("pressure recovery") {
  SpectralField c(2, 4, 2);
  c.set_coeff({0, 0}, 1.0, 0);
  CHECK(pressure_recover(c).l1() == 0.0);

  // Taylor-Green pressure (cos 2x_1 + cos 2x_2)/4: modes (±2,0),(0,±2) at 1/8.
  // Oracle: substitute v into -Δ⁻¹ ∂_i∂_j (v^i v^j) composed from the public
  // operators with direct convolution.
  const SpectralField v = taylor_green(8);
  SpectralField sum(v.modes_ptr(), 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      sum += derivative(
          derivative(convolve(component(v, i), component(v, j), ConvolveMethod::Direct), i), j);
  SpectralField p_oracle = inv_laplacian(sum);
  p_oracle *= -1.0;

  const SpectralField p = pressure_recover(v);
  CHECK(l1_distance(p, p_oracle) <= 1e-14);

  for (auto k : {std::vector<int>{2, 0}, {-2, 0}, {0, 2}, {0, -2}}) {
    CHECK(p.coeff(k).real() == doctest::Approx(0.125).epsilon(1e-13));
    CHECK(std::abs(p.coeff(k).imag()) <= 1e-15);
  }
  CHECK(p.l1() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(p.coeff({0, 0})) == 0.0);
}

TEST_CASE("duhamel with zero forcing is the heat flow") {
  std::mt19937_64 rng(22);
  const SpectralField vhat = random_solenoidal(2, 4, rng);
  const auto times = uniform_times(0.5, 8);
  std::vector<SpectralField> rhs(times.size(), SpectralField(2, 4, 2));
  const SpectralField got = duhamel_apply(vhat, rhs, 1.0, times);
  CHECK(l1_distance(got, heat_semigroup(vhat, 0.5, 1.0)) == 0.0);
}

TEST_CASE("duhamel matches the closed-form single-mode integral") {
  // vhat = 0, f constant in time on mode k: ∫₀ᵗ e^{-ν|k|²(t-ξ)} dξ f_k.
  const double nu = 1.0, t = 1.0;
  const int k[2] = {1, 1};
  const double l2 = 2.0;
  SpectralField f(2, 4, 2);
  f.set_coeff(k, {0.4, -0.2}, 0);
  const SpectralField zero(2, 4, 2);

  const std::complex<double> exact =
      std::complex<double>(0.4, -0.2) * (1 - std::exp(-nu * l2 * t)) / (nu * l2);

  double prev_err = 0;
  std::vector<double> errors;
  for (int M : {16, 32, 64}) {
    const auto times = uniform_times(t, M);
    std::vector<SpectralField> rhs(times.size(), f);
    const SpectralField got = duhamel_apply(zero, rhs, nu, times);
    errors.push_back(std::abs(got.coeff(k, 0) - exact));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double order = std::log2(errors[i] / errors[i + 1]);
    CHECK(order >= 1.9);
  }
  (void)prev_err;

  // k = 0 mode: factor 1, the integral is the plain trapezoid (exact for a
  // constant integrand).
  SpectralField f0(2, 4, 2);
  f0.set_coeff({0, 0}, 0.3, 1);
  const auto times = uniform_times(t, 8);
  std::vector<SpectralField> rhs(times.size(), f0);
  const SpectralField got = duhamel_apply(zero, rhs, nu, times);
  CHECK(got.coeff({0, 0}, 1).real() == doctest::Approx(0.3 * t).epsilon(1e-14));
}

TEST_CASE("duhamel rejects inconsistent history") {
  const SpectralField z(2, 4, 2);
  std::vector<SpectralField> rhs(3, z);
  const std::vector<double> times = {0.0, 0.1};
  CHECK_THROWS_AS((void)duhamel_apply(z, rhs, 1.0, times), InsufficientHistoryError);
  const std::vector<double> bad_start = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS((void)duhamel_apply(z, rhs, 1.0, bad_start), InsufficientHistoryError);
}

TEST_CASE("picard on zero data returns the zero trajectory") {
  SolverConfig cfg = small_config();
  cfg.trunc = 4;
  const SpectralField zero(2, 4, 2);
  auto [traj, rep] = picard_solve(zero, cfg);
  CHECK(rep.converged);
  for (const auto& s : traj.states) CHECK(s.l1() == 0.0);
}

TEST_CASE("picard reproduces the exact Taylor-Green flow") {
  SolverConfig cfg = small_config();
  const SpectralField vhat = taylor_green(cfg.trunc);
  auto [traj, rep] = picard_solve(vhat, cfg);
  CHECK(rep.converged);
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    const SpectralField exact = taylor_green_exact(cfg.trunc, traj.times[i], cfg.viscosity);
    CHECK(l1_distance(traj.states[i], exact) <= 1e-12);
  }
}

TEST_CASE("picard on small random data contracts") {
  std::mt19937_64 rng(23);
  SolverConfig cfg = small_config();
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 0.01 / norm_hs(vhat, cfg.smoothness);

  std::vector<double> iterate_divergence;
  auto observer = [&](int, const Trajectory& t) {
    double worst = 0;
    for (const auto& s : t.states) worst = std::max(worst, divergence_l1_relative(s));
    iterate_divergence.push_back(worst);
  };
  auto [traj, rep] = picard_solve(vhat, cfg, observer);

  CHECK(rep.converged);
  CHECK(rep.residuals.back() <= cfg.picard_tol);
  for (double q : rep.contraction_ratios) CHECK(q < 1.0);
  for (double d : iterate_divergence) CHECK(d <= 1e-12);

  // Mean mode is pinned bitwise across nodes.
  const Eigen::Index zero = vhat.modes().zero_index();
  for (const auto& s : traj.states)
    for (int c = 0; c < 2; ++c) CHECK(s(zero, c) == vhat(zero, c));

  // Fixed-point consistency: v = G(v) within picard_tol, with G re-evaluated
  // through the public duhamel path.
  std::vector<SpectralField> rhs;
  for (const auto& s : traj.states) rhs.push_back(nonlinear_term(s));
  for (std::size_t i : {std::size_t{1}, traj.nodes() / 2, traj.nodes() - 1}) {
    const std::span<const SpectralField> hist(rhs.data(), i + 1);
    const std::span<const double> times(traj.times.data(), i + 1);
    const SpectralField gv = duhamel_apply(vhat, hist, cfg.viscosity, times);
    CHECK(l1_distance(gv, traj.states[i]) <= cfg.picard_tol);
  }
}

TEST_CASE("one Picard sweep agrees between direct and fast convolution") {
  std::mt19937_64 rng(24);
  const int trunc = 6;
  SpectralField vhat = random_solenoidal(2, trunc, rng);
  vhat *= 0.2 / vhat.l1();
  const double nu = 1.0;
  const auto times = uniform_times(0.25, 8);

  std::vector<SpectralField> base;
  for (double t : times) base.push_back(heat_semigroup(vhat, t, nu));

  for (std::size_t node : {std::size_t{4}, times.size() - 1}) {
    std::vector<SpectralField> rhs_direct, rhs_fast;
    for (std::size_t i = 0; i <= node; ++i) {
      rhs_direct.push_back(nonlinear_term(base[i], ConvolveMethod::Direct));
      rhs_fast.push_back(nonlinear_term(base[i], ConvolveMethod::Fft));
    }
    const std::span<const double> tspan(times.data(), node + 1);
    const SpectralField a = duhamel_apply(vhat, rhs_direct, nu, tspan);
    const SpectralField b = duhamel_apply(vhat, rhs_fast, nu, tspan);
    CHECK(l1_distance(a, b) <= 1e-11);
  }
}

TEST_CASE("picard diverges on oversized data and reports growth") {
  std::mt19937_64 rng(25);
  SolverConfig cfg = small_config();
  cfg.trunc = 6;
  cfg.viscosity = 0.05;
  cfg.horizon = 4.0;
  cfg.time_grid = 24;
  cfg.max_iterations = 60;
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 40.0 / vhat.l1();
  CHECK_THROWS_AS((void)picard_solve(vhat, cfg), DivergedError);
}

TEST_CASE("momentum residual") {
  SolverConfig cfg = small_config();

  SUBCASE("zero trajectory") {
    const SpectralField zero(2, cfg.trunc, 2);
    auto [traj, rep] = picard_solve(zero, cfg);
    for (double r : momentum_residual(traj)) CHECK(r == 0.0);
  }

  SUBCASE("single solenoidal mode decays as pure heat") {
    const int k[2] = {0, 1};
    const double dir[2] = {1.0, 0.0};
    const SpectralField vhat = single_mode(2, cfg.trunc, k, 0.5, dir);
    // The nonlinearity is annihilated: k·e = 0 kills every projected product.
    CHECK(nonlinear_term(vhat).l1() <= 1e-15);
    auto [traj, rep] = picard_solve(vhat, cfg);
    const double dt = cfg.horizon / cfg.time_grid;
    // Centered difference of e^{-νt} carries an O(Δt²) defect.
    const double bound = 1.0 * dt * dt;
    for (double r : momentum_residual(traj)) CHECK(r <= bound);
  }

  SUBCASE("second order in time on Taylor-Green") {
    const SpectralField vhat = taylor_green(cfg.trunc);
    SolverConfig coarse = cfg;
    coarse.time_grid = 64;
    coarse.horizon = 1.0;
    SolverConfig fine = coarse;
    fine.time_grid = 128;
    auto [tc, rc] = picard_solve(vhat, coarse);
    auto [tf, rf] = picard_solve(vhat, fine);
    const auto res_c = momentum_residual(tc);
    const auto res_f = momentum_residual(tf);
    const double max_c = *std::max_element(res_c.begin(), res_c.end());
    const double max_f = *std::max_element(res_f.begin(), res_f.end());
    const double ratio = max_c / max_f;
    CHECK(ratio >= 3.4);
    CHECK(ratio <= 4.6);
  }

  SUBCASE("grid too coarse") {
    Trajectory traj;
    traj.config = cfg;
    traj.times = {0.0, 1.0};
    traj.states.assign(2, SpectralField(2, cfg.trunc, 2));
    CHECK_THROWS_AS((void)momentum_residual(traj), GridError);
  }
}

TEST_CASE("time-grid convergence is second order") {
  std::mt19937_64 rng(26);
  SolverConfig cfg = small_config();
  cfg.trunc = 4;
  cfg.horizon = 0.5;
  cfg.picard_tol = 1e-13;
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 0.5 / vhat.l1();

  SolverConfig ref_cfg = cfg;
  ref_cfg.time_grid = 512;
  auto [ref, rep_ref] = picard_solve(vhat, ref_cfg);
  REQUIRE(rep_ref.converged);

  auto deviation = [&](int M) {
    SolverConfig c = cfg;
    c.time_grid = M;
    auto [traj, rep] = picard_solve(vhat, c);
    REQUIRE(rep.converged);
    double worst = 0;
    const int stride = 512 / M;
    for (int i = 0; i <= M; ++i)
      worst = std::max(worst, l1_distance(traj.states[i], ref.states[i * stride]));
    return worst;
  };

  const double d16 = deviation(16);
  const double d32 = deviation(32);
  CHECK(d16 / d32 >= 3.5);
}

TEST_CASE("energy decreases along converged trajectories") {
  std::mt19937_64 rng(27);
  SolverConfig cfg = small_config();
  cfg.trunc = 6;
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 0.3 / vhat.l1();
  auto [traj, rep] = picard_solve(vhat, cfg);
  REQUIRE(rep.converged);
  const auto energy = energy_series(traj);
  const double dt = cfg.horizon / cfg.time_grid;
  const double slack = 10 * dt * dt * energy[0] + 10 * cfg.picard_tol;
  for (std::size_t i = 0; i + 1 < energy.size(); ++i)
    CHECK(energy[i + 1] <= energy[i] + slack);
}

TEST_CASE("initial continuity") {
  SolverConfig cfg = small_config();
  cfg.horizon = 0.25;
  cfg.time_grid = 32;
  const SpectralField vhat = taylor_green(cfg.trunc);
  auto [traj, rep] = picard_solve(vhat, cfg);

  SUBCASE("norms shrink toward zero with t") {
    const int kappa[2] = {0, 0};
    const ContinuityReport c = initial_continuity_check(traj, kappa, cfg.smoothness);
    CHECK(c.decreasing_toward_zero);
    CHECK(c.v_norms[0] == 0.0);
    // ‖v(t) - v̂‖_s = (1 - e^{-2νt}) ‖v̂‖_s ≤ 2νt ‖v̂‖_s for Taylor-Green.
    const double vnorm = norm_hs(vhat, cfg.smoothness);
    for (std::size_t i = 1; i < c.times.size(); ++i)
      CHECK(c.v_norms[i] <= 2 * cfg.viscosity * c.times[i] * vnorm * (1 + 1e-10));
  }

  SUBCASE("first-node norm halves under grid refinement") {
    SolverConfig fine = cfg;
    fine.time_grid = 64;
    auto [traj2, rep2] = picard_solve(vhat, fine);
    const int kappa[2] = {1, 0};
    const ContinuityReport a = initial_continuity_check(traj, kappa, cfg.smoothness);
    const ContinuityReport b = initial_continuity_check(traj2, kappa, cfg.smoothness);
    CHECK(a.decreasing_toward_zero);
    CHECK(b.decreasing_toward_zero);
    const double ratio = a.v_norms[1] / b.v_norms[1];
    CHECK(ratio >= 1.9);
    CHECK(ratio <= 2.1);
  }

  SUBCASE("zero data is identically zero") {
    const SpectralField zero(2, cfg.trunc, 2);
    auto [ztraj, zrep] = picard_solve(zero, cfg);
    const int kappa[2] = {0, 0};
    const ContinuityReport c = initial_continuity_check(ztraj, kappa, cfg.smoothness);
    for (double v : c.v_norms) CHECK(v == 0.0);
    for (double p : c.p_norms) CHECK(p == 0.0);
  }
}

TEST_CASE("mean mode rides along as a constant drift") {
  std::mt19937_64 rng(28);
  SolverConfig cfg = small_config();
  cfg.trunc = 4;
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 0.1 / vhat.l1();
  vhat.set_coeff({0, 0}, 0.25, 0);
  vhat.set_coeff({0, 0}, -0.125, 1);
  auto [traj, rep] = picard_solve(vhat, cfg);
  REQUIRE(rep.converged);
  const Eigen::Index zero = vhat.modes().zero_index();
  for (const auto& s : traj.states) {
    CHECK(s(zero, 0) == std::complex<double>(0.25, 0));
    CHECK(s(zero, 1) == std::complex<double>(-0.125, 0));
  }
}

TEST_CASE("trajectory round trips through the directory format") {
  std::mt19937_64 rng(29);
  SolverConfig cfg = small_config();
  cfg.trunc = 3;
  cfg.time_grid = 4;
  SpectralField vhat = random_solenoidal(2, cfg.trunc, rng);
  vhat *= 0.1 / vhat.l1();
  auto [traj, rep] = picard_solve(vhat, cfg);

  const auto dir = std::filesystem::temp_directory_path() / "nstorus_traj_test";
  std::filesystem::remove_all(dir);
  save_trajectory(traj, dir);
  const Trajectory back = load_trajectory(dir);
  REQUIRE(back.nodes() == traj.nodes());
  CHECK(back.times == traj.times);
  for (std::size_t i = 0; i < traj.nodes(); ++i)
    CHECK((back.states[i].coeffs() == traj.states[i].coeffs()).all());
  std::filesystem::remove_all(dir);
}

TEST_CASE("picard solves a 3-D flow") {
  std::mt19937_64 rng(30);
  SolverConfig cfg;
  cfg.dim = 3;
  cfg.trunc = 3;
  cfg.viscosity = 1.0;
  cfg.smoothness = 2.0;
  cfg.horizon = 0.2;
  cfg.time_grid = 8;
  cfg.picard_tol = 1e-11;
  SpectralField vhat = random_solenoidal(3, cfg.trunc, rng);
  vhat *= 0.05 / vhat.l1();

  auto [traj, rep] = picard_solve(vhat, cfg);
  CHECK(rep.converged);
  for (const auto& s : traj.states) {
    CHECK(divergence_l1_relative(s) <= 1e-12);
    CHECK(s.is_conjugate_symmetric(1e-12));
  }

  SolverConfig fine = cfg;
  fine.time_grid = 16;
  auto [traj2, rep2] = picard_solve(vhat, fine);
  const auto res = momentum_residual(traj);
  const auto res2 = momentum_residual(traj2);
  const double ratio = *std::max_element(res.begin(), res.end()) /
                       *std::max_element(res2.begin(), res2.end());
  CHECK(ratio >= 3.0);  // centered difference is second order in time
}

TEST_CASE("picard rejects bad inputs") {
  SolverConfig cfg = small_config();
  const SpectralField scalar(2, cfg.trunc, 1);
  CHECK_THROWS_AS((void)picard_solve(scalar, cfg), ShapeError);

  SpectralField swirl(2, cfg.trunc, 2);
  swirl.set_coeff({1, 0}, 1.0, 0);  // div = i k_1 v^1 != 0
  CHECK_THROWS_AS((void)picard_solve(swirl, cfg), Error);

  SolverConfig bad = cfg;
  bad.time_grid = 1;
  const SpectralField zero(2, cfg.trunc, 2);
  CHECK_THROWS_AS((void)picard_solve(zero, bad), ConfigError);
}
