#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "speclab/potential.hpp"
#include "speclab/prng.hpp"
#include "speclab/propagator.hpp"
#include "speclab/transport.hpp"

using namespace speclab;

namespace {

PotentialModel cos_x_pot(double amp, double t0, double t1, int cells = 8) {
  PotentialModel c;
  c.l_max = 1;
  c.grid = uniform_grid(t0, t1, cells);
  c.values.assign(3, std::vector<cplx>(c.grid.size(), cplx(0.0)));
  for (auto& v : c.values[0]) v = cplx(amp / 2.0);
  for (auto& v : c.values[2]) v = cplx(amp / 2.0);
  return c;
}

}  // namespace

TEST_CASE("transport_nu closed forms") {
  const auto xs = x_grid(64);
  SECTION("V = 0") {
    const PotentialModel z = make_zero_potential(0.0, 4.0);
    const auto f = transport_nu(z, 1.3, 4.0, xs, 2.0);
    for (const auto& v : f) CHECK(std::abs(v - cplx(1.0)) < 1e-14);
  }
  SECTION("V = g(t): pure phase") {
    PotentialModel g = make_zero_potential(0.0, 4.0);
    g.values[0] = {cplx(0.3), cplx(0.7)};  // g(t) = 0.3 + 0.1 t
    // int_0^2 g = 0.6 + 0.2 = 0.8
    const auto f = transport_nu(g, 0.9, 4.0, xs, 2.0);
    for (const auto& v : f) CHECK(std::abs(v - std::polar(1.0, -0.8)) < 1e-13);
  }
  SECTION("V = cos x, k = 0: stationary characteristics") {
    const PotentialModel c = cos_x_pot(1.0, 0.0, 4.0);
    const auto f = transport_nu(c, 0.0, 4.0, xs, 3.0);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(f[i] - std::exp(cplx(0.0, -3.0 * std::cos(xs[i])))) <
            1e-12);
  }
}

TEST_CASE("transport fields are unimodular for real V") {
  const PotentialModel pot =
      make_decaying(7, 4, 0.9, 1.0, geometric_grid(0.0, 32.0, 64));
  NuTransport nu(pot, 1.7, 32.0, 0.0);
  GTransport G(pot, 1.7);
  CounterRng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(0.0, 2.0 * M_PI);
    const double t = rng.uniform(0.0, 32.0);
    worst = std::max(worst, std::abs(std::abs(nu.value(x, t)) - 1.0));
    worst = std::max(worst, std::abs(std::abs(G.value(x, t)) - 1.0));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("transport PDE residuals via centered differences") {
  const PotentialModel pot =
      make_random_bounded(21, 3, uniform_grid(0.0, 8.0, 16), 1.0);
  const double k = 1.3, T = 8.0;
  NuTransport nu(pot, k, T, 0.0);
  GTransport G(pot, k);
  CounterRng rng(6);
  const double h = 1e-5;
  double worst_nu = 0.0, worst_g = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(0.0, 2.0 * M_PI);
    // keep the time stencil inside one profile cell (kinks at breakpoints)
    const int cell = static_cast<int>(rng.next_u64() % 16);
    const double t = rng.uniform(pot.grid[cell] + 10 * h,
                                 pot.grid[cell + 1] - 10 * h);
    const cplx i1(0.0, 1.0);
    {
      const cplx dt = (nu.value(x, t + h) - nu.value(x, t - h)) / (2.0 * h);
      const cplx dx = (nu.value(x + h, t) - nu.value(x - h, t)) / (2.0 * h);
      const cplx r = i1 * dt + i1 * k * dx / T - pot.value(x, t) * nu.value(x, t);
      worst_nu = std::max(worst_nu, std::abs(r));
    }
    {
      const cplx dt = (G.value(x, t + h) - G.value(x, t - h)) / (2.0 * h);
      const cplx dx = (G.value(x + h, t) - G.value(x - h, t)) / (2.0 * h);
      const cplx r =
          i1 * dt + i1 * k * dx / (1.0 + t) - pot.value(x, t) * G.value(x, t);
      worst_g = std::max(worst_g, std::abs(r));
    }
  }
  CHECK(worst_nu <= 1e-6);
  CHECK(worst_g <= 1e-6);
}

TEST_CASE("nu(k=0) = G(k=0) = exp(-i int V)") {
  const PotentialModel pot =
      make_random_bounded(13, 2, uniform_grid(0.0, 5.0, 10), 1.0);
  NuTransport nu(pot, 0.0, 5.0, 0.0);
  GTransport G(pot, 0.0);
  CounterRng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(0.0, 2.0 * M_PI);
    const double t = rng.uniform(0.0, 5.0);
    const cplx direct =
        std::exp(cplx(0.0, -1.0) *
                 adaptive_simpson_complex(
                     [&](double tau) { return pot.value(x, tau); }, 0.0, t,
                     1e-12));
    CHECK(std::abs(nu.value(x, t) - direct) < 1e-9);
    CHECK(std::abs(G.value(x, t) - direct) < 1e-9);
  }
}

// The pure frozen-drift symbol lambda(n) = n/T evolves exactly as the
// transport flow, so evolve() and nu * translate must coincide up to band
// truncation. This pins the sign pairing between the multiplier, the
// characteristics and the WKB translate e^{-inks/T}.
TEST_CASE("frozen-drift evolution equals nu times translated data") {
  const double T = 2.0, k = 1.4;
  const PotentialModel pot =
      make_random_bounded(31, 2, uniform_grid(0.0, T, 8), 0.8);
  const SymbolSpec drift = SymbolSpec::static_symbol(1.0 / T);

  FourierState u0(24);
  u0.at(0) = 0.8;
  u0.at(1) = cplx(0.3, 0.2);
  u0.at(-2) = cplx(0.0, 0.4);

  EvolveConfig cfg;
  cfg.k = k;
  cfg.t1 = T;
  cfg.tol = 1e-11;
  cfg.observer_times = {0.5 * T, T};
  cfg.picture = Picture::lab;
  Trajectory tr = evolve(u0, drift, pot, cfg);

  NuTransport nu(pot, k, T, 0.0);
  const auto xs = x_grid(256);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const double s = cfg.observer_times[i];
    FourierState shifted = u0;
    for (int n = -u0.n_max; n <= u0.n_max; ++n)
      shifted.at(n) = u0.at(n) * std::polar(1.0, -n * k * s / T);
    const auto nu_field = nu.field(xs, s);
    double err_sq = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j)
      err_sq += std::norm(tr.states[i].evaluate(xs[j]) -
                          nu_field[j] * shifted.evaluate(xs[j]));
    CHECK(std::sqrt(err_sq / xs.size()) < 1e-7);
  }
}

TEST_CASE("chained transport: single block matches NuTransport") {
  const PotentialModel pot =
      make_decaying(3, 3, 0.96, 1.0, uniform_grid(16.0, 32.0, 32));
  const double k = 1.1;
  ChainedTransport chain(pot, k, {16.0, 32.0});
  NuTransport nu(pot, k, 16.0, 16.0);
  CounterRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(0.0, 2.0 * M_PI);
    const double t = rng.uniform(16.0, 32.0);
    CHECK(std::abs(chain.value(x, t) - nu.value(x, t - 16.0)) < 1e-10);
  }
}

TEST_CASE("h_half_norm_of_transport") {
  SECTION("V = 0: constant field") {
    const PotentialModel z = make_zero_potential(0.0, 8.0);
    const auto r = h_half_norm_of_transport(z, 1.0, 8.0, 128, 8);
    CHECK_THAT(r.sup_h_half, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.bound_side, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(r.sup_h_half_homog_sq <= 1e-13);
  }
  SECTION("V = g(t): pure phase keeps norm 1") {
    PotentialModel g = make_zero_potential(0.0, 8.0);
    g.values[0] = {cplx(0.4), cplx(0.4)};
    const auto r = h_half_norm_of_transport(g, 0.7, 8.0, 128, 8);
    CHECK_THAT(r.sup_h_half, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("perturbative scaling: homogeneous energy ~ lambda^2") {
    const double gamma = 0.9, T = 16.0;
    auto run = [&](double lam) {
      // V = lambda cos x (1+t)^{-gamma}, sampled at the breakpoints
      PotentialModel c = cos_x_pot(1.0, 0.0, T, 32);
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const double env = lam * std::pow(1.0 + c.grid[i], -gamma);
        c.values[0][i] = cplx(env / 2.0);
        c.values[2][i] = cplx(env / 2.0);
      }
      return h_half_norm_of_transport(c, 1.2, T, 256, 32);
    };
    const double e1 = run(1e-3).sup_h_half_homog_sq;
    const double e2 = run(2e-3).sup_h_half_homog_sq;
    CHECK(e1 > 0.0);
    CHECK_THAT(e2 / e1, Catch::Matchers::WithinAbs(4.0, 0.2));
  }
}

TEST_CASE("gaps_rhs_correction") {
  const double T = 64.0, alpha = 0.44, k = 1.5;
  SECTION("projection kills high modes") {
    const int big = static_cast<int>(std::pow(T, alpha)) + 1;
    CHECK(gaps_rhs_correction(T, alpha, 1.5 * T, big, k) == 0.0);
  }
  SECTION("direct substitution at t = T") {
    const int n = 2;
    const double expect =
        k * (n * n / ((T + 1.0) * (T + 1.0)) + n / (T + 1.0) - n / T);
    CHECK_THAT(gaps_rhs_correction(T, alpha, T, n, k),
               Catch::Matchers::WithinAbs(expect, 1e-15));
  }
  SECTION("domain check") {
    CHECK_THROWS_AS(gaps_rhs_correction(T, alpha, 3.0 * T, 1, k),
                    std::domain_error);
  }
  SECTION("doubling scan: sup tracks T^{alpha-1} (drift-freeze term dominates)") {
    // The quadratic piece alone obeys T^{2 alpha - 2}; the measured sup is
    // driven by the drift-freeze piece n(1/(t+1) - 1/T), whose sup scales
    // like T^{alpha - 1}. Both normalizations are recorded; the alpha-1 one
    // must be the stable one.
    std::vector<double> logT, logS;
    for (int p = 6; p <= 12; p += 2) {
      const double Tp = std::pow(2.0, p);
      const auto rep = v1_sup_report(Tp, alpha, 1.0);
      logT.push_back(std::log(Tp));
      logS.push_back(std::log(rep.sup));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(logT.size());
    for (std::size_t i = 0; i < logT.size(); ++i) {
      sx += logT[i];
      sy += logS[i];
      sxx += logT[i] * logT[i];
      sxy += logT[i] * logS[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK_THAT(slope, Catch::Matchers::WithinAbs(alpha - 1.0, 0.1));
    // stability of the alpha-1 normalized constant
    const double c1 = v1_sup_report(64.0, alpha, 1.0).normalized_am1;
    const double c2 = v1_sup_report(4096.0, alpha, 1.0).normalized_am1;
    CHECK(std::max(c1, c2) / std::min(c1, c2) < 1.6);
  }
}

TEST_CASE("zero_mode_deviation degenerate cases") {
  SECTION("lambda = 0") {
    OscillatoryQSpec spec = OscillatoryQSpec::random(3, 4, 0.9, 0.0, 2.0);
    const PotentialModel pot =
        make_oscillatory(spec, geometric_grid(2.0, 16.0, 32));
    const auto r = zero_mode_deviation(pot, 2.0, 1.3, 16.0, 16);
    CHECK(r.sup_dev_zero_mode <= 1e-12);
    CHECK(r.sup_dev_full <= 1e-12);
    CHECK(r.chain_violations == 0);
  }
  SECTION("x-independent Q gives V = 0") {
    OscillatoryQSpec spec;
    spec.gamma = 0.9;
    spec.lambda = 0.5;
    spec.start_T = 1.0;
    spec.q_modes = {cplx(0.9)};
    const PotentialModel pot =
        make_oscillatory(spec, geometric_grid(1.0, 8.0, 16));
    CHECK(pot.is_zero());
    const auto r = zero_mode_deviation(pot, 1.0, 0.7, 8.0, 8);
    CHECK(r.sup_dev_full <= 1e-12);
  }
  SECTION("trick1 chain holds on a real run") {
    OscillatoryQSpec spec = OscillatoryQSpec::random(21, 4, 0.9, 0.4, 2.0);
    const PotentialModel pot =
        make_oscillatory(spec, geometric_grid(2.0, 32.0, 64));
    const auto r = zero_mode_deviation(pot, 2.0, 1.1, 32.0, 24, 1e-8);
    CHECK(r.samples > 0);
    CHECK(r.chain_violations == 0);
    CHECK(r.sup_dev_zero_mode > 0.0);
    CHECK(r.sup_dev_full >= r.sup_dev_zero_mode);
  }
}

TEST_CASE("wkb_compare degenerate cases") {
  DiadicParams params = DiadicParams::for_gamma(0.96);
  const double T = 16.0;
  SECTION("V = 0, u0 = 1: error at integrator level") {
    const PotentialModel z = make_zero_potential(T, 2.0 * T);
    WkbOptions opt;
    opt.n_obs = 4;
    const WkbResult r = wkb_compare(z, params, T, 0.9, constant_one(8), opt);
    CHECK(r.sup_error <= 1e-9);
  }
  SECTION("V = g(t): both sides acquire the same phase") {
    PotentialModel g = make_zero_potential(T, 2.0 * T);
    g.values[0] = {cplx(0.2), cplx(0.1)};
    WkbOptions opt;
    opt.n_obs = 4;
    const WkbResult r = wkb_compare(g, params, T, 1.3, constant_one(8), opt);
    CHECK(r.sup_error <= 1e-8);
  }
  SECTION("hypothesis violation throws") {
    FourierState too_big = constant_one(8);
    too_big.at(0) = 3.0;
    CHECK_THROWS_AS(
        wkb_compare(make_zero_potential(T, 2.0 * T), params, T, 1.0, too_big),
        BetarViolation);
  }
}

TEST_CASE("diadic pipeline smoke") {
  DiadicParams params = DiadicParams::for_gamma(0.96);
  std::vector<double> ks{-1.5, -0.5, 0.5, 1.5};
  SECTION("lambda = 0: u = G = 1, full good set") {
    const PotentialModel z = make_zero_potential(16.0, 64.0);
    DiadicOptions opt;
    opt.x_points = 64;
    const DiadicReport rep = diadic_pipeline(z, params, ks, 4, 5, 8, opt);
    CHECK(rep.bad_set_fraction == 0.0);
    CHECK(rep.k_avg_sup_u_minus_G <= 1e-8);
    for (const auto& row : rep.rows) {
      CHECK_FALSE(row.betar_flagged);
      CHECK(row.omega_sum <= 1e-12);
    }
  }
  SECTION("V = g(t): u and G carry identical phases") {
    PotentialModel g = make_zero_potential(16.0, 64.0);
    g.values[0] = {cplx(0.05), cplx(0.02)};
    DiadicOptions opt;
    opt.x_points = 64;
    const DiadicReport rep = diadic_pipeline(g, params, ks, 4, 5, 8, opt);
    CHECK(rep.k_avg_sup_u_minus_G <= 1e-7);
  }
  SECTION("large data violations flag the node instead of crashing") {
    // strong potential: the end state of a block can exceed the H^{1/2}
    // budget of the next block's hypotheses
    const PotentialModel pot =
        make_decaying(5, 4, 0.96, 3.0, uniform_grid(16.0, 64.0, 96));
    DiadicOptions opt;
    opt.x_points = 64;
    const DiadicReport rep = diadic_pipeline(pot, params, {1.2}, 4, 5, 16, opt);
    REQUIRE(rep.rows.size() == 1);
    // the pipeline completed and reported regardless of flags
    CHECK(rep.rows[0].block_wkb_errors.size() == 2);
  }
  SECTION("error decreases with lambda") {
    auto run = [&](double lam) {
      const PotentialModel pot = make_decaying(
          5, 3, 0.96, lam, uniform_grid(16.0, 64.0, 96));
      DiadicOptions opt;
      opt.x_points = 128;
      opt.tol = 1e-8;
      return diadic_pipeline(pot, params, ks, 4, 5, 16, opt)
          .k_avg_sup_u_minus_G;
    };
    const double e_big = run(0.4);
    const double e_small = run(0.1);
    CHECK(e_small < e_big);
    CHECK(e_small > 0.0);
  }
}
