#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "speclab/potential.hpp"
#include "speclab/prng.hpp"
#include "speclab/propagator.hpp"

using namespace speclab;

namespace {

PotentialModel two_cos_x(double t0 = 0.0, double t1 = 4.0) {
  PotentialModel c;
  c.l_max = 1;
  c.grid = {t0, t1};
  c.values = {{cplx(1.0), cplx(1.0)},
              {cplx(0.0), cplx(0.0)},
              {cplx(1.0), cplx(1.0)}};
  return c;
}

}  // namespace

TEST_CASE("interaction_entry") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  SECTION("zero potential") {
    const PotentialModel z = make_zero_potential();
    CHECK(interaction_entry(sch, z, 1.3, 0.7, 2, -1) == cplx(0.0));
  }
  SECTION("diagonal phase cancels") {
    PotentialModel g = make_zero_potential(0.0, 2.0);
    g.values[0] = {cplx(0.3, 0.1), cplx(0.9, 0.1)};
    const cplx e = interaction_entry(sch, g, 2.0, 1.0, 3, 3);
    CHECK_THAT(std::abs(e - g.coeff(0, 1.0)), Catch::Matchers::WithinAbs(0.0, 1e-15));
  }
  SECTION("m^2 - n^2 phase") {
    const PotentialModel c = two_cos_x();
    const cplx e = interaction_entry(sch, c, 1.0, 1.0, 1, 0);
    CHECK_THAT(std::abs(e - std::polar(1.0, 1.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("evolve: constant datum in the kernel of the free flow") {
  const PotentialModel z = make_zero_potential(0.0, 2.0);
  EvolveConfig cfg;
  cfg.k = 1.7;
  cfg.t1 = 2.0;
  cfg.observer_times = {0.5, 1.0, 2.0};
  Trajectory tr = evolve(constant_one(8), SymbolSpec::schrodinger(), z, cfg);
  REQUIRE(tr.states.size() == 3);
  for (const auto& s : tr.states) {
    CHECK_THAT(std::abs(s.at(0) - cplx(1.0)), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(s.l2_norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("evolve: V = i doubles as exp growth; V = -i decays") {
  for (double c : {1.0, -1.0}) {
    const PotentialModel pot = make_constant_imag(c);
    EvolveConfig cfg;
    cfg.k = 0.8;
    cfg.t1 = 2.0;
    cfg.observer_times = {2.0};
    Trajectory tr = evolve(constant_one(4), SymbolSpec::schrodinger(), pot, cfg);
    CHECK_THAT(tr.states.back().l2_norm(),
               Catch::Matchers::WithinRel(std::exp(2.0 * c), 1e-6));
  }
}

TEST_CASE("evolve: scalar real g(t) gives the exact phase") {
  PotentialModel g = make_zero_potential(0.0, 1.5);
  g.grid = {0.0, 0.5, 1.5};
  g.values[0] = {cplx(0.2), cplx(1.0), cplx(-0.4)};  // piecewise linear
  // int_0^1.5 g: [0,0.5]: (0.2+1)/2*0.5 = 0.3 ; [0.5,1.5]: (1-0.4)/2 = 0.3
  const double phase = 0.6;
  EvolveConfig cfg;
  cfg.k = 1.1;
  cfg.t1 = 1.5;
  cfg.observer_times = {1.5};
  Trajectory tr = evolve(constant_one(6), SymbolSpec::schrodinger(), g, cfg);
  const FourierState& u = tr.states.back();
  CHECK_THAT(std::abs(u.at(0) - std::polar(1.0, -phase)),
             Catch::Matchers::WithinAbs(0.0, 1e-8));
  CHECK(sobolev_norm(u, {0.6, true}) <= 1e-12);
}

TEST_CASE("step_midpoint: identity on V=0 and exact scalar phase") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  FourierState s = delta_state(4, 1);
  s.picture = Picture::interaction;
  SECTION("V = 0") {
    const PotentialModel z = make_zero_potential();
    FourierState out = step_midpoint(s, sch, z, 2.0, 0.25);
    for (int n = -4; n <= 4; ++n) CHECK(out.at(n) == s.at(n));
  }
  SECTION("scalar phase to local order dt^3") {
    PotentialModel g = make_zero_potential(0.0, 1.0);
    g.values[0] = {cplx(0.0), cplx(1.0)};  // g(t) = t
    const double dt = 0.1;
    FourierState d0 = delta_state(4, 0);
    d0.picture = Picture::interaction;
    FourierState out = step_midpoint(d0, sch, g, 1.0, dt);
    const cplx expect = std::polar(1.0, -dt * dt / 2.0);  // exp(-i int_0^dt t)
    CHECK_THAT(std::abs(out.at(0) - expect), Catch::Matchers::WithinAbs(0.0, 1e-6));
  }
}

TEST_CASE("step_midpoint: Richardson ratio ~ 8 on a random real V") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot =
      make_random_bounded(5, 3, uniform_grid(0.0, 1.0, 1), 1.0);
  FourierState v(4, Picture::interaction, 0.0);
  CounterRng rng(2);
  for (int n = -4; n <= 4; ++n) v.at(n) = cplx(rng.symmetric(), rng.symmetric());
  const double nrm = v.l2_norm();
  for (auto& c : v.coeffs) c /= nrm;

  const double k = 0.9;
  auto local_error = [&](double dt) {
    // reference: many tiny midpoint steps across [0, dt]
    FourierState ref = v;
    const int m = 200;
    for (int i = 0; i < m; ++i) ref = step_midpoint(ref, sch, pot, k, dt / m);
    FourierState one = step_midpoint(v, sch, pot, k, dt);
    return l2_distance(one, ref);
  };
  const double e1 = local_error(0.08);
  const double e2 = local_error(0.04);
  CHECK(e1 / e2 > 5.0);
  CHECK(e1 / e2 < 12.0);
}

TEST_CASE("oracle triangle at small scale: evolve, duhamel, monodromy") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot =
      make_random_bounded(8, 2, uniform_grid(0.0, 0.1, 2), 1.0);
  EvolveConfig cfg;
  cfg.k = 1.3;
  cfg.t1 = 0.1;
  cfg.tol = 1e-11;
  cfg.observer_times = {0.1};
  cfg.picture = Picture::interaction;

  FourierState init = constant_one(2);
  Trajectory tr = evolve(init, sch, pot, cfg);
  const FourierState& u_evolve = tr.states.back();

  DuhamelResult du = duhamel_series(init, sch, pot, cfg, 8);
  CHECK(l2_distance(u_evolve, du.state) < 1e-8);
  CHECK(du.last_term_norm < 1e-8);

  MonodromyMatrix mono = dense_monodromy(sch, pot, cfg.k, 2, cfg);
  FourierState u_mono(2, Picture::interaction, 0.1);
  for (int m = -2; m <= 2; ++m) {
    cplx acc = 0.0;
    for (int n = -2; n <= 2; ++n) acc += mono.entries(m + 2, n + 2) * init.at(n);
    u_mono.at(m) = acc;
  }
  CHECK(l2_distance(u_evolve, u_mono) < 1e-8);
  CHECK(mono.unitarity_defect() < 1e-8);

  // duhamel n_terms = 1 is the free evolution
  DuhamelResult free_ev = duhamel_series(init, sch, pot, cfg, 1);
  CHECK(l2_distance(free_ev.state, to_picture(init, sch, cfg.k, Picture::interaction)) <
        1e-14);
}

TEST_CASE("duhamel partial sums for V = i reproduce exp series") {
  const PotentialModel pot = make_constant_imag(1.0);
  EvolveConfig cfg;
  cfg.k = 0.5;
  cfg.t1 = 1.0;
  cfg.picture = Picture::interaction;
  double expect = 0.0, fact = 1.0;
  for (int terms = 1; terms <= 6; ++terms) {
    expect += 1.0 / fact;  // sum_{j<terms} 1^j/j!
    fact *= terms;
    DuhamelResult du =
        duhamel_series(constant_one(2), SymbolSpec::schrodinger(), pot, cfg, terms);
    CHECK_THAT(std::abs(du.state.at(0) - cplx(expect)),
               Catch::Matchers::WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("unitarity drift stays at exponential-truncation level") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot =
      make_random_bounded(3, 4, uniform_grid(0.0, 2.0, 8), 1.0);
  EvolveConfig cfg;
  cfg.k = 1.9;
  cfg.t1 = 2.0;
  cfg.tol = 1e-8;
  cfg.observer_times = {2.0};
  Trajectory tr = evolve(constant_one(16), sch, pot, cfg);
  CHECK(tr.stats.max_norm_drift < 1e-10);
}

TEST_CASE("gauge consistency: interaction evolve vs direct lab stepper") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot =
      make_random_bounded(6, 2, uniform_grid(0.0, 0.3, 3), 1.0);
  EvolveConfig cfg;
  cfg.k = 0.7;
  cfg.t1 = 0.3;
  cfg.tol = 1e-12;
  cfg.observer_times = {0.3};
  cfg.picture = Picture::lab;
  Trajectory tr = evolve(constant_one(4), sch, pot, cfg);
  FourierState lab =
      evolve_lab_frozen(constant_one(4), sch, pot, cfg.k, 0.0, 0.3, 2e-5);
  CHECK(l2_distance(tr.states.back(), lab) < 1e-9);
}

TEST_CASE("fixed-dt global error has slope 2") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot =
      make_random_bounded(12, 2, uniform_grid(0.0, 1.0, 4), 1.0);
  EvolveConfig ref_cfg;
  ref_cfg.k = 1.1;
  ref_cfg.t1 = 1.0;
  ref_cfg.tol = 1e-13;
  ref_cfg.observer_times = {1.0};
  ref_cfg.picture = Picture::interaction;
  Trajectory ref = evolve(constant_one(6), sch, pot, ref_cfg);

  std::vector<double> log_dt, log_err;
  for (int p = 4; p <= 8; ++p) {
    EvolveConfig cfg = ref_cfg;
    cfg.adaptive = false;
    cfg.dt_init = std::pow(2.0, -p);
    Trajectory tr = evolve(constant_one(6), sch, pot, cfg);
    const double err = l2_distance(tr.states.back(), ref.states.back());
    log_dt.push_back(std::log(cfg.dt_init));
    log_err.push_back(std::log(err));
  }
  // least-squares slope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(log_dt.size());
  for (std::size_t i = 0; i < log_dt.size(); ++i) {
    sx += log_dt[i];
    sy += log_err[i];
    sxx += log_dt[i] * log_dt[i];
    sxy += log_dt[i] * log_err[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK_THAT(slope, Catch::Matchers::WithinAbs(2.0, 0.1));
}

TEST_CASE("truncation scan") {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  EvolveConfig cfg;
  cfg.k = 1.0;
  cfg.t1 = 0.05;
  cfg.tol = 1e-11;
  cfg.observer_times = {0.05};

  SECTION("zero potential: all deviations zero") {
    const PotentialModel z = make_zero_potential(0.0, 0.05);
    auto rows = truncation_scan(sch, z, 1.0, cfg, {2, 4, 8}, constant_one(2));
    for (const auto& r : rows) CHECK(r.deviation <= 1e-12);
  }
  SECTION("narrow potential over tiny time plateaus at machine zero") {
    const PotentialModel pot =
        make_random_bounded(2, 2, uniform_grid(0.0, 0.05, 1), 1.0);
    auto rows = truncation_scan(sch, pot, 1.0, cfg, {4, 8, 16}, constant_one(4));
    // By N = 16 the reachable modes are fully inside the band.
    CHECK(rows.back().deviation <= 1e-9);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i].deviation <= rows[i - 1].deviation + 1e-12);
  }
  SECTION("random V over a real horizon: deviations decrease monotonically") {
    const PotentialModel pot =
        make_random_bounded(9, 4, uniform_grid(0.0, 1.0, 4), 1.0);
    EvolveConfig c2 = cfg;
    c2.t1 = 1.0;
    c2.tol = 1e-9;
    c2.observer_times = {0.5, 1.0};
    auto rows = truncation_scan(sch, pot, 1.3, c2, {4, 8, 16}, constant_one(4));
    CHECK(rows[0].deviation > rows[1].deviation);
    CHECK(rows[1].deviation > rows[2].deviation);
  }
  SECTION("N_list must ascend") {
    const PotentialModel z = make_zero_potential(0.0, 0.05);
    CHECK_THROWS_AS(
        truncation_scan(sch, z, 1.0, cfg, {8, 4}, constant_one(4)),
        std::invalid_argument);
  }
}

TEST_CASE("lemma-style perturbation bound on random small systems") {
  // i psi1' = O psi1 ; i psi2' = (O + O1) psi2 + j, both O, O1 self-adjoint,
  // ||f2|| <= 1 - int ||j||:  sup ||psi1 - psi2|| <= int(||O1|| + ||j||) + ||f2 - f1||.
  CounterRng rng(77);
  const int dim = 4;
  auto rand_herm = [&](double scale) {
    Eigen::MatrixXcd H(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        H(i, j) = scale * cplx(rng.symmetric(), rng.symmetric());
    return Eigen::MatrixXcd((H + H.adjoint()) / 2.0);
  };
  auto rand_vec = [&](double norm_target) {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cplx(rng.symmetric(), rng.symmetric());
    return Eigen::VectorXcd(v * (norm_target / v.norm()));
  };

  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd O = rand_herm(1.0);
    const Eigen::MatrixXcd O1 = rand_herm(0.05);
    const Eigen::VectorXcd jf = rand_vec(0.02);
    const double T = 1.0;
    const Eigen::VectorXcd f1 = rand_vec(1.0);
    Eigen::VectorXcd f2 = rand_vec(0.9);  // keeps ||psi2|| <= 1 along the run

    // RK4 on the coupled pair
    const int steps = 400;
    const double h = T / steps;
    Eigen::VectorXcd p1 = f1, p2 = f2;
    const cplx mi(0.0, -1.0);
    auto rhs1 = [&](const Eigen::VectorXcd& y) { return (mi * (O * y)).eval(); };
    auto rhs2 = [&](const Eigen::VectorXcd& y) {
      return (mi * ((O + O1) * y + jf)).eval();
    };
    double sup_diff = (p1 - p2).norm();
    for (int s = 0; s < steps; ++s) {
      auto stepv = [&](Eigen::VectorXcd& y, auto&& f) {
        const Eigen::VectorXcd k1 = f(y);
        const Eigen::VectorXcd k2 = f(y + 0.5 * h * k1);
        const Eigen::VectorXcd k3 = f(y + 0.5 * h * k2);
        const Eigen::VectorXcd k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      };
      stepv(p1, rhs1);
      stepv(p2, rhs2);
      sup_diff = std::max(sup_diff, (p1 - p2).norm());
    }
    const double opnorm_O1 =
        O1.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
            .singularValues()(0);
    const double rhs = T * (opnorm_O1 + jf.norm()) + (f2 - f1).norm();
    if (sup_diff > rhs + 1e-6) ++violations;
  }
  CHECK(violations == 0);
}
