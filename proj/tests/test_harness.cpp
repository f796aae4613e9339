#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "speclab/experiments.hpp"
#include "speclab/fuzz.hpp"
#include "speclab/io.hpp"
#include "speclab/sweep.hpp"

using namespace speclab;

TEST_CASE("k_sweep pinned integrals") {
  SECTION("observable = 1 on [-2,2]") {
    SweepConfig cfg;
    cfg.A = 2.0;
    cfg.M = 64;
    cfg.columns = {"one"};
    cfg.eval = [](double, std::uint64_t) { return std::vector<double>{1.0}; };
    const SweepReport rep = k_sweep(cfg);
    CHECK_THAT(rep.integrals[0], Catch::Matchers::WithinAbs(4.0, 1e-13));
    CHECK(rep.completeness == 1.0);
  }
  SECTION("observable = k^2 on [-1,1], M=100") {
    SweepConfig cfg;
    cfg.A = 1.0;
    cfg.M = 100;
    cfg.columns = {"k2"};
    cfg.eval = [](double k, std::uint64_t) {
      return std::vector<double>{k * k};
    };
    const SweepReport rep = k_sweep(cfg);
    CHECK_THAT(rep.integrals[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-3));
  }
  SECTION("M < 8 rejected") {
    SweepConfig cfg;
    cfg.M = 4;
    cfg.columns = {"x"};
    cfg.eval = [](double, std::uint64_t) { return std::vector<double>{0.0}; };
    CHECK_THROWS_AS(k_sweep(cfg), std::domain_error);
  }
}

TEST_CASE("midpoint aggregation error scales like M^-2") {
  // smooth synthetic observable: k^4 on [-1,1], exact integral 2/5
  std::vector<double> Ms, errs;
  for (int M : {16, 32, 64, 128, 256}) {
    SweepConfig cfg;
    cfg.A = 1.0;
    cfg.M = M;
    cfg.columns = {"k4"};
    cfg.eval = [](double k, std::uint64_t) {
      return std::vector<double>{k * k * k * k};
    };
    const SweepReport rep = k_sweep(cfg);
    Ms.push_back(M);
    errs.push_back(std::abs(rep.integrals[0] - 0.4));
  }
  const SlopeFit fit = fit_loglog(Ms, errs);
  CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(-2.0, 0.3));
}

TEST_CASE("sweep determinism across thread counts") {
  const PotentialModel pot =
      make_random_bounded(5, 4, uniform_grid(0.0, 1.0, 8), 1.0);
  auto run_with = [&](int threads) {
    SweepConfig cfg;
    cfg.A = 1.5;
    cfg.M = 12;
    cfg.seed = 42;
    cfg.threads = threads;
    cfg.columns = {"sup_ha", "drift"};
    cfg.eval = [&](double k, std::uint64_t) {
      const SupLadder lad = track_sup_ladder(SymbolSpec::schrodinger(), pot, k,
                                             12, {0.5}, 0.4, 1e-7);
      return std::vector<double>{lad.sup_h_alpha_sq[0], lad.max_norm_drift};
    };
    return k_sweep(cfg).to_csv();
  };
  const std::string one = run_with(1);
  const std::string two = run_with(2);
  const std::string four = run_with(4);
  CHECK(one == two);
  CHECK(one == four);
}

TEST_CASE("sweep aggregates recomputable from rows") {
  SweepConfig cfg;
  cfg.A = 2.0;
  cfg.M = 16;
  cfg.columns = {"v"};
  cfg.eval = [](double k, std::uint64_t s) {
    return std::vector<double>{k + static_cast<double>(s % 7)};
  };
  const SweepReport rep = k_sweep(cfg);
  const auto re = rep.recompute_integrals();
  for (std::size_t i = 0; i < re.size(); ++i)
    CHECK(re[i] == rep.integrals[i]);
}

TEST_CASE("fuzz_otriv") {
  const OtrivReport rep = fuzz_otriv(5000, 12, 3);
  CHECK(rep.violations == 0);
  CHECK(rep.max_ratio <= 1.0 + 1e-12);  // the bound is never tight from above
  CHECK(rep.trials >= 5000);
}

TEST_CASE("fuzz_krein pinned ratios") {
  using detail::TrigPoly;
  TrigPoly one;
  one.degree = 0;
  one.c = {cplx(1.0)};
  CHECK_THAT(detail::krein_ratio(one, one),
             Catch::Matchers::WithinAbs(0.5, 1e-12));

  TrigPoly eix;
  eix.degree = 1;
  eix.c = {cplx(0.0), cplx(0.0), cplx(1.0)};  // e^{ix}
  // ||e^{2ix}||_{H1/2} = sqrt(3), denominator 2 sqrt(2)
  CHECK_THAT(detail::krein_ratio(eix, eix),
             Catch::Matchers::WithinAbs(std::sqrt(3.0) / (2.0 * std::sqrt(2.0)),
                                        1e-12));

  const KreinReport rep = fuzz_krein(500, 11);
  CHECK(rep.max_ratio > 0.3);
  CHECK(rep.max_ratio < 3.0);
}

TEST_CASE("potential json round trip") {
  const PotentialModel pot =
      make_decaying(17, 3, 0.9, 1.5, geometric_grid(0.0, 10.0, 12));
  const json j = potential_to_json(pot);
  const PotentialModel back = potential_from_json(j);
  CHECK(back.l_max == pot.l_max);
  CHECK(back.grid == pot.grid);
  for (int l = -3; l <= 3; ++l)
    for (std::size_t i = 0; i < pot.grid.size(); ++i)
      CHECK(back.profile(l)[i] == pot.profile(l)[i]);
  CHECK(back.decay_gamma.has_value());
  CHECK(*back.decay_gamma == 0.9);

  json bad = j;
  bad.erase("schema");
  CHECK_THROWS_AS(potential_from_json(bad), std::invalid_argument);
}

TEST_CASE("run_experiment config validation") {
  CHECK_THROWS_AS(run_experiment(json{{"foo", 1}}), ConfigError);
  CHECK_THROWS_AS(run_experiment(json{{"experiment", "nope"}}), ConfigError);
  // theorem11 requires alpha < 1/2
  json bad{{"experiment", "theorem11"}, {"alpha", 0.7}};
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("k_sweep flags failing rows and aggregates the rest") {
  SweepConfig cfg;
  cfg.A = 1.0;
  cfg.M = 8;
  cfg.columns = {"v"};
  cfg.eval = [](double k, std::uint64_t) {
    if (k > 0.8) throw std::runtime_error("synthetic failure");
    return std::vector<double>{1.0};
  };
  const SweepReport rep = k_sweep(cfg);
  CHECK(rep.completeness == 0.875);  // 1 of 8 nodes fails
  int failed = 0;
  for (const auto& r : rep.rows)
    if (!r.ok) {
      ++failed;
      CHECK(r.error == "synthetic failure");
    }
  CHECK(failed == 1);
  // integral computed over completed rows only: 7 * (2/8)
  CHECK_THAT(rep.integrals[0], Catch::Matchers::WithinAbs(7.0 * 0.25, 1e-13));
}

TEST_CASE("monte carlo node mode is flagged and roughly consistent") {
  SweepConfig cfg;
  cfg.A = 1.0;
  cfg.M = 4096;
  cfg.seed = 4;
  cfg.monte_carlo = true;
  cfg.columns = {"k2"};
  cfg.eval = [](double k, std::uint64_t) { return std::vector<double>{k * k}; };
  const SweepReport rep = k_sweep(cfg);
  CHECK(rep.quadrature == "montecarlo");
  CHECK_THAT(rep.integrals[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 0.05));
}

TEST_CASE("zero-mode deviation scaling under paired lambda doubling") {
  // The oscillatory class has no zero Fourier mode (d/dx kills the mean), so
  // |1 - u_hat_0| is second order in lambda: its square scales like
  // lambda^4 (ratio 16), while the tail mass 1 - |u_hat_0|^2 is first-order
  // driven and scales like lambda^2 (ratio 4).
  OscillatoryConfig cfg;
  cfg.gamma = 0.9;
  cfg.lambda = 0.02;
  cfg.T_start = 4.0;
  cfg.t_factor = 8.0;
  cfg.M = 8;
  cfg.n_max = 16;
  cfg.cells = 48;
  cfg.seed = 5;
  cfg.threads = 2;
  const OscillatoryResult r = run_oscillatory(cfg);
  CHECK(r.dev0_sq_ratio >= 8.0);
  CHECK(r.dev0_sq_ratio <= 32.0);
  CHECK_THAT(r.tail_ratio, Catch::Matchers::WithinAbs(4.0, 0.5));
  CHECK(r.T_trend_ratio < 1.0);
}

TEST_CASE("potential loading from a file recipe") {
  const PotentialModel pot =
      make_random_bounded(23, 2, uniform_grid(0.0, 1.0, 4), 0.7);
  const auto path = std::filesystem::temp_directory_path() / "speclab_pot.json";
  write_text_file(path, potential_to_json(pot).dump());
  json recipe{{"file", path.string()}};
  const PotentialModel back = potential_from_config(recipe, 1);
  for (int l = -2; l <= 2; ++l)
    for (std::size_t i = 0; i < pot.grid.size(); ++i)
      CHECK(back.profile(l)[i] == pot.profile(l)[i]);
  std::filesystem::remove(path);

  json missing{{"file", "/nonexistent/pot.json"}};
  CHECK_THROWS_AS(potential_from_config(missing, 1), ConfigError);
}

TEST_CASE("generic sweep experiment: synthetic observables") {
  json cfg{{"experiment", "sweep"}, {"observable", "one"}, {"A", 2.0}, {"M", 64}};
  const ExperimentOutput out = run_experiment(cfg);
  CHECK(out.all_passed());
  CHECK_THAT(out.summary["integrals"][0].get<double>(),
             Catch::Matchers::WithinAbs(4.0, 1e-12));
}

TEST_CASE("growth fit: V = i matches the closed-form exponent") {
  // ||u(t)|| = e^t exactly, so z_T = log(1 + e^T); the fitted theta on the
  // ladder {2,4,8} is the slope of that closed form (-> 1 as T grows).
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot = make_constant_imag(1.0);
  std::vector<double> T_list{2.0, 4.0, 8.0};
  const SupLadder lad = track_sup_ladder(sch, pot, 0.9, 4, T_list, 0.5, 1e-9);
  std::vector<double> z, z_exact;
  for (double v : lad.sup_h_alpha_full) z.push_back(std::log1p(v));
  for (double T : T_list) z_exact.push_back(std::log1p(std::exp(T)));
  const double expected = fit_loglog(T_list, z_exact).slope;
  const SlopeFit fit = fit_loglog(T_list, z);
  CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(expected, 1e-4));
  CHECK_THAT(expected, Catch::Matchers::WithinAbs(1.0, 0.05));
}

TEST_CASE("variation experiment assertions hold") {
  VariationConfig cfg;
  cfg.grid_cells = 24;
  cfg.n_max = 8;
  const auto res = run_variation(cfg);
  const auto out = emit_variation(cfg, res);
  CHECK(out.all_passed());
}

TEST_CASE("evolve dump emits well-formed rows") {
  EvolveDumpConfig cfg;
  cfg.pot = make_constant_imag(1.0);
  cfg.t1 = 0.5;
  cfg.n_samples = 8;
  cfg.n_max = 4;
  const ExperimentOutput out = run_evolve_dump(cfg);
  CHECK(out.all_passed());
  const std::string& csv = out.files[0].second;
  CHECK(csv.find("t,k,l2,Halpha,tail_mu1,tail_mu2,re_u0,im_u0") == 0);
  // 8 sample rows + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-17, -4.0, 1e300}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
