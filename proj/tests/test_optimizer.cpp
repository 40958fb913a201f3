#include <doctest.h>

#include <cmath>

#include "lgspdc/errors.hpp"
#include "lgspdc/optimizer.hpp"
#include "lgspdc/search.hpp"

using namespace lgspdc;

namespace {

// Smooth single-peaked surface whose ridge f_si(f_p) = 2 sqrt(f_p) is known.
double bump(double fp, double fsi) {
  const double a = std::log(fp / 0.8), b = std::log(fsi / (2 * std::sqrt(fp)));
  return std::exp(-a * a - 2 * b * b);
}

const QTable& table() {
  static const QTable t(DispersionModel::ktp_default(), CrystalSpec{});
  return t;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("log grid endpoints and spacing") {
    const auto g = log_grid(0.05, 20.0, 25);
    CHECK(g.front() == 0.05);
    CHECK(g.back() == 20.0);
    for (std::size_t i = 2; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-12));
  }

  TEST_CASE("1-D search: refinement never loses to the coarse scan, ties go low") {
    LogSearchSettings s;
    const auto f = [](double x) { return -std::pow(std::log(x / 1.37), 2); };
    const Maximum1D m = maximize_log(f, 0.05, 20, s);
    CHECK(m.value >= m.best_coarse_value);
    CHECK(m.x == doctest::Approx(1.37).epsilon(2e-3));
    const Maximum1D flat = maximize_log([](double) { return 1.0; }, 0.05, 20, s);
    CHECK(flat.x == 0.05);
    CHECK(flat.value == 1.0);
  }

  TEST_CASE("bimodal profiles are flagged and the larger peak wins") {
    const auto f = [](double x) {
      return std::exp(-std::pow(std::log(x / 0.2) / 0.2, 2)) + 1.1 * std::exp(-std::pow(std::log(x / 5.0) / 0.2, 2));
    };
    const Maximum1D m = maximize_log(f, 0.05, 20, LogSearchSettings{});
    CHECK(m.bimodal);
    CHECK(m.x == doctest::Approx(5.0).epsilon(5e-3));
  }

  TEST_CASE("bound policy: one widening, then BoundaryHit naming the bound") {
    const Maximum1D m = maximize_log_widening([](double x) { return -std::pow(std::log(x / 40.0), 2); }, 0.05, 20,
                                              LogSearchSettings{}, "f_si");
    CHECK(m.x == doctest::Approx(40.0).epsilon(5e-3));
    try {
      maximize_log_widening([](double x) { return x; }, 0.05, 20, LogSearchSettings{}, "f_si");
      FAIL("expected BoundaryHit");
    } catch (const BoundaryHit& e) {
      CHECK(e.bound() == "upper");
      CHECK(std::string(e.what()).find("f_si") != std::string::npos);
      CHECK(e.value() == doctest::Approx(80.0));
    }
  }

  TEST_CASE("ridge and summit on an analytic surface") {
    const OptimizerSettings s;
    for (double fp : {0.2, 1.0, 3.0}) {
      const RidgePoint r = opt_fsi_given_fp(bump, fp, s);
      CHECK(r.f_si_opt == doctest::Approx(2 * std::sqrt(fp)).epsilon(3e-3));
      CHECK_FALSE(r.bimodal);
    }
    const Summit p = find_summit(bump, s);
    CHECK(p.f_p_opt == doctest::Approx(0.8).epsilon(3e-3));
    CHECK(p.rate_max == doctest::Approx(1.0).epsilon(1e-5));
  }

  TEST_CASE("outputs are invariant under rate rescaling") {
    const OptimizerSettings s;
    const RateFn scaled = [](double a, double b) { return 1e15 * bump(a, b); };
    const SurfaceGrid g{8, 9};
    const RateSurface u = rate_surface(bump, g, s), v = rate_surface(scaled, g, s);
    CHECK(u.summit.f_p_opt == v.summit.f_p_opt);
    CHECK(u.summit.f_si_opt == v.summit.f_si_opt);
    for (std::size_t i = 0; i < u.ridge.size(); ++i) CHECK(u.ridge[i].f_si_opt == v.ridge[i].f_si_opt);
    for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(v.values[i] == doctest::Approx(1e15 * u.values[i]));
    for (const RidgePoint& r : u.ridge) CHECK(u.summit.rate_max >= r.rate_max);
  }

  TEST_CASE("cross-mode penalty") {
    const OptimizerSettings s;
    CHECK(crossmode_penalty(bump, bump, s) == 1.0);
    const RateFn shifted = [](double a, double b) { return bump(a / 4, b); };
    const double p = crossmode_penalty(bump, shifted, s);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }

  TEST_CASE("settings validation") {
    OptimizerSettings s;
    s.f_p = {2.0, 1.0};
    CHECK_THROWS_AS(s.validate(), ContractViolation);
    CHECK_THROWS_AS(SurfaceGrid({4, 25}).validate(), ContractViolation);
  }

  TEST_CASE("focusing ridge orderings for the KTP crystal") {
    // Fixed f_p: the optimal signal/idler focusing grows with l and falls with n.
    for (double fp : {0.5, 1.0}) {
      double prev = 0;
      for (int l = 1; l <= 3; ++l) {
        const double f = opt_fsi_given_fp(table(), {l, 0, 0}, fp).f_si_opt;
        CHECK(f > prev);
        prev = f;
      }
      prev = 1e9;
      for (int n = 0; n <= 3; ++n) {
        const double f = opt_fsi_given_fp(table(), {2, n, n}, fp).f_si_opt;
        CHECK(f < prev);
        prev = f;
      }
    }
  }

  TEST_CASE("mode table layout") {
    OptimizerSettings s;
    s.fp_coarse_points = 9;
    s.fsi_coarse_points = 13;
    const ModeTable t = mode_table(table(), 1, 1, s);
    CHECK(t.entries.size() == 4);
    CHECK(t.at(1, 1).diagonal());
    CHECK_FALSE(t.at(1, 0).diagonal());
    CHECK(t.at(1, 0).summit.rate_max > 0);
    CHECK(crossmode_penalty(table(), {1, 0, 0}, {1, 0, 0}, s) == 1.0);
  }
}
