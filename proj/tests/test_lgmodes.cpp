#include <doctest.h>

#include <cmath>
#include <random>

#include "lgspdc/dispersion.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/lgmodes.hpp"
#include "lgspdc/quadrature.hpp"

using namespace lgspdc;

namespace {

long double fact(int n) { return std::tgamma((long double)n + 1); }

long double laguerre_sum(int n, int a, long double x) {
  long double s = 0;
  for (int k = 0; k <= n; ++k)
    s += ((k % 2) ? -1.0L : 1.0L) * fact(n + a) / (fact(n - k) * fact(a + k)) * std::pow(x, (long double)k) / fact(k);
  return s;
}

long double alpha_oracle(int l, int ns, int ni, int ms, int mi, long double wp, long double ws, long double wi,
                         long double L) {
  const long double pi = 3.141592653589793238462643383279L;
  const long double D = wp * wp * ws * ws + wp * wp * wi * wi + ws * ws * wi * wi;
  const int M = ms + mi;
  const long double sign = (M % 2) ? -1.0L : 1.0L;
  return L * std::pow(2.0L, l + M - 1.5L) * sign / std::pow(pi, 2.5L) *
         std::sqrt(fact(ns) * fact(ni) * fact(ns + l) * fact(ni + l)) * fact(l + M) /
         (fact(ns - ms) * fact(l + ms) * fact(ms) * fact(ni - mi) * fact(l + mi) * fact(mi)) *
         std::pow(wp, (long double)(2 * M + 2 * l + 1)) * std::pow(ws, (long double)(2 * mi + l + 1)) *
         std::pow(wi, (long double)(2 * ms + l + 1)) / std::pow(D, (long double)(M + l + 1));
}

long double zeta_oracle(int l, int n, int ms, int mi) {
  const long double sign = ((ms + mi) % 2) ? -1.0L : 1.0L;
  return sign * fact(n) * fact(n + l) * fact(l + ms + mi) /
         (fact(n - ms) * fact(l + ms) * fact(ms) * fact(n - mi) * fact(l + mi) * fact(mi));
}

constexpr double kL = 30e-3;

}  // namespace

TEST_SUITE("lgmodes") {
  TEST_CASE("associated Laguerre polynomials") {
    for (int a = 0; a < 6; ++a)
      for (double x : {-1.0, 0.0, 0.3, 7.5}) CHECK(assoc_laguerre(0, a, x) == 1.0);
    for (double x : {-2.0, 0.0, 1.25, 9.0}) CHECK(assoc_laguerre(1, 2, x) == doctest::Approx(3 - x).epsilon(1e-15));
    CHECK(assoc_laguerre(5, 3, 1.7) == doctest::Approx((double)laguerre_sum(5, 3, 1.7L)).epsilon(1e-12));
    for (int n = 0; n <= 12; ++n)
      for (int a = 0; a <= 8; ++a) {
        const double x = 0.37 * (n + 1);
        const double ref = (double)laguerre_sum(n, a, x);
        CHECK(std::abs(assoc_laguerre(n, a, x) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
      }
  }

  TEST_CASE("LG amplitude: real at the waist, unit norm, z-parity of modulus") {
    const double w = 30e-6, k = 2 * M_PI * 1.84 / 810e-9;
    for (int l : {0, 1, 3})
      for (int n : {0, 1, 2}) {
        for (double r : {0.0, 10e-6, 45e-6}) {
          const cplx a = lg_amplitude_x(n, l, w, r, 0.0, k);
          CHECK(std::abs(a.imag()) <= 1e-15 * std::max(1.0, std::abs(a.real())));
          const double z = 7e-3;
          CHECK(std::abs(lg_amplitude_x(n, l, w, r, z, k)) ==
                doctest::Approx(std::abs(lg_amplitude_x(n, l, w, r, -z, k))).epsilon(1e-14));
        }
        const auto norm = quad::adaptive_gk(
            [&](double r) { return 2 * M_PI * r * std::norm(lg_amplitude_x(n, l, w, r, 0.0, k)); }, 0.0, 12 * w,
            1e-12);
        CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-8));
      }
  }

  TEST_CASE("alpha: collapsed case, swap symmetry, independent evaluation") {
    const WaistConfig w{21e-6, 30e-6, 44e-6};
    const double D = w.w_p * w.w_p * w.w_s * w.w_s + w.w_p * w.w_p * w.w_i * w.w_i + w.w_s * w.w_s * w.w_i * w.w_i;
    CHECK(alpha_coeff({0, 0, 0}, 0, 0, w, kL) ==
          doctest::Approx(kL * std::pow(2, -1.5) * std::pow(M_PI, -2.5) * w.w_p * w.w_s * w.w_i / D).epsilon(1e-14));

    const WaistConfig sw{w.w_p, w.w_i, w.w_s};
    for (int n = 0; n <= 3; ++n)
      for (int ms = 0; ms <= n; ++ms)
        for (int mi = 0; mi <= n; ++mi)
          CHECK(alpha_coeff({2, n, n}, ms, mi, w, kL) == doctest::Approx(alpha_coeff({2, n, n}, mi, ms, sw, kL)).epsilon(1e-13));

    const WaistConfig u{30e-6, 30e-6, 30e-6};
    CHECK(alpha_coeff({1, 1, 1}, 1, 0, u, kL) ==
          doctest::Approx((double)alpha_oracle(1, 1, 1, 1, 0, 30e-6L, 30e-6L, 30e-6L, kL)).epsilon(1e-12));
    for (int l = 0; l <= 4; ++l)
      for (int ns = 0; ns <= 3; ++ns)
        for (int ni = 0; ni <= 2; ++ni)
          for (int ms = 0; ms <= ns; ++ms)
            for (int mi = 0; mi <= ni; ++mi)
              CHECK(alpha_coeff({l, ns, ni}, ms, mi, w, kL) ==
                    doctest::Approx((double)alpha_oracle(l, ns, ni, ms, mi, w.w_p, w.w_s, w.w_i, kL)).epsilon(1e-11));
    CHECK_THROWS_AS(alpha_coeff({0, 1, 1}, 2, 0, w, kL), ContractViolation);
  }

  TEST_CASE("coefficients finite over the index cap and waist range") {
    for (int l = 0; l <= 8; ++l)
      for (int n = 0; n <= 8; ++n)
        for (double ws : {5e-6, 50e-6, 500e-6}) {
          const WaistConfig w{ws, 2 * ws > 500e-6 ? 500e-6 : 2 * ws, 5e-6};
          for (int ms = 0; ms <= n; ms += std::max(1, n / 2))
            for (int mi = 0; mi <= n; mi += std::max(1, n / 2)) {
              CHECK(std::isfinite(alpha_coeff({l, n, n}, ms, mi, w, kL)));
              CHECK(std::isfinite(zeta_coeff(l, n, ms, mi)));
              CHECK(std::isfinite(beta_coeff({l, n, n}, ms, mi, {0.05, 20}, kL, 3e7)));
            }
        }
  }

  TEST_CASE("g_star and complex beam parameters") {
    const WaistConfig w{25e-6, 30e-6, 35e-6};
    ComplexBeamParam gp{0.7, 0.0}, gs{1.1, 0.0}, gi{0.9, 0.0};
    CHECK(g_star(gp, gs, gi, w) == cplx(1.0, 0.0));
    gp.u = gs.u = gi.u = 0.4;
    CHECK(gp.value().real() == 1.0);
    CHECK(gp.value().imag() == 0.7 * 0.4);
    gi.u = 0.5;
    CHECK_THROWS_AS(g_star(gp, gs, gi, w), ContractViolation);
  }

  TEST_CASE("factorization of conj(g*) reproduces g_star") {
    const double kp = 3.05e7, ks = 1.43e7, ki = 1.42e7;
    const WaistConfig w{20e-6, 26e-6, 31e-6};
    const BeamProductFactors f = g_factorization(w, kL, kp, ks, ki);
    const double D = 20e-6 * 20e-6 * 26e-6 * 26e-6 + 20e-6 * 20e-6 * 31e-6 * 31e-6 + 26e-6 * 26e-6 * 31e-6 * 31e-6;
    CHECK(f.product == doctest::Approx(kL * kL * (kp - ks - ki) / (kp * ks * ki * D)).epsilon(1e-14));
    CHECK(f.real_roots);
    for (double u : {-0.8, 0.3, 1.0}) {
      const ComplexBeamParam gp{kL / (kp * w.w_p * w.w_p), u}, gs{kL / (ks * w.w_s * w.w_s), u},
          gi{kL / (ki * w.w_i * w.w_i), u};
      const cplx lhs = std::conj(g_star(gp, gs, gi, w));
      const cplx rhs = cplx(1, f.f1 * u) * cplx(1, f.f2 * u);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
    // Neglecting f2: the first-order f1 differs from the exact root by f2 itself.
    const double f1a = f1_first_order(w, kL, kp, ks, ki);
    CHECK(f1a - f.f1 == doctest::Approx(f.f2).epsilon(1e-9));
    CHECK(std::abs(f.f2 / f.f1) < 0.1);
  }

  TEST_CASE("G terms") {
    const WaistConfig w{25e-6, 30e-6, 30e-6};
    const ComplexBeamParam z0{0.8, 0.0};
    CHECK(G_term({0, 0, 0}, 0, 0, z0, z0, z0, w) == cplx(1.0, 0.0));
    // Degenerate substitution: pump without focusing and a very wide pump make g* -> conj(g_d).
    const double u = 0.6;
    const ComplexBeamParam gp{0.0, u}, gd{1.3, u};
    const WaistConfig wide{1.0, 30e-6, 30e-6};
    for (int n = 0; n <= 2; ++n)
      for (int ms = 0; ms <= n; ++ms)
        for (int mi = 0; mi <= n; ++mi) {
          const cplx a = G_term({1, n, n}, ms, mi, gp, gd, gd, wide);
          const cplx b = Gd_term({1, n, n}, ms, mi, gp, gd);
          CHECK(std::abs(a - b) < 1e-8 * std::abs(b));
        }
    // f = 0 limit of the degenerate term.
    const ComplexBeamParam flat{0.0, 0.9};
    for (int l = 0; l <= 5; ++l)
      for (int n = 0; n <= 5; ++n) CHECK(Gd_term({l, n, n}, n, 0, flat, flat) == cplx(1.0, 0.0));
  }

  TEST_CASE("beta and zeta") {
    const double kp = 3.05e7;
    const FocalConfig f{0.8, 1.7};
    CHECK(beta_coeff({0, 0, 0}, 0, 0, f, kL, kp) ==
          doctest::Approx(std::sqrt(kL * kp) / std::pow(2 * M_PI, 2.5) * std::sqrt(0.8) / (1 + 0.8 / 1.7)).epsilon(1e-14));
    CHECK(zeta_coeff(0, 0, 0, 0) == 1.0);
    std::mt19937 rng(7);
    for (int t = 0; t < 20; ++t) {
      const int l = rng() % 6, n = rng() % 5;
      const int ms = rng() % (n + 1), mi = rng() % (n + 1);
      CHECK(zeta_coeff(l, n, ms, mi) == doctest::Approx((double)zeta_oracle(l, n, ms, mi)).epsilon(1e-13));
      CHECK(zeta_coeff(l, n, ms, mi) == doctest::Approx(zeta_coeff(l, n, mi, ms)).epsilon(1e-14));
      CHECK(beta_coeff({l, n, n}, ms, mi, f, kL, kp) == doctest::Approx(beta_coeff({l, n, n}, mi, ms, f, kL, kp)).epsilon(1e-14));
      CHECK(beta_coeff({l, n, n}, ms, mi, f, kL, kp) ==
            doctest::Approx(beta_prefactor(f, kL, kp, l, ms + mi) * zeta_coeff(l, n, ms, mi)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(beta_coeff({0, 1, 2}, 0, 0, f, kL, kp), ContractViolation);
  }

  TEST_CASE("beta approximates alpha at the degenerate waists") {
    const DispersionModel& m = DispersionModel::ktp_default();
    CrystalSpec c;
    const double kp = wavenumber(m, c.pump_omega(), 24.5), kd = wavenumber(m, c.pump_omega() / 2, 24.5);
    for (double fp : {0.5, 1.0, 2.0})
      for (double fsi : {0.5, 1.0, 2.0}) {
        const WaistConfig w = waists_from_focal({fp, fsi}, kL, kp, kd);
        for (int ms = 0; ms <= 1; ++ms)
          for (int mi = 0; mi <= 1; ++mi) {
            const double a = alpha_coeff({1, 1, 1}, ms, mi, w, kL);
            const double b = beta_coeff({1, 1, 1}, ms, mi, {fp, fsi}, kL, kp);
            CHECK(std::abs(b / a - 1) < 0.3);
          }
      }
  }

  TEST_CASE("h bound") {
    const DispersionModel& m = DispersionModel::ktp_default();
    CrystalSpec c;
    const double kp = wavenumber(m, c.pump_omega(), 24.5), kd = wavenumber(m, c.pump_omega() / 2, 24.5);
    const double dk = kp - 2 * kd;
    CHECK(h_bound(kp, kd, 1e-9) == doctest::Approx(1 + dk / kp).epsilon(1e-12));
    const double upper = (1 + dk / kd) / (1 + dk / (2 * kd));
    double prev = h_bound(kp, kd, 1e-3);
    for (double g = 2e-3; g < 100; g *= 1.5) {
      const double h = h_bound(kp, kd, g);
      CHECK(h <= prev);
      CHECK(h <= upper * (1 + 1e-15));
      CHECK(h > 1.0);
      prev = h;
    }
    // Supremum is h(0) = 1.0602 for this dispersion model.
    CHECK(upper < 1.07);
    CHECK_THROWS_AS(h_bound(kp, kd, 0.0), ContractViolation);
  }

  TEST_CASE("mode validation and index cap") {
    CHECK_THROWS_AS(ModeSpec({-1, 0, 0}).validate(), ContractViolation);
    CHECK_THROWS_AS(ModeSpec({0, 1, 2}).n_si(), ContractViolation);
    CHECK_FALSE(index_cap_warning({8, 8, 8}).has_value());
    CHECK(index_cap_warning({9, 0, 0}).has_value());
  }
}
