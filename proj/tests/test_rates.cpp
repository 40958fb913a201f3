#include <doctest.h>

#include <chrono>
#include <cmath>

#include "lgspdc/rates.hpp"

using namespace lgspdc;

namespace {

const DispersionModel& M() { return DispersionModel::ktp_default(); }

const QTable& table() {
  static const QTable t(M(), CrystalSpec{});
  return t;
}

}  // namespace

TEST_SUITE("rates") {
  TEST_CASE("spectrum is exchange symmetric and normalized") {
    CrystalSpec c;
    SpectrumGrid g;
    g.omega_r_lo = 0.995;
    g.omega_r_hi = 1.005;
    g.points = 201;
    for (const ModeSpec& m : {ModeSpec{0, 0, 0}, ModeSpec{2, 1, 1}}) {
      const SpectrumResult s = spectrum(M(), m, FocalConfig{1.0, 1.0}, c, g);
      double mx = 0;
      for (double p : s.probability) mx = std::max(mx, p);
      CHECK(mx == 1.0);
      for (int i = 0; i < g.points; ++i)
        CHECK(s.probability[i] == doctest::Approx(s.probability[g.points - 1 - i]).epsilon(1e-8));
      CHECK(peak_omega_r(s) > 1.0);
      const SpectrumResult raw = spectrum(M(), m, FocalConfig{1.0, 1.0}, c, g, Normalization::Raw);
      CHECK(raw.probability[50] == doctest::Approx(s.probability[50] * s.raw_max).epsilon(1e-12));
    }
  }

  TEST_CASE("peak refinement recovers a parabola vertex") {
    SpectrumResult s;
    for (int i = 0; i <= 100; ++i) {
      const double r = 0.9 + 0.002 * i;
      s.omega_r.push_back(r);
      s.probability.push_back(1.0 - std::pow((r - 1.0337) / 0.05, 2));
    }
    CHECK(peak_omega_r(s) == doctest::Approx(1.0337).epsilon(1e-12));
  }

  TEST_CASE("phase kernel basics") {
    const QTable& t = table();
    const ResolvedWindow& w = t.window();
    CHECK(t.node(0).real() == doctest::Approx(w.omega_hi - w.omega_lo).epsilon(1e-12));
    CHECK(std::abs(t.node(0).imag()) < 1e-12 * t.node(0).real());
    for (int k : {1, 37, 800, 2048}) CHECK(std::abs(t.node(-k) - std::conj(t.node(k))) < 1e-12 * std::abs(t.node(0)));
    CHECK(std::abs(t.at(2.0)) < std::abs(t.at(0.1)));
    // Tabulated lags are exact; Q is too sharply peaked near 0 for interpolation
    // to be accurate, which is why the kernel route only uses the nodes.
    for (int k : {1, 6, 100, 1000}) {
      const cplx d = q_kernel_direct(M(), t.crystal(), {}, k * QTable::kStep);
      CHECK(std::abs(t.node(k) - d) < 1e-9 * std::abs(t.node(0)));
      CHECK(t.at(k * QTable::kStep) == t.node(k));
    }
  }

  TEST_CASE("kernel route: FFT double sum equals the term-by-term sum") {
    for (const ModeSpec& m : {ModeSpec{0, 0, 0}, ModeSpec{3, 1, 1}}) {
      const FocalConfig f{0.7, 2.1};
      const double a = pair_rate_kernel(table(), m, f).value;
      const double b = pair_rate_kernel_bruteforce(table(), m, f);
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
  }

  TEST_CASE("kernel and direct routes agree") {
    CrystalSpec c;
    for (const ModeSpec& m : {ModeSpec{0, 0, 0}, ModeSpec{1, 1, 1}, ModeSpec{3, 0, 0}})
      for (FocalConfig f : {FocalConfig{0.5, 1.0}, FocalConfig{2.0, 4.0}}) {
        const RateResult k = pair_rate_kernel(table(), m, f);
        const RateResult d = pair_rate_direct(M(), m, f, c);
        CHECK(d.converged);
        CHECK(k.value == doctest::Approx(d.value).epsilon(1e-4));
      }
  }

  TEST_CASE("rate is insensitive to widening the window") {
    CrystalSpec c;
    const FrequencyWindow narrow{0.8, 1.2}, wide{0.76, 1.24};
    const QTable a(M(), c, narrow), b(M(), c, wide);
    for (const ModeSpec& m : {ModeSpec{0, 0, 0}, ModeSpec{2, 2, 2}}) {
      const RateResult ra = pair_rate_kernel(a, m, {1.0, 1.0});
      const RateResult rb = pair_rate_kernel(b, m, {1.0, 1.0});
      CHECK_FALSE(ra.window_clipped);
      CHECK(std::abs(ra.value / rb.value - 1) < 1e-3);
    }
  }

  TEST_CASE("full-waist engine") {
    CrystalSpec c;
    const FullRateEngine e(M(), c);
    const WaistConfig w{18e-6, 24e-6, 31e-6}, sw{18e-6, 31e-6, 24e-6};
    CHECK(e.rate({1, 1, 1}, w).value == e.rate({1, 1, 1}, sw).value);
    CHECK(e.rate_raw({1, 1, 1}, w).value == doctest::Approx(e.rate_raw({1, 1, 1}, sw).value).epsilon(1e-8));
    const RateResult ref = pair_rate_full_direct(M(), {1, 1, 0}, w, c);
    CHECK(e.rate({1, 1, 0}, w).value == doctest::Approx(ref.value).epsilon(1e-4));
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(FrequencyWindow({1.1, 1.3}).validate(), ContractViolation);
    CHECK_THROWS_AS(SpectrumGrid({1.3, 0.7, 11}).validate(), ContractViolation);
    WaistSurfaceSpec s;
    s.points_s = 1;
    CHECK_THROWS_AS(s.validate(), ContractViolation);
  }
}
