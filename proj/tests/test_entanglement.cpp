#include "biphoton/entanglement.hpp"
#include "biphoton/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace biphoton;

namespace {

constexpr double kLp = 0.4047;

DerivedScales scales_with_waist(double w) {
  return derive_scales(ExperimentConfig{kLp, w, 5000.0, 0.7, resolve_crystal("BBO")});
}

// λ_n straight from the closed form.
double closed_form_weight(double a, double b, int n) {
  const double q = (a - b) / (a + b);
  return 4 * a * b / ((a + b) * (a + b)) * std::pow(q * q, n);
}

void check_spectrum_invariants(const SchmidtSpectrum& s) {
  double sum = 0.0, sq = 0.0;
  for (double w : s.weights) {
    CHECK(w >= 0.0);
    sum += w;
    sq += w * w;
  }
  CHECK(s.schmidt_number >= 1.0);
  CHECK(s.schmidt_number * sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sum + s.residual - 1.0) < 1e-9 + 1e-12 * s.weights.size());
}

} // namespace

TEST_CASE("azimuthal widths") {
  const auto s = scales_with_waist(1464.0);
  const auto d = azimuthal_widths(s);
  const double hand = kLp / (oracle::pi * 1464.0 * oracle::kTheta0At07);
  CHECK(d.coincidence_width == doctest::Approx(hand).epsilon(1e-12));
  CHECK(d.single_width == oracle::pi);
  CHECK(d.single_width / d.coincidence_width > 10);
  CHECK(azimuthal_widths(scales_with_waist(2928.0)).coincidence_width ==
        doctest::Approx(d.coincidence_width / 2).epsilon(1e-14));
}

TEST_CASE("R parameter") {
  const auto s = scales_with_waist(1464.0);
  const auto d = azimuthal_widths(s);
  const double r = r_parameter(d);
  CHECK(r == doctest::Approx(1e4).epsilon(0.01));
  CHECK(r == doctest::Approx(oracle::pi * oracle::pi * s.theta0 * 1464.0 / kLp).epsilon(1e-14));

  const auto spec = schmidt_analytic(s.a, s.b);
  CHECK(std::abs(spec.reference("a_over_2b") - r) <= 1e-12 * r);
  CHECK(std::abs(spec.reference("double_gaussian") - r) / r <= 1.0 / (r * r));

  // Δα_c = π gives R = 1.
  CHECK(r_parameter({oracle::pi, oracle::pi}) == 1.0);
}

TEST_CASE("R equals the a/2b Schmidt number at random configurations") {
  oracle::Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const ExperimentConfig cfg{rng.uniform(0.3, 0.5), rng.uniform(50, 5000),
                               rng.uniform(1000, 20000), rng.uniform(0.8, 1.5),
                               resolve_crystal("BBO")};
    const auto s = derive_scales(cfg);
    const double r = r_parameter(azimuthal_widths(s));
    CHECK(std::abs(s.a / (2 * s.b) - r) <= 1e-12 * r);
    CHECK(r == doctest::Approx(oracle::pi * s.theta0 / s.dtheta_p).epsilon(1e-13));
  }
}

TEST_CASE("analytic spectrum") {
  SUBCASE("separable state") {
    const auto s = schmidt_analytic(0.3, 0.3);
    CHECK(s.weights.front() == 1.0);
    CHECK(s.schmidt_number == 1.0);
    CHECK(s.entropy_bits == 0.0);
    CHECK(s.residual == 0.0);
  }
  SUBCASE("closed form and geometric tail") {
    for (double ratio : {1.5, 5.0, 20.0, 300.0}) {
      const auto s = schmidt_analytic(ratio, 1.0, 3);
      CHECK(s.highest_index >= 3);
      for (int n : {0, 1, 2, 3})
        CHECK(s.weights[n] == doctest::Approx(closed_form_weight(ratio, 1.0, n)).epsilon(1e-12));
      const double q = (ratio - 1) / (ratio + 1);
      CHECK(s.residual == doctest::Approx(std::pow(q * q, s.highest_index + 1)).epsilon(1e-9));
      CHECK(s.residual < kResidualTarget);
      CHECK(s.schmidt_number ==
            doctest::Approx((ratio * ratio + 1) / (2 * ratio)).epsilon(1e-8));
      check_spectrum_invariants(s);
    }
  }
  SUBCASE("cap") {
    const auto s = schmidt_analytic(1000.0, 1.0, 0, 50);
    CHECK(s.weights.size() == 50);
    CHECK(s.truncated);
  }
  CHECK_THROWS_AS(schmidt_analytic(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(schmidt_analytic(1.0, -1.0), DomainError);
}

TEST_CASE("analytic entropy grows with a/b") {
  double prev = -1.0;
  for (double ratio = 1.0; ratio < 2000.0; ratio *= 1.5) {
    const double e = schmidt_analytic(ratio, 1.0).entropy_bits;
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("reference-config analytic spectrum") {
  const auto s = scales_with_waist(1464.0);
  const auto spec = schmidt_analytic(s.a, s.b);
  check_spectrum_invariants(spec);
  CHECK_FALSE(spec.truncated);
  CHECK(spec.schmidt_number ==
        doctest::Approx(spec.reference("double_gaussian")).epsilon(1e-6));
}

TEST_CASE("Hermite functions and Schmidt modes are orthonormal") {
  // Trapezoid on a wide window is spectrally accurate for these.
  const double a = 3.0, b = 0.4;
  const double half = 14.0 * std::sqrt(a * b / 2);
  const std::size_t n = 6000;
  const double h = 2 * half / n;
  std::vector<std::vector<double>> modes(51, std::vector<double>(n + 1));
  for (std::size_t k = 0; k <= 50; ++k)
    for (std::size_t i = 0; i <= n; ++i)
      modes[k][i] = schmidt_mode(k, a, b, -half + h * double(i));
  double worst = 0.0;
  for (std::size_t k = 0; k <= 50; ++k)
    for (std::size_t m = 0; m <= k; ++m) {
      long double acc = 0;
      for (std::size_t i = 0; i <= n; ++i)
        acc += modes[k][i] * modes[m][i] * ((i == 0 || i == n) ? 0.5L : 1.0L);
      const double overlap = double(acc * h);
      worst = std::max(worst, std::abs(overlap - (k == m ? 1.0 : 0.0)));
    }
  CHECK(worst < 1e-8);

  CHECK(hermite_function(0, 0.0) == doctest::Approx(std::pow(oracle::pi, -0.25)));
  // u_1(x) = √2 x u_0(x); u_2(x) = (2x² − 1) u_0 / √2.
  for (double x : {-1.3, 0.4, 2.0}) {
    const double u0 = std::pow(oracle::pi, -0.25) * std::exp(-x * x / 2);
    CHECK(hermite_function(1, x) == doctest::Approx(std::sqrt(2.0) * x * u0));
    CHECK(hermite_function(2, x) == doctest::Approx((2 * x * x - 1) * u0 / std::sqrt(2.0)));
  }
}

TEST_CASE("Schmidt series reconstructs the double-Gaussian kernel") {
  const double a = 2.0, b = 0.4;
  const auto spec = schmidt_analytic(a, b, 120);
  const auto kernel = double_gaussian_kernel(a, b);
  double worst = 0.0;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) {
      const double x1 = 0.15 * i, x2 = 0.15 * j;
      double series = 0.0;
      for (std::size_t n = 0; n < spec.weights.size(); ++n)
        series += std::sqrt(spec.weights[n]) * schmidt_mode(n, a, b, x1) *
                  schmidt_mode(n, a, b, x2);
      worst = std::max(worst, std::abs(series - kernel(x1, x2)));
    }
  CHECK(worst < 1e-6);
}

TEST_CASE("numeric Schmidt decomposition") {
  SUBCASE("rank one") {
    auto k = [](double x, double y) {
      return std::exp(-x * x) * (1 + y * y) * std::exp(-y * y);
    };
    const auto r = schmidt_numeric(k, {-5, 5, 200, 0.5});
    CHECK(r.spectrum.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.spectrum.schmidt_number == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("double Gaussian a/b = 5 and 20 against the closed form") {
    for (double ratio : {5.0, 20.0}) {
      const double a = ratio, b = 1.0;
      const KernelGrid grid{-3 * a, 3 * a, std::size_t(6 * a * 8), b};
      const auto r = schmidt_numeric(double_gaussian_kernel(a, b), grid);
      double worst = 0.0;
      for (int n = 0; n < 40; ++n)
        worst = std::max(worst, std::abs(r.spectrum.weights[n] - closed_form_weight(a, b, n)));
      CHECK(worst < 1e-3);
      const double k = (a * a + b * b) / (2 * a * b);
      CHECK(std::abs(r.spectrum.schmidt_number - k) / k < 0.01);
      check_spectrum_invariants(r.spectrum);
    }
  }
  SUBCASE("symmetric kernel gives matching left and right vectors") {
    const double a = 5.0, b = 1.0;
    const auto r = schmidt_numeric(double_gaussian_kernel(a, b),
                                   {-3 * a, 3 * a, 240, b}, true);
    for (Eigen::Index k = 0; k < 8; ++k) {
      const double same = (r.left_modes.col(k) - r.right_modes.col(k)).cwiseAbs().maxCoeff();
      const double flip = (r.left_modes.col(k) + r.right_modes.col(k)).cwiseAbs().maxCoeff();
      CHECK(std::min(same, flip) < 1e-8);
      // Mode values match the analytic Schmidt modes up to sign.
      double d_plus = 0, d_minus = 0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double psi = schmidt_mode(std::size_t(k), a, b, r.nodes[i]);
        d_plus = std::max(d_plus, std::abs(r.left_modes(Eigen::Index(i), k) - psi));
        d_minus = std::max(d_minus, std::abs(r.left_modes(Eigen::Index(i), k) + psi));
      }
      CHECK(std::min(d_plus, d_minus) < 1e-6);
    }
  }
  SUBCASE("too coarse a grid names the required point count") {
    try {
      schmidt_numeric(double_gaussian_kernel(5, 1), {-15, 15, 100, 1.0});
      FAIL("expected ResolutionError");
    } catch (const ResolutionError& e) {
      CHECK(e.required_points() == 240);
      CHECK(std::string(e.what()).find("240") != std::string::npos);
    }
  }
}

TEST_CASE("numeric Schmidt number converges under grid refinement") {
  // Resolution guard relaxed so the pre-asymptotic levels are visible.
  const double a = 5.0, b = 1.0;
  const double k_exact = (a * a + b * b) / (2 * a * b);
  std::vector<double> err;
  for (double h : {2.0, 1.0, 0.5}) {
    KernelGrid g{-3 * a, 3 * a, std::size_t(std::lround(6 * a / h)), b, 0.25};
    err.push_back(std::abs(schmidt_numeric(double_gaussian_kernel(a, b), g)
                               .spectrum.schmidt_number -
                           k_exact) /
                  k_exact);
  }
  for (std::size_t i = 1; i < err.size(); ++i)
    CHECK((err[i] <= err[i - 1] / 2 || err[i] < 1e-12));
  CHECK(err.back() < 1e-6);
}

TEST_CASE("OAM spectrum") {
  const auto s = scales_with_waist(1464.0);
  const auto dist = azimuthal_widths(s);
  const auto spec = oam_spectrum(dist);
  CHECK(spec.method == SchmidtMethod::Oam);
  CHECK(spec.oam_labels.front().l == 0);
  CHECK(spec.oam_labels.front().parity == OamParity::Cos);
  for (std::size_t i = 1; i < spec.weights.size(); i += 2) {
    CHECK(spec.oam_labels[i].l == spec.oam_labels[i + 1].l);
    CHECK(spec.oam_labels[i].parity == OamParity::Cos);
    CHECK(spec.oam_labels[i + 1].parity == OamParity::Sin);
    CHECK(spec.weights[i] == spec.weights[i + 1]);
    CHECK(spec.weights[i] <= spec.weights[i - 1]);
  }
  const double w = dist.coincidence_width;
  for (int l : {0, 1, 100, 3000}) {
    const std::size_t idx = l == 0 ? 0 : std::size_t(2 * l - 1);
    CHECK(spec.weights[idx] / spec.weights[0] ==
          doctest::Approx(std::exp(-double(l) * l * w * w)).epsilon(1e-12));
  }
  check_spectrum_invariants(spec);
  CHECK(spec.residual < kResidualTarget);
  CHECK(spec.reference("printed_closed_form") ==
        doctest::Approx(2 * std::sqrt(2 * oracle::pi) * s.theta0 * 1464.0 / kLp).epsilon(1e-13));
  CHECK(spec.reference("continuum_limit") ==
        doctest::Approx(std::sqrt(2 * oracle::pi) / w).epsilon(1e-13));
  // The explicit sum sits on the continuum limit.
  CHECK(spec.schmidt_number ==
        doctest::Approx(spec.reference("continuum_limit")).epsilon(1e-6));

  CHECK_THROWS_AS(oam_spectrum({0.2, oracle::pi}), RegimeError);
}

TEST_CASE("OAM modes and their Gram matrix") {
  CHECK(oam_mode(0, OamParity::Cos, 0.3) == doctest::Approx(std::sqrt(2 / oracle::pi)));
  CHECK(oam_mode(0, OamParity::Sin, 0.3) == 0.0);
  CHECK_THROWS_AS(oam_mode(2, OamParity::Cos, 1.6), DomainError);

  // Closed form of ∫ over [−π/2, π/2] of cos kα: 2 sin(kπ/2)/k, π at k = 0.
  auto c = [](int k) {
    return k == 0 ? oracle::pi : 2 * std::sin(k * oracle::pi / 2) / k;
  };
  const int l_max = 6;
  const auto g = oam_gram_matrix(l_max);
  std::vector<std::pair<int, bool>> labels{{0, true}};
  for (int l = 1; l <= l_max; ++l) {
    labels.push_back({l, true});
    labels.push_back({l, false});
  }
  REQUIRE(g.rows() == Eigen::Index(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const auto [l, ci] = labels[i];
      const auto [m, cj] = labels[j];
      double expected = 0.0;
      if (ci && cj)
        expected = (c(l - m) + c(l + m)) / oracle::pi;
      else if (!ci && !cj)
        expected = (c(l - m) - c(l + m)) / oracle::pi;
      CHECK(oracle::close(g(Eigen::Index(i), Eigen::Index(j)), expected, 1e-12, 1e-12));
    }
  CHECK(g(0, 0) == doctest::Approx(2.0));
  CHECK(g(1, 1) == doctest::Approx(1.0));
  // cos α and cos 2α overlap on the half circle.
  CHECK(std::abs(g(1, 3)) > 0.1);
}

TEST_CASE("OAM expansion coefficients") {
  const auto check = coefficient_check({1e-3, oracle::pi}, 3000);
  CHECK(check.max_relative_deviation < 1e-3);
  CHECK(check.max_imaginary < 1e-12);
  CHECK(check.coefficients[0] == 1.0);
  CHECK(*std::max_element(check.coefficients.begin(), check.coefficients.end()) == 1.0);
}

TEST_CASE("azimuthal density and measurement semantics") {
  const AzimuthalDistribution d{0.01, oracle::pi};
  CHECK(azimuthal_density(d, 0.3, 0.3) == 1.0);
  CHECK(azimuthal_density(d, 0.31, 0.3) == doctest::Approx(std::exp(-1.0)));
  CHECK(azimuthal_density(d, 1.6, 1.6) == 0.0);

  // Conditional scan at fixed α₂: 1/e half-width Δα_c.
  const double a2 = 0.2;
  const double found = oracle::bisect(
      [&](double a1) { return azimuthal_density(d, a1, a2) - std::exp(-1.0); },
      a2, a2 + 0.5);
  CHECK(found - a2 == doctest::Approx(0.01).epsilon(1e-9));

  // Unconditional: integrate over α₂ and compare with the erf closed form,
  // flat across the interior, half height at the edges.
  for (double a1 : {-1.5, -0.7, 0.0, 0.9, 1.56}) {
    const double num = oracle::simpson(
        [&](double x) { return azimuthal_density(d, a1, x); }, -oracle::pi / 2,
        oracle::pi / 2, 200000);
    CHECK(num / (std::sqrt(oracle::pi) * d.coincidence_width) ==
          doctest::Approx(single_particle_density(d, a1)).epsilon(1e-6));
  }
  CHECK(single_particle_density(d, 0.0) == doctest::Approx(1.0));
  CHECK(single_particle_density(d, oracle::pi / 2) == doctest::Approx(0.5));
}

TEST_CASE("density grid") {
  const AzimuthalDistribution d{1e-3, oracle::pi};
  // Spacing exactly Δα_c / 4.
  const std::size_t n = 401;
  const double half = (n - 1) * d.coincidence_width / 8;
  const auto g = azimuthal_density_grid(d, n, -half, half);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(g.values[i * n + i] == 1.0);
  CHECK(g.values[4 * n] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  double total = 0, band = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      total += g.values[i * n + j];
      if (std::abs(g.axis[i] - g.axis[j]) <= 3 * d.coincidence_width * (1 + 1e-9))
        band += g.values[i * n + j];
    }
  CHECK(band / total == doctest::Approx(std::erf(3.0)).epsilon(1e-4));

  try {
    azimuthal_density_grid(d, 201);
    FAIL("expected ResolutionError");
  } catch (const ResolutionError& e) {
    CHECK(e.required_points() > 201);
  }
}
