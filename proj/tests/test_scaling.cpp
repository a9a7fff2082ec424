#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "central_spin.hpp"
#include "errors.hpp"
#include "scaling.hpp"

using namespace ptembed;
using namespace ptembed::central_spin;

namespace {

std::vector<FitPoint> synthetic(double a, double b, double gamma, const std::vector<int>& ns) {
  std::vector<FitPoint> pts;
  for (int n : ns) pts.push_back({static_cast<double>(n), a - b * std::pow(static_cast<double>(n), -gamma)});
  return pts;
}

}  // namespace

TEST_SUITE("scaling") {
  TEST_CASE("bisect_root") {
    const BisectResult r = bisect_root([](double x) { return x * x * x - 2.0; }, 0.0, 2.0);
    CHECK(std::abs(r.root - std::cbrt(2.0)) < 1e-12);
    CHECK(bisect_root([](double x) { return x - 0.25; }, 0.25, 1.0).root == 0.25);
    try {
      bisect_root([](double x) { return x * x + 1.0; }, -1.0, 1.0);
      FAIL("expected NoBracket");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoBracket);
    }
  }

  TEST_CASE("contour_alpha hits the target") {
    for (double target : {0.09, 0.54, 0.90}) {
      for (int n : {10, 57, 400}) {
        const ContourPoint pt = contour_alpha(target, n);
        CHECK(std::abs(contour_modsq(n, pt.alpha) - target) < 1e-10);
        CHECK(std::abs(pt.residual) < 1e-10);
        CHECK(pt.alpha > 0.0);
        CHECK(pt.alpha < std::numbers::pi / 2);
      }
    }
  }

  TEST_CASE("contour 0.90 rises toward pi/2 with N") {
    const ContourResult c = contour_trace(0.90, {10, 100, 1000, 10000});
    REQUIRE(c.points.size() == 4);
    for (std::size_t i = 1; i < c.points.size(); ++i) CHECK(c.points[i].alpha > c.points[i - 1].alpha);
    CHECK(c.points.back().alpha > 1.5);
  }

  TEST_CASE("contour_trace: skipped sizes and thread-count independence") {
    const std::vector<int> ns{10, 30, 100, 300};
    const ContourResult one = contour_trace(0.54, ns, kContourAlphaLo, kContourAlphaHi, 1);
    const ContourResult four = contour_trace(0.54, ns, kContourAlphaLo, kContourAlphaHi, 4);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
      CHECK(one.points[i].n_spins == four.points[i].n_spins);
      CHECK(one.points[i].alpha == four.points[i].alpha);
    }
    // a bracket that cannot reach the target
    const ContourResult tight = contour_trace(0.90, ns, 0.01, 0.02);
    CHECK(tight.points.empty());
    CHECK(tight.skipped.size() == ns.size());
    CHECK(tight.skipped[0].n_spins == 10);
  }

  TEST_CASE("power_law_fit round trip") {
    const std::vector<int> ns = log_spaced_sizes(10, 10000, 40);
    const FitResult f = power_law_fit(synthetic(1.5, 2.0, 0.5, ns));
    CHECK(std::abs(f.a - 1.5) < 1e-6);
    CHECK(std::abs(f.b - 2.0) < 1e-6);
    CHECK(std::abs(f.gamma - 0.5) < 1e-6);
    CHECK(f.residual_rms < 1e-8);

    const FitResult g = power_law_fit(synthetic(1.572, 0.524, 0.473, ns));
    CHECK(std::abs(g.a - 1.572) < 1e-6);
    CHECK(std::abs(g.b - 0.524) < 1e-6);
    CHECK(std::abs(g.gamma - 0.473) < 1e-6);
  }

  TEST_CASE("power_law_fit degenerate input") {
    try {
      power_law_fit(synthetic(1.5, 2.0, 0.5, {10, 100}));
      FAIL("expected DegenerateFit");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateFit);
    }
    std::vector<FitPoint> repeated{{10, 1.0}, {10, 1.1}, {20, 1.2}, {20, 1.3}};
    CHECK_THROWS_AS(power_law_fit(repeated), Error);
  }

  TEST_CASE("inset_fit of an exact power law is a straight line") {
    const FitResult f = power_law_fit(synthetic(1.5, 2.0, 0.5, log_spaced_sizes(10, 10000, 40)));
    const LineFit line = inset_fit(f, 1000.0);
    CHECK(line.used > 5);
    CHECK(line.r_squared > 1.0 - 1e-9);
    CHECK(line.slope == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(line.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  }

  TEST_CASE("log_spaced_sizes") {
    const auto ns = log_spaced_sizes(10, 10000, 40);
    CHECK(ns.front() == 10);
    CHECK(ns.back() == 10000);
    CHECK(ns.size() <= 40);
    CHECK(ns.size() >= 35);
    for (std::size_t i = 1; i < ns.size(); ++i) CHECK(ns[i] > ns[i - 1]);
    const auto small = log_spaced_sizes(1, 4, 20);
    CHECK(small == std::vector<int>{1, 2, 3, 4});
  }
}
