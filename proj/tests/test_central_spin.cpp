#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "central_spin.hpp"
#include "errors.hpp"
#include "test_support.hpp"

using namespace ptembed;
using namespace ptembed::central_spin;
using embedding::build_h_total;
using linalg::Index;
using linalg::kI;

namespace {

ModelParams orthogonality_params(int n, double theta) {
  return ModelParams::from_theta(n, theta, std::numbers::pi / 2, phi1_star(n));
}

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

}  // namespace

TEST_SUITE("central_spin") {
  TEST_CASE("eigen_patterns and product_x_state") {
    const auto patterns = eigen_patterns(3);
    REQUIRE(patterns.size() == 8);
    CHECK(patterns[0] == 0);
    for (std::size_t i = 1; i < patterns.size(); ++i) {
      CHECK(__builtin_popcountll(patterns[i - 1]) <= __builtin_popcountll(patterns[i]));
    }
    const ComplexMatrix h = embedding::seed_hamiltonian(3);
    for (auto pattern : patterns) {
      const ComplexVector v = product_x_state(3, pattern);
      const double e = -3.0 + 2.0 * __builtin_popcountll(pattern);
      CHECK((h * v - e * v).norm() < 1e-14);
      CHECK(v.norm() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("spectral_family: ground family") {
    const SpectralFamily f = spectral_family(ModelParams::from_theta(3, 0.4, 0.9, 0.2), 0);
    CHECK(f.epsilon == -3.0);
    CHECK(f.pattern == 0);
    ComplexVector down_x(2);
    down_x << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    const ComplexVector expected = linalg::kron(linalg::kron(down_x, down_x), down_x);
    CHECK((f.psi - expected).norm() < 1e-14);
    CHECK_THROWS_AS(spectral_family(ModelParams::from_theta(2, 0.1), 4), Error);
  }

  TEST_CASE("spectral_family at theta = 0 has product dark states") {
    const ModelParams p = ModelParams::from_theta(2, 0.0);
    const EmbeddingOperators ops = build_h_total(p);
    const SpectralFamily f = spectral_family(ops, 0);
    const double c = ops.c;
    const Complex plus_factor = (1.0 - kI * std::sqrt(c - 1.0)) / std::sqrt(c);
    CHECK((f.bath_plus - plus_factor * f.psi).norm() < 1e-13);
    CHECK((f.bath_minus - std::conj(plus_factor) * f.psi).norm() < 1e-13);
    CHECK(dark_entropy(p, 0) < 1e-10);
  }

  TEST_CASE("spectral_family: all members are H_T eigenstates") {
    const ModelParams p = ModelParams::from_alpha(2, 1.2, 0.7, 1.9);
    const EmbeddingOperators ops = build_h_total(p);
    for (int k = 0; k < 4; ++k) {
      CAPTURE(k);
      const SpectralFamily f = spectral_family(ops, k);
      CHECK(family_eigen_residual(ops, f) < 1e-9);
      const ComplexVector& chi = f.dark_plus;
      CHECK((ops.h_total * chi - f.epsilon * chi).norm() < 1e-9);
      CHECK(chi.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(f.dark_minus.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("dark states are product states, bright states are not") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 4; ++trial) {
      const ModelParams p = testing::random_params(rng, 2 + trial % 2);
      CHECK(dark_entropy(p, 0) < 1e-10);
      CHECK(dark_entropy(p, 1) < 1e-10);
    }
    // theta = 0: Q is a scalar, so the bright state factorizes with ancilla
    // populations {1/c, 1 - 1/c} and zero entropy.
    const ModelParams flat = ModelParams::from_theta(2, 0.0);
    const double c = flat.c();
    const ComplexMatrix rho = linalg::partial_trace_ancilla(spectral_family(flat, 0).bright_plus.amplitudes);
    CHECK(rho(0, 0).real() == doctest::Approx(1.0 / c).epsilon(1e-13));
    CHECK(rho(1, 1).real() == doctest::Approx(1.0 - 1.0 / c).epsilon(1e-13));
    CHECK(std::abs(rho.determinant()) < 1e-14);
    CHECK(bright_entropy(flat, 0) < 1e-10);
    // entangled away from theta = 0
    CHECK(bright_entropy(ModelParams::from_theta(2, 0.8, 1.0, 1.0), 0) > 1e-3);
  }

  TEST_CASE("overlap_dense at theta = 0") {
    for (int n : {1, 2, 4}) {
      const OverlapReport r = overlap_dense(ModelParams::from_theta(n, 0.0, 1.0, 0.5));
      const double c = std::pow(2.0, n);
      CHECK(std::abs(r.overlap) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.overlap.real() == doctest::Approx(-1.0 + 2.0 / c).epsilon(1e-12));
      CHECK(std::abs(r.overlap.imag()) == doctest::Approx(2.0 * std::sqrt(c - 1.0) / c).epsilon(1e-12));
    }
  }

  TEST_CASE("overlap_dense with n = z against the Hamming-weight sum") {
    for (double theta : {0.2, 0.7}) {
      const int n = 4;
      const ModelParams p = ModelParams::from_theta(n, theta);
      const OverlapReport r = overlap_dense(p);
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) {
        sum += std::exp(log_binomial(n, k) - n * std::log(2.0) + 2.0 * theta * (n - 2 * k) - p.log_c());
      }
      CHECK(r.overlap.real() == doctest::Approx(-1.0 + 2.0 * sum).epsilon(1e-12));
      CHECK(r.route_difference < 1e-12);
    }
  }

  TEST_CASE("overlap_binomial matches overlap_dense") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 10; ++trial) {
      const ModelParams p = testing::random_params(rng, 1 + trial % 6, 2.0);
      const OverlapReport d = overlap_dense(p);
      const OverlapReport b = overlap_binomial(p);
      CHECK(std::abs(d.overlap - b.overlap) < 1e-10);
      CHECK(std::abs(d.modulus_sq - b.modulus_sq) < 1e-10);
      CHECK(d.f3 == doctest::Approx(b.f3).epsilon(1e-12));
    }
    const ModelParams six = ModelParams::from_theta(6, 0.8, 1.3, 4.0);
    CHECK(std::abs(overlap_dense(six).overlap - overlap_binomial(six).overlap) < 1e-10);
  }

  TEST_CASE("overlap_binomial weights") {
    // theta1 = pi/2: w = (1 - cos phi1)/2
    for (double phi1 : {0.3, 1.7, 2.9}) {
      const ModelParams p = ModelParams::from_theta(5, 1.0, std::numbers::pi / 2, phi1);
      CHECK(aligned_down_weight(p) == doctest::Approx((1.0 - std::cos(phi1)) / 2.0).epsilon(1e-14));
      const OverlapReport r = overlap_binomial(p);
      const double wn = std::pow((1.0 - std::cos(phi1)) / 2.0, 5);
      CHECK(r.f3 == doctest::Approx(std::pow(2.0 * wn - 1.0, 2)).epsilon(1e-12));
    }
    const ModelParams g = ModelParams::from_theta(3, 1.0, 0.8, 2.5);
    CHECK(aligned_down_weight(g) == doctest::Approx((1.0 - std::sin(0.8) * std::cos(2.5)) / 2.0).epsilon(1e-14));
  }

  TEST_CASE("overlap_binomial at large N stays finite and small") {
    const OverlapReport r = overlap_binomial(orthogonality_params(2000, 5.0));
    CHECK(std::isfinite(r.modulus_sq));
    CHECK(r.modulus_sq < 1e-4);
    const OverlapReport big = overlap_binomial(ModelParams::from_theta(10000, 20.0, 1.0, 2.0));
    CHECK(std::isfinite(big.overlap.real()));
    CHECK(std::isfinite(big.overlap.imag()));
  }

  TEST_CASE("dpmax_log") {
    CHECK(dpmax_log(5, 30.0) > -1e-20);
    CHECK(dpmax_log(10, 0.5) * 10.0 == doctest::Approx(dpmax_log(100, 0.5)).epsilon(1e-14));
    CHECK(std::exp(dpmax_log(4, std::log(2.0) / 4)) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    const ModelParams p = ModelParams::from_theta(4, std::log(2.0) / 4, 1.0, 1.0);
    const auto pr = embedding::build_p(p);
    const double top = linalg::herm_eig(pr.p).eigenvalues.maxCoeff() / std::sqrt(pr.c);
    CHECK(std::exp(dpmax_log(p)) == doctest::Approx(top).epsilon(1e-12));
    CHECK(std::exp(dpmax_log(3, 0.0)) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
  }

  TEST_CASE("limit_bath_state") {
    const LimitBathState deep = limit_bath_state(orthogonality_params(4, 5.0));
    CHECK(deep.fidelity_plus > 1.0 - 1e-6);
    CHECK(deep.fidelity_minus > 1.0 - 1e-6);
    const LimitBathState shallow = limit_bath_state(orthogonality_params(4, 0.2));
    CHECK(shallow.fidelity_plus < 0.99);
    const ModelParams p = ModelParams::from_theta(4, 1.0, 1.1, 2.3);
    CHECK(limit_bath_state(p).up_weight == doctest::Approx(std::pow(aligned_down_weight(p), 4)).epsilon(1e-12));
  }

  TEST_CASE("phi1_star") {
    CHECK(phi1_star(1) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    CHECK(phi1_star(100) == doctest::Approx(2.0 * std::asin(std::sqrt(std::pow(2.0, -0.01)))).epsilon(1e-15));
    CHECK(phi1_star(100) == doctest::Approx(2.97518).epsilon(1e-6));
    CHECK(phi1_star(8) == doctest::Approx(2.55713).epsilon(1e-6));
    for (int n : {1, 8, 100, 5000}) {
      CHECK(std::pow(std::sin(phi1_star(n) / 2.0), 2 * n) == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(phi1_star(0), Error);
  }

  TEST_CASE("f_values, pinned_f3, solve_beta") {
    for (int n : {3, 8, 100}) CHECK(f_values(n, 0.3, phi1_star(n), std::numbers::pi / 2).f3 < 1e-24);
    CHECK(f_values(200, 0.3, phi1_star(100), std::numbers::pi / 2).f3 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(f_values(10, 0.3, 1.0, 1.0).f1 == 1.0 / 1024.0);
    CHECK(f_values(7, 0.0, 1.0, 1.0).f2 == 1.0);

    CHECK(pinned_f3(100, 100) == 0.0);
    CHECK(pinned_f3(200, 100) == doctest::Approx(0.25).epsilon(1e-15));
    for (int n = 101; n <= 1000; n += 37) {
      const double direct = f_values(n, 0.0, phi1_star(100), std::numbers::pi / 2).f3;
      CHECK(std::abs(direct - pinned_f3(n, 100)) < 1e-12);
    }

    CHECK(solve_beta(100, 0.0) == std::numbers::pi / 2);
    CHECK(solve_beta(50, 1.0) == 0.0);
    CHECK(solve_beta(200, 0.25) == doctest::Approx(std::acos(std::pow(0.25, 1.0 / 400.0))).epsilon(1e-14));
    CHECK(solve_beta(200, 0.25) == doctest::Approx(0.08318).epsilon(5e-3));
    // inverse relation
    const double beta = solve_beta(37, 0.4);
    CHECK(std::pow(std::cos(beta), 2 * 37) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(solve_beta(10, 1.5), Error);
  }

  TEST_CASE("spin_flip_element") {
    CHECK(spin_flip_element(ModelParams::from_theta(3, 0.0, 1.0, 1.0), 0) == doctest::Approx(1.0).epsilon(1e-12));
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 8; ++trial) {
      const ModelParams p = testing::random_params(rng, 1 + trial % 4);
      CHECK(std::abs(spin_flip_element(p, 0) - overlap_dense(p).modulus_sq) < 1e-12);
    }
  }

  TEST_CASE("orthogonality parameters deep in the limit") {
    const ModelParams p = orthogonality_params(8, 10.0);
    CHECK(std::abs(overlap_binomial(p).overlap) < 1e-5);
    CHECK(spin_flip_element(p, 0) < 1e-10);
    CHECK(bright_entropy(p, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(bath_site_entropy(p) > 0.01);
  }

  TEST_CASE("bath_site_entropy") {
    CHECK(bath_site_entropy(ModelParams::from_theta(3, 0.0, 0.4, 0.4)) < 1e-10);
    const double ortho = bath_site_entropy(orthogonality_params(8, 5.0));
    CHECK(ortho > 0.01);
    CHECK(bath_site_entropy(ModelParams::from_theta(8, 0.6)) < ortho);
  }

  TEST_CASE("magnetic_analysis") {
    const ModelParams p = ModelParams::from_alpha(2, 1.0);
    const MagneticReport zero = magnetic_analysis(p, 0.0);
    const std::vector<double> doubled{-2, -2, 0, 0, 0, 0, 2, 2};
    for (Index i = 0; i < 8; ++i) CHECK(std::abs(zero.spectrum(i) - doubled[static_cast<std::size_t>(i)]) < 1e-9);

    const MagneticReport r = magnetic_analysis(p, 0.3);
    std::vector<double> expected{-2.3, -1.7, -0.3, -0.3, 0.3, 0.3, 1.7, 2.3};
    for (Index i = 0; i < 8; ++i) CHECK(std::abs(r.spectrum(i) - expected[static_cast<std::size_t>(i)]) < 1e-9);
    CHECK(r.spectrum_residual < 1e-9);
    CHECK(r.splitting == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(r.dark_residual_plus < 1e-9);
    CHECK(r.dark_residual_minus < 1e-9);

    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 4; ++trial) {
      const ModelParams q = testing::random_params(rng, 1 + trial % 3);
      const MagneticReport m = magnetic_analysis(q, testing::uniform(rng, -1.0, 1.0), trial % 2);
      CHECK(m.commutator_norm < 1e-10);
      CHECK(m.spectrum_residual < 1e-9);
    }
  }
}
