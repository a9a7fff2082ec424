#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include <ptembed/ptembed.h>

namespace {

struct Params {
  ptembed_params* handle = nullptr;
  ~Params() { ptembed_params_free(handle); }
};

struct Model {
  ptembed_model* handle = nullptr;
  ~Model() { ptembed_model_free(handle); }
};

std::vector<double> copy_operator(const ptembed_model* model, ptembed_operator op, size_t* dim_out) {
  size_t dim = 0;
  REQUIRE(ptembed_model_dim(model, op, &dim) == PTEMBED_OK);
  std::vector<double> buf(2 * dim * dim);
  REQUIRE(ptembed_model_copy_operator(model, op, buf.data(), buf.size()) == PTEMBED_OK);
  *dim_out = dim;
  return buf;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(ptembed_version()) > 0);
  CHECK(std::string(ptembed_status_name(PTEMBED_OK)) == "Ok");
  CHECK(std::string(ptembed_status_name(PTEMBED_ERR_CAP_EXCEEDED)) == "CapExceeded");
  CHECK(std::string(ptembed_status_name(PTEMBED_ERR_NO_BRACKET)) == "NoBracket");
}

TEST_CASE("parameters") {
  Params p;
  REQUIRE(ptembed_params_from_alpha(3, std::numbers::pi / 6, 1.0, 0.5, &p.handle) == PTEMBED_OK);
  ptembed_param_values v{};
  REQUIRE(ptembed_params_get(p.handle, &v) == PTEMBED_OK);
  CHECK(v.n_spins == 3);
  CHECK(v.theta == doctest::Approx(0.274653).epsilon(1e-6));
  CHECK(v.log_c == doctest::Approx(3 * std::log(2 * std::cosh(2 * v.theta))).epsilon(1e-14));

  ptembed_params* bad = nullptr;
  CHECK(ptembed_params_from_alpha(2, std::numbers::pi / 2, 0, 0, &bad) == PTEMBED_ERR_OUT_OF_DOMAIN);
  CHECK(bad == nullptr);
  CHECK(std::string(ptembed_last_error()).find("OutOfDomain") != std::string::npos);
  CHECK(ptembed_params_from_theta(0, 0.1, 0, 0, &bad) == PTEMBED_ERR_INVALID_ARGUMENT);
  CHECK(ptembed_params_from_theta(2, 0.1, 0, 0, nullptr) == PTEMBED_ERR_NULL_POINTER);
  CHECK(ptembed_params_set_caps(p.handle, 0, 5) == PTEMBED_ERR_INVALID_ARGUMENT);
  ptembed_params_free(nullptr);
}

TEST_CASE("scalar helpers") {
  double theta = 0;
  CHECK(ptembed_theta_of_alpha(0.0, &theta) == PTEMBED_OK);
  CHECK(theta == 0.0);
  double d = 0;
  REQUIRE(ptembed_dpmax_log(4, std::log(2.0) / 4, &d) == PTEMBED_OK);
  CHECK(std::exp(d) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  double phi = 0;
  REQUIRE(ptembed_phi1_star(1, &phi) == PTEMBED_OK);
  CHECK(phi == doctest::Approx(std::numbers::pi / 2));
  ptembed_f_values f{};
  REQUIRE(ptembed_f_values_eval(10, 0.0, 1.0, 1.0, &f) == PTEMBED_OK);
  CHECK(f.f1 == 1.0 / 1024);
  CHECK(f.f2 == 1.0);
  double f3 = 1;
  REQUIRE(ptembed_pinned_f3(100, 100, &f3) == PTEMBED_OK);
  CHECK(f3 == 0.0);
  double beta = 0;
  REQUIRE(ptembed_solve_beta(100, f3, &beta) == PTEMBED_OK);
  CHECK(beta == std::numbers::pi / 2);
  CHECK(ptembed_solve_beta(100, 2.0, &beta) == PTEMBED_ERR_OUT_OF_DOMAIN);
}

TEST_CASE("model operators") {
  Params p;
  REQUIRE(ptembed_params_from_theta(2, 0.0, 0.3, 0.3, &p.handle) == PTEMBED_OK);
  Model m;
  REQUIRE(ptembed_model_build(p.handle, &m.handle) == PTEMBED_OK);
  double c = 0, log_c = 0;
  REQUIRE(ptembed_model_c(m.handle, &c, &log_c) == PTEMBED_OK);
  CHECK(c == doctest::Approx(4.0));

  size_t dim = 0;
  const auto q = copy_operator(m.handle, PTEMBED_OP_Q, &dim);
  CHECK(dim == 4);
  for (size_t i = 0; i < dim; ++i) {
    for (size_t j = 0; j < dim; ++j) {
      const double expected = i == j ? std::sqrt(3.0) : 0.0;
      CHECK(std::abs(q[2 * (i * dim + j)] - expected) < 1e-12);
      CHECK(std::abs(q[2 * (i * dim + j) + 1]) < 1e-12);
    }
  }
  const auto ht = copy_operator(m.handle, PTEMBED_OP_H_TOTAL, &dim);
  CHECK(dim == 8);
  // I (x) h: row 0 couples to states 1 and 2
  CHECK(ht[2 * 1] == doctest::Approx(1.0));
  CHECK(ht[2 * 2] == doctest::Approx(1.0));
  CHECK(std::abs(ht[2 * 4]) < 1e-15);

  std::vector<double> small(4);
  CHECK(ptembed_model_copy_operator(m.handle, PTEMBED_OP_H_TOTAL, small.data(), small.size()) ==
        PTEMBED_ERR_BUFFER_TOO_SMALL);
  CHECK(ptembed_model_dim(m.handle, static_cast<ptembed_operator>(42), &dim) == PTEMBED_ERR_INVALID_ARGUMENT);
}

TEST_CASE("model respects the construction cap") {
  Params p;
  REQUIRE(ptembed_params_from_theta(4, 0.2, 0, 0, &p.handle) == PTEMBED_OK);
  REQUIRE(ptembed_params_set_caps(p.handle, 2, 3) == PTEMBED_OK);
  ptembed_model* m = nullptr;
  CHECK(ptembed_model_build(p.handle, &m) == PTEMBED_ERR_CAP_EXCEEDED);
  CHECK(m == nullptr);
  CHECK(std::string(ptembed_last_error()).find("CapExceeded") != std::string::npos);
}

TEST_CASE("Pauli decomposition through the C API") {
  Params p;
  REQUIRE(ptembed_params_from_alpha(2, 0.9, 0, 0, &p.handle) == PTEMBED_OK);
  Model m;
  REQUIRE(ptembed_model_build(p.handle, &m.handle) == PTEMBED_OK);
  ptembed_pauli_list* list = nullptr;
  REQUIRE(ptembed_model_pauli(m.handle, 1e-12, &list) == PTEMBED_OK);
  CHECK(ptembed_pauli_count(list) == 8);
  const char* label = nullptr;
  double coeff = 0;
  REQUIRE(ptembed_pauli_term(list, 0, &label, &coeff) == PTEMBED_OK);
  CHECK(std::string(label) == "IIX");
  CHECK(ptembed_pauli_term(list, 8, &label, &coeff) == PTEMBED_ERR_BAD_INDEX);
  ptembed_pauli_free(list);

  ptembed_n2_coefficients n2{};
  REQUIRE(ptembed_n2_coefficients_eval(0.0, &n2) == PTEMBED_OK);
  CHECK(n2.a1 == doctest::Approx(1.0));
  CHECK(std::abs(n2.b2) < 1e-12);
}

TEST_CASE("trajectory") {
  Params p;
  REQUIRE(ptembed_params_from_theta(1, 0.5, 0.0, 0.0, &p.handle) == PTEMBED_OK);
  const std::vector<double> grid{0.0, 0.5, 1.0, 3.0};
  ptembed_trajectory* traj = nullptr;
  REQUIRE(ptembed_trajectory_run(p.handle, nullptr, 0, grid.data(), grid.size(), &traj) == PTEMBED_OK);
  size_t rows = 0, bath = 0;
  REQUIRE(ptembed_trajectory_size(traj, &rows, &bath) == PTEMBED_OK);
  CHECK(rows == 4);
  CHECK(bath == 2);
  for (size_t i = 0; i < rows; ++i) {
    ptembed_trajectory_row row{};
    REQUIRE(ptembed_trajectory_row_get(traj, i, &row) == PTEMBED_OK);
    CHECK(row.t == grid[i]);
    CHECK(row.oracle_distance < 1e-9);
    CHECK(row.pt_norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  std::vector<double> state(4);
  CHECK(ptembed_trajectory_state(traj, 0, state.data(), state.size()) == PTEMBED_OK);
  CHECK(ptembed_trajectory_state(traj, 0, state.data(), 3) == PTEMBED_ERR_BUFFER_TOO_SMALL);
  ptembed_trajectory_free(traj);

  // explicit state that is not PT-normalized
  const std::vector<double> psi{3.0, 0.0, 0.0, 0.0};
  ptembed_trajectory* bad = nullptr;
  CHECK(ptembed_trajectory_run(p.handle, psi.data(), 2, grid.data(), grid.size(), &bad) ==
        PTEMBED_ERR_NOT_PT_NORMALIZED);
  CHECK(ptembed_trajectory_run(p.handle, psi.data(), 3, grid.data(), grid.size(), &bad) == PTEMBED_ERR_BAD_LENGTH);
}

TEST_CASE("overlap and dark-state report") {
  Params p;
  REQUIRE(ptembed_params_from_theta(4, 0.0, 1.0, 1.0, &p.handle) == PTEMBED_OK);
  ptembed_overlap_report dense{}, binom{};
  REQUIRE(ptembed_overlap(p.handle, PTEMBED_OVERLAP_DENSE, &dense) == PTEMBED_OK);
  REQUIRE(ptembed_overlap(p.handle, PTEMBED_OVERLAP_BINOMIAL, &binom) == PTEMBED_OK);
  CHECK(dense.modulus_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(dense.overlap_re - binom.overlap_re) < 1e-12);
  CHECK(std::abs(dense.overlap_im - binom.overlap_im) < 1e-12);

  Params q;
  REQUIRE(ptembed_params_from_alpha(2, 1.0, 0.0, 0.0, &q.handle) == PTEMBED_OK);
  ptembed_darkstate_report r{};
  REQUIRE(ptembed_darkstate(q.handle, 0, 0.3, &r) == PTEMBED_OK);
  CHECK(r.epsilon == -2.0);
  CHECK(r.splitting == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(r.commutator_norm < 1e-10);
  CHECK(r.dark_entropy_plus < 1e-10);
  CHECK(std::abs(r.spin_flip - r.overlap_modulus_sq) < 1e-12);
  CHECK(ptembed_darkstate(q.handle, 9, 0.3, &r) == PTEMBED_ERR_BAD_INDEX);
}

TEST_CASE("contours and fits") {
  size_t count = 0;
  REQUIRE(ptembed_log_spaced_sizes(10, 1000, 12, nullptr, 0, &count) == PTEMBED_OK);
  std::vector<int> ns(count);
  REQUIRE(ptembed_log_spaced_sizes(10, 1000, 12, ns.data(), ns.size(), &count) == PTEMBED_OK);
  CHECK(ns.front() == 10);
  CHECK(ns.back() == 1000);

  ptembed_contour* contour = nullptr;
  REQUIRE(ptembed_contour_trace(0.54, ns.data(), ns.size(), 0.01, std::numbers::pi / 2 - 1e-6, std::numbers::pi / 2,
                                2, &contour) == PTEMBED_OK);
  size_t points = 0, skipped = 0;
  REQUIRE(ptembed_contour_size(contour, &points, &skipped) == PTEMBED_OK);
  CHECK(points == ns.size());
  CHECK(skipped == 0);
  std::vector<double> n(points), alpha(points);
  for (size_t i = 0; i < points; ++i) {
    int n_spins = 0;
    double residual = 1;
    REQUIRE(ptembed_contour_point(contour, i, &n_spins, &alpha[i], &residual) == PTEMBED_OK);
    n[i] = n_spins;
    CHECK(std::abs(residual) < 1e-10);
  }
  ptembed_contour_free(contour);

  ptembed_fit fit{};
  REQUIRE(ptembed_power_law_fit(n.data(), alpha.data(), points, &fit) == PTEMBED_OK);
  CHECK(fit.a > 1.4);
  CHECK(fit.a < 1.7);
  ptembed_line_fit line{};
  REQUIRE(ptembed_inset_fit(fit.a, n.data(), alpha.data(), points, 100.0, &line) == PTEMBED_OK);
  CHECK(line.used > 2);

  CHECK(ptembed_power_law_fit(n.data(), alpha.data(), 2, &fit) == PTEMBED_ERR_DEGENERATE_FIT);

  ptembed_contour* none = nullptr;
  const int big[] = {50};
  REQUIRE(ptembed_contour_trace(0.9, big, 1, 0.01, 0.02, std::numbers::pi / 2, 1, &none) == PTEMBED_OK);
  REQUIRE(ptembed_contour_size(none, &points, &skipped) == PTEMBED_OK);
  CHECK(points == 0);
  CHECK(skipped == 1);
  int n_skip = 0;
  const char* reason = nullptr;
  REQUIRE(ptembed_contour_skip(none, 0, &n_skip, &reason) == PTEMBED_OK);
  CHECK(n_skip == 50);
  CHECK(std::string(reason).find("NoBracket") != std::string::npos);
  ptembed_contour_free(none);
}

TEST_CASE("verify through the C API") {
  ptembed_verify_options opts{};
  ptembed_verify_options_default(&opts);
  CHECK(opts.max_n == 4);
  ptembed_verify_report* report = nullptr;
  REQUIRE(ptembed_verify_run(&opts, &report) == PTEMBED_OK);
  const size_t count = ptembed_verify_count(report);
  CHECK(count >= 25);
  for (size_t i = 0; i < count; ++i) {
    ptembed_check check{};
    REQUIRE(ptembed_verify_check(report, i, &check) == PTEMBED_OK);
    CAPTURE(check.name);
    CHECK(check.passed == 1);
  }
  ptembed_verify_free(report);

  opts.dense_cap = 1;
  opts.max_n = 3;
  CHECK(ptembed_verify_run(&opts, &report) == PTEMBED_ERR_CAP_EXCEEDED);
}

TEST_CASE("fits on an empty point set report DegenerateFit") {
  ptembed_fit fit{};
  CHECK(ptembed_power_law_fit(nullptr, nullptr, 0, &fit) == PTEMBED_ERR_DEGENERATE_FIT);
  const double n[] = {10.0};
  CHECK(ptembed_power_law_fit(n, nullptr, 1, &fit) == PTEMBED_ERR_NULL_POINTER);
}
