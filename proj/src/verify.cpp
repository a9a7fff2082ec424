#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "central_spin.hpp"
#include "dynamics.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "scaling.hpp"

namespace ptembed::verify {

using embedding::ModelParams;
using linalg::Complex;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::Index;

bool VerifyReport::all_passed() const { return failures() == 0; }

int VerifyReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

namespace {

class Suite {
 public:
  explicit Suite(const VerifyOptions& o) : opts_(o), rng_(o.seed) {}

  void add(const std::string& name, double tolerance, const std::function<double()>& body) {
    CheckResult r;
    r.name = name;
    r.tolerance = std::isfinite(opts_.tolerance_override) ? opts_.tolerance_override : tolerance;
    try {
      r.residual = body();
      r.passed = std::isfinite(r.residual) && r.residual <= r.tolerance;
    } catch (const std::exception& e) {
      r.residual = std::numeric_limits<double>::infinity();
      r.passed = false;
      r.detail = e.what();
    }
    report_.checks.push_back(std::move(r));
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  ComplexMatrix random_hermitian(Index dim) {
    ComplexMatrix m(dim, dim);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < dim; ++j) m(i, j) = Complex(uniform(-1, 1), uniform(-1, 1));
    }
    return (m + m.adjoint()) / 2.0;
  }

  ComplexVector random_unit(Index dim) {
    ComplexVector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Complex(uniform(-1, 1), uniform(-1, 1));
    return v / v.norm();
  }

  ModelParams random_params(int n_max, double alpha_max = 1.4) {
    const int n = uniform_int(1, n_max);
    ModelParams p = ModelParams::from_alpha(n, uniform(0.0, alpha_max), uniform(0.0, std::numbers::pi),
                                            uniform(0.0, 2.0 * std::numbers::pi - 1e-9));
    p.dense_cap = opts_.dense_cap;
    p.construction_cap = std::max(p.construction_cap, opts_.dense_cap);
    return p;
  }

  const VerifyOptions& opts() const { return opts_; }
  VerifyReport take() { return std::move(report_); }

 private:
  VerifyOptions opts_;
  std::mt19937_64 rng_;
  VerifyReport report_;
};

ComplexMatrix doubled_reference(const ModelParams& p) {
  const linalg::RealVector e = linalg::herm_eig(embedding::seed_hamiltonian(p.n_spins)).eigenvalues;
  std::vector<double> d;
  for (Index i = 0; i < e.size(); ++i) {
    d.push_back(e(i));
    d.push_back(e(i));
  }
  std::sort(d.begin(), d.end());
  ComplexMatrix out(static_cast<Index>(d.size()), 1);
  for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Index>(i), 0) = d[i];
  return out;
}

double entropy_of(const ComplexMatrix& rho) { return linalg::von_neumann_entropy(rho); }

std::vector<int> orthogonality_sizes(int dense_cap) {
  std::vector<int> out;
  for (int n : {4, 6, 8}) {
    if (n <= dense_cap) out.push_back(n);
  }
  if (out.empty()) out.push_back(dense_cap);
  return out;
}

ModelParams with_caps(ModelParams p, const VerifyOptions& o) {
  p.dense_cap = o.dense_cap;
  p.construction_cap = std::max(p.construction_cap, o.dense_cap);
  return p;
}

void linalg_checks(Suite& s) {
  s.add("herm_eig_reconstruction", 1e-11, [&] {
    const ComplexMatrix h = s.random_hermitian(16);
    const auto eig = linalg::herm_eig(h);
    const ComplexMatrix rebuilt = eig.eigenvectors * eig.eigenvalues.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
    return (rebuilt - h).norm() / h.norm();
  });
  s.add("herm_eig_orthonormality", 1e-12, [&] {
    const auto eig = linalg::herm_eig(s.random_hermitian(16));
    return linalg::max_abs(eig.eigenvectors.adjoint() * eig.eigenvectors - linalg::identity(16));
  });
  s.add("propagator_composition", 1e-10, [&] {
    const linalg::UnitaryPropagator u(s.random_hermitian(8));
    return linalg::max_abs(u.matrix(0.7) * u.matrix(1.3) - u.matrix(2.0));
  });
  s.add("propagator_unitarity", 1e-11, [&] {
    const linalg::UnitaryPropagator u(s.random_hermitian(8));
    const ComplexMatrix m = u.matrix(2.3);
    return linalg::max_abs(m.adjoint() * m - linalg::identity(8));
  });
  s.add("psd_sqrt_square", 1e-10, [&] {
    const ComplexMatrix x = s.random_hermitian(8);
    const ComplexMatrix m = x * x.adjoint();
    const ComplexMatrix r = linalg::psd_sqrt(m);
    return std::max(linalg::relative_residual(r * r, m), linalg::relative_residual(r * m, m * r));
  });
  s.add("entropy_complementarity", 1e-10, [&] {
    const ComplexVector v = s.random_unit(16);
    const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(v.data(), 2, 8);
    const ComplexMatrix rho_bath = m.transpose() * m.conjugate();
    return std::abs(entropy_of(linalg::partial_trace_ancilla(v)) - entropy_of(rho_bath));
  });
}

void embedding_checks(Suite& s) {
  const VerifyOptions& o = s.opts();
  s.add("c_inverse_eigenvalue_sum", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const ModelParams p = s.random_params(o.max_n);
      const auto ops = embedding::build_h_total(p);
      worst = std::max(worst, std::abs(ops.eta.trace().real() - ops.c) / ops.c);
    }
    return worst;
  });
  s.add("q_square_identity", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const auto ops = embedding::build_h_total(s.random_params(o.max_n));
      worst = std::max(worst, linalg::relative_residual(ops.q * ops.q + linalg::identity(ops.q.rows()), ops.c * ops.eta));
    }
    return worst;
  });
  s.add("q_literal_vs_spectral", 1e-9, [&] {
    const ModelParams p = s.random_params(o.max_n, 1.2);
    const auto [pm, c] = embedding::build_p(p);
    return linalg::relative_residual(embedding::build_q(p, pm, c), embedding::build_q_spectral(p));
  });
  s.add("q_commutes_with_p", 1e-10, [&] {
    const auto ops = embedding::build_h_total(s.random_params(o.max_n));
    return linalg::relative_residual(ops.q * ops.p, ops.p * ops.q);
  });
  s.add("pseudo_hermiticity", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const auto ops = embedding::build_h_total(s.random_params(o.max_n));
      worst = std::max(worst, linalg::relative_residual(ops.eta * ops.h_pt, ops.h_pt.adjoint() * ops.eta));
    }
    return worst;
  });
  s.add("operators_hermitian", 1e-11, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const auto ops = embedding::build_h_total(s.random_params(o.max_n));
      for (const ComplexMatrix* m : {&ops.p, &ops.q, &ops.eta, &ops.a_op, &ops.b_op, &ops.h_total}) {
        worst = std::max(worst, linalg::hermiticity_residual(*m));
      }
    }
    return worst;
  });
  s.add("spectrum_doubling", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const ModelParams p = s.random_params(o.max_n);
      const auto ops = embedding::build_h_total(p);
      const auto e = linalg::herm_eig(ops.h_total).eigenvalues;
      const ComplexMatrix ref = doubled_reference(p);
      for (Index j = 0; j < e.size(); ++j) worst = std::max(worst, std::abs(e(j) - ref(j, 0).real()));
    }
    return worst;
  });
  s.add("ab_pt_form_vs_seed_form", 1e-8, [&] {
    const ModelParams p = with_caps(ModelParams::from_alpha(2, 1.0), o);
    const auto x = embedding::build_ab_seed_form(p);
    const auto y = embedding::build_ab_pt_form(p);
    return std::max(linalg::relative_residual(x.a, y.a), linalg::relative_residual(x.b, y.b));
  });
  s.add("ab_normalized_vs_seed_form", 1e-8, [&] {
    const ModelParams p = s.random_params(o.max_n, 1.2);
    const auto x = embedding::build_ab(p);
    const auto y = embedding::build_ab_seed_form(p);
    return std::max(linalg::relative_residual(x.a, y.a), linalg::relative_residual(x.b, y.b));
  });
  s.add("theta_zero_limit", 1e-12, [&] {
    const ModelParams p = with_caps(ModelParams::from_alpha(o.max_n, 0.0, 0.7, 1.1), o);
    const auto ops = embedding::build_h_total(p);
    return linalg::max_abs(ops.h_total - linalg::kron(linalg::identity(2), ops.h));
  });
  s.add("x_direction_limit", 1e-10, [&] {
    const ModelParams p = with_caps(ModelParams::from_theta(o.max_n, 0.8, std::numbers::pi / 2, 0.0), o);
    const auto ops = embedding::build_h_total(p);
    return std::max(linalg::max_abs(ops.b_op), linalg::max_abs(ops.a_op - ops.h));
  });
  s.add("q_series_vs_sqrt", 1e-8, [&] {
    const ModelParams p = with_caps(ModelParams::from_theta(2, 0.6), o);
    return linalg::relative_residual(embedding::q_series(p).q, embedding::build_q_spectral(p));
  });
  s.add("pauli_resynthesis", 1e-10, [&] {
    const ComplexMatrix h = s.random_hermitian(8);
    return linalg::relative_residual(embedding::resynthesize(embedding::pauli_decompose(h, 0.0)), h);
  });
  s.add("ancilla_factor_restricted", 1e-11, [&] {
    const auto ops = embedding::build_h_total(s.random_params(std::min(o.max_n, 3)));
    double worst = 0.0;
    for (const auto& t : embedding::pauli_decompose(ops.h_total, 0.0)) {
      if (t.ancilla == embedding::Pauli::X || t.ancilla == embedding::Pauli::Z) {
        worst = std::max(worst, std::abs(t.coefficient));
      }
    }
    return worst;
  });
  s.add("n2_allowed_strings_only", 1e-11, [] { return embedding::n2_coefficients(0.9).max_other_coefficient; });
  s.add("n2_exchange_symmetry", 1e-11, [] { return embedding::n2_coefficients(1.1).exchange_asymmetry; });
  s.add("n2_resynthesis", 1e-10, [] { return embedding::n2_coefficients(1.47).resynthesis_residual; });
}

void dynamics_checks(Suite& s) {
  const VerifyOptions& o = s.opts();
  std::vector<std::vector<dynamics::TrajectoryRecord>> runs;
  s.add("trajectory_runs", 0.0, [&] {
    for (int i = 0; i < 4; ++i) {
      const ModelParams p = s.random_params(std::min(o.max_n, 3));
      runs.push_back(dynamics::run_trajectory(p, dynamics::default_initial_state(p), {0.0, 0.5, 1.0, 3.0, 10.0}));
    }
    return 0.0;
  });
  const auto over_runs = [&](const std::function<double(const dynamics::TrajectoryRecord&, const dynamics::TrajectoryRecord&)>& f) {
    if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "no trajectories");
    double worst = 0.0;
    for (const auto& run : runs) {
      for (const auto& rec : run) worst = std::max(worst, f(run.front(), rec));
    }
    return worst;
  };
  s.add("simulation_theorem", 1e-9, [&] { return over_runs([](auto&, auto& r) { return r.oracle_distance; }); });
  s.add("pt_norm_conservation", 1e-9,
        [&] { return over_runs([](auto& first, auto& r) { return std::abs(r.pt_norm - first.pt_norm); }); });
  s.add("form_invariance", 1e-8, [&] { return over_runs([](auto&, auto& r) { return r.form_residual; }); });
  s.add("outcome_probabilities_sum", 1e-10,
        [&] { return over_runs([](auto&, auto& r) { return std::abs(r.success_prob + r.failure_prob - 1.0); }); });
  s.add("branch_orthogonality", 1e-10, [&] {
    const ModelParams p = s.random_params(o.max_n);
    const auto ops = embedding::build_h_total(p);
    const ComplexVector psi = ops.p * s.random_unit(p.bath_dim());
    const auto plus = dynamics::embed_state(ops, psi, dynamics::Branch::kPlus);
    const auto minus = dynamics::embed_state(ops, psi, dynamics::Branch::kMinus);
    return std::abs(plus.amplitudes.dot(minus.amplitudes));
  });
  s.add("euclidean_norm_departs_from_one", 0.0, [&] {
    const ModelParams p = ModelParams::from_theta(1, 0.5);
    const ComplexVector psi = dynamics::default_initial_state(p);
    const double norm = dynamics::nonhermitian_evolve(p, psi, std::numbers::pi / 4).norm();
    return std::max(0.0, 0.01 - std::abs(norm - 1.0));
  });
  s.add("euclidean_norm_varies_along_trajectory", 0.0, [&] {
    const ModelParams p = ModelParams::from_theta(1, 0.5);
    ComplexVector up(2);
    up << 1.0, 0.0;
    const ComplexVector psi = embedding::build_p(p).p * up;
    const auto run = dynamics::run_trajectory(p, psi, {0.0, 0.4, 0.8, 1.2});
    double lo = run.front().euclid_norm, hi = lo;
    for (const auto& r : run) {
      lo = std::min(lo, r.euclid_norm);
      hi = std::max(hi, r.euclid_norm);
    }
    return std::max(0.0, 0.01 - (hi - lo));
  });
}

void central_spin_checks(Suite& s) {
  const VerifyOptions& o = s.opts();
  s.add("family_eigen_residual", 1e-9, [&] {
    const ModelParams p = with_caps(ModelParams::from_alpha(2, 1.2, 0.4, 0.3), o);
    const auto ops = embedding::build_h_total(p);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, central_spin::family_eigen_residual(ops, central_spin::spectral_family(ops, k)));
    }
    return worst;
  });
  s.add("dark_state_entropy", 1e-10, [&] { return central_spin::dark_entropy(s.random_params(o.max_n), 0); });
  s.add("magnetic_commutator", 1e-10, [&] {
    return central_spin::magnetic_analysis(s.random_params(o.max_n), 0.3).commutator_norm;
  });
  s.add("magnetic_splitting", 1e-9, [&] {
    const auto rep = central_spin::magnetic_analysis(with_caps(ModelParams::from_alpha(2, 1.0), o), 0.3);
    return std::max({std::abs(rep.splitting - 0.6), rep.spectrum_residual, rep.dark_residual_plus,
                     rep.dark_residual_minus});
  });
  s.add("overlap_dense_vs_binomial", 1e-10, [&] {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const ModelParams p = s.random_params(o.max_n);
      const auto d = central_spin::overlap_dense(p);
      const auto b = central_spin::overlap_binomial(p);
      worst = std::max({worst, std::abs(d.overlap - b.overlap), d.route_difference});
    }
    return worst;
  });
  s.add("u_plus_minus_unitary", 1e-10, [&] {
    const auto ops = embedding::build_h_total(s.random_params(o.max_n));
    const ComplexMatrix up = ops.pn + linalg::kI * ops.r;
    const ComplexMatrix um = ops.pn - linalg::kI * ops.r;
    const ComplexMatrix id = linalg::identity(up.rows());
    return std::max(linalg::max_abs(up.adjoint() * up - id), linalg::max_abs(um.adjoint() * um - id));
  });
  s.add("spin_flip_equals_overlap_sq", 1e-12, [&] {
    const ModelParams p = s.random_params(o.max_n);
    return std::abs(central_spin::spin_flip_element(p, 0) - central_spin::overlap_dense(p).modulus_sq);
  });
  const auto orth = [&](int n) {
    return with_caps(ModelParams::from_theta(n, o.orthogonality_theta, std::numbers::pi / 2, central_spin::phi1_star(n)), o);
  };
  s.add("orthogonality_overlap", 1e-5, [&] {
    double worst = 0.0;
    for (int n : orthogonality_sizes(o.dense_cap)) worst = std::max(worst, std::abs(central_spin::overlap_dense(orth(n)).overlap));
    return worst;
  });
  s.add("orthogonality_bright_entropy", 1e-5, [&] {
    double worst = 0.0;
    for (int n : orthogonality_sizes(o.dense_cap)) {
      worst = std::max(worst, std::abs(central_spin::bright_entropy(orth(n), 0) - std::numbers::ln2));
    }
    return worst;
  });
  s.add("orthogonality_spin_flip", 1e-10, [&] {
    double worst = 0.0;
    for (int n : orthogonality_sizes(o.dense_cap)) worst = std::max(worst, central_spin::spin_flip_element(orth(n), 0));
    return worst;
  });
  s.add("orthogonality_dark_entropy", 1e-10, [&] {
    double worst = 0.0;
    for (int n : orthogonality_sizes(o.dense_cap)) worst = std::max(worst, central_spin::dark_entropy(orth(n), 0));
    return worst;
  });
  s.add("dpmax_log_identity", 1e-12, [&] {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const int n = s.uniform_int(1, 10000);
      const double theta = s.uniform(0.0, 20.0);
      const ModelParams p = ModelParams::from_theta(n, theta);
      const double lhs = central_spin::dpmax_log(p);
      const double rhs = n * theta - 0.5 * p.log_c();
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, n * theta));
    }
    return worst;
  });
  s.add("dpmax_vs_dense_eigenvalue", 1e-12, [&] {
    const ModelParams p = s.random_params(o.max_n);
    const auto ops = embedding::build_h_total(p);
    const double top = linalg::herm_eig(ops.pn).eigenvalues.maxCoeff();
    return std::abs(std::exp(central_spin::dpmax_log(p)) - top) / top;
  });
  s.add("limit_bath_state_fidelity", 1e-6, [&] {
    const auto lim = central_spin::limit_bath_state(with_caps(ModelParams::from_theta(4, 5.0, 0.9, 2.0), o));
    return std::max(1.0 - lim.fidelity_plus, 1.0 - lim.fidelity_minus);
  });
  s.add("phi1_star_condition", 1e-12, [&] {
    double worst = 0.0;
    for (int n : {1, 8, 100, 10000}) {
      worst = std::max(worst, std::abs(std::pow(std::sin(central_spin::phi1_star(n) / 2.0), 2.0 * n) - 0.5));
    }
    return worst;
  });
  s.add("solve_beta_roundtrip", 1e-10, [&] {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const int n = s.uniform_int(1, 1000);
      const double x = s.uniform(1e-6, 1.0);
      worst = std::max(worst, std::abs(central_spin::f_values(n, central_spin::solve_beta(n, x), 0.0, 0.0).f2 - x));
    }
    return worst;
  });
  s.add("fig4_pinned_construction", 1e-12, [&] {
    const double phi = central_spin::phi1_star(100);
    double worst = std::abs(central_spin::solve_beta(100, central_spin::pinned_f3(100, 100)) - std::numbers::pi / 2);
    for (int n = 101; n <= 1000; n += 37) {
      const double direct = central_spin::f_values(n, 0.0, phi, std::numbers::pi / 2).f3;
      worst = std::max(worst, std::abs(direct - central_spin::pinned_f3(n, 100)));
    }
    return worst;
  });
  s.add("power_law_roundtrip", 1e-6, [&] {
    std::vector<central_spin::FitPoint> pts;
    for (int n : central_spin::log_spaced_sizes(10, 10000, 30)) {
      pts.push_back({static_cast<double>(n), 1.5 - 2.0 * std::pow(n, -0.5)});
    }
    const auto fit = central_spin::power_law_fit(pts);
    return std::max({std::abs(fit.a - 1.5), std::abs(fit.b - 2.0), std::abs(fit.gamma - 0.5)});
  });
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
  if (options.max_n < 1 || options.dense_cap < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_n and dense_cap must be positive");
  }
  if (options.max_n > options.dense_cap) {
    throw Error(ErrorCode::kCapExceeded, "N = " + std::to_string(options.max_n) + " exceeds dense cap " +
                                             std::to_string(options.dense_cap));
  }
  if (!(options.orthogonality_theta > 0.0) || !std::isfinite(options.orthogonality_theta)) {
    throw Error(ErrorCode::kInvalidArgument, "orthogonality_theta must be positive and finite");
  }
  Suite suite(options);
  linalg_checks(suite);
  embedding_checks(suite);
  dynamics_checks(suite);
  central_spin_checks(suite);
  return suite.take();
}

}  // namespace ptembed::verify
