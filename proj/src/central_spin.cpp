#include "central_spin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace ptembed::central_spin {

using linalg::Index;
using linalg::kI;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ComplexVector up_y() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
  return v;
}

ComplexVector down_y() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), -kI / std::sqrt(2.0);
  return v;
}

ComplexMatrix normalized_p(const ModelParams& params) {
  const ComplexMatrix site = embedding::site_exponential(params.theta, params.theta1, params.phi1) /
                             std::sqrt(2.0 * std::cosh(2.0 * params.theta));
  std::vector<ComplexMatrix> factors(static_cast<std::size_t>(params.n_spins), site);
  return linalg::kron_chain(factors);
}

// ln(1 - e^{-x}) for x >= 0
double log1mexp(double x) {
  if (x <= 0.0) return kNegInf;
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// w = (1 - sin t1 cos p1)/2 and 1 - w, both without cancellation.
std::pair<double, double> weight_pair(double theta1, double phi1) {
  const double one_minus_sin = 2.0 * std::pow(std::sin((std::numbers::pi / 2 - theta1) / 2.0), 2);
  const double cp = std::cos(phi1);
  const double w = std::pow(std::sin(phi1 / 2.0), 2) + 0.5 * one_minus_sin * cp;
  const double omw = std::pow(std::cos(phi1 / 2.0), 2) - 0.5 * one_minus_sin * cp;
  return {std::clamp(w, 0.0, 1.0), std::clamp(omw, 0.0, 1.0)};
}

double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// n * log(x) with 0 * log(0) = 0
double scaled_log(double n, double log_x) { return n == 0.0 ? 0.0 : n * log_x; }

void fill_f_values(OverlapReport& r, int n, double w) {
  r.f1 = std::ldexp(1.0, -n);
  const double w_n = std::exp(scaled_log(n, log_or_neg_inf(w)));
  r.f3 = std::pow(-1.0 + 2.0 * w_n, 2);
  r.f3 = std::clamp(r.f3, 0.0, 1.0);
  r.beta = solve_beta(n, r.f3);
  r.f2 = std::exp(scaled_log(2.0 * n, log_or_neg_inf(std::abs(std::cos(r.beta)))));
}

}  // namespace

std::vector<unsigned long long> eigen_patterns(int n_spins) {
  if (n_spins < 1 || n_spins > 62) throw Error(ErrorCode::kInvalidArgument, "eigen_patterns: bad N");
  std::vector<unsigned long long> patterns(std::size_t{1} << n_spins);
  std::iota(patterns.begin(), patterns.end(), 0ULL);
  std::stable_sort(patterns.begin(), patterns.end(), [](unsigned long long a, unsigned long long b) {
    const int pa = std::popcount(a);
    const int pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return patterns;
}

ComplexVector product_x_state(int n_spins, unsigned long long pattern) {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexVector out = ComplexVector::Ones(1);
  for (int i = 0; i < n_spins; ++i) {
    const bool up = (pattern >> (n_spins - 1 - i)) & 1ULL;
    ComplexVector site(2);
    site << s, up ? s : -s;
    out = linalg::kron(out, site);
  }
  return out;
}

SpectralFamily spectral_family(const EmbeddingOperators& ops, int k) {
  const ModelParams& params = ops.params;
  params.require_dense("spectral_family");
  if (k < 0 || static_cast<Index>(k) >= params.bath_dim()) {
    throw Error(ErrorCode::kBadIndex, "k = " + std::to_string(k) + " outside [0, 2^N)");
  }
  SpectralFamily f;
  f.k = k;
  f.pattern = eigen_patterns(params.n_spins)[static_cast<std::size_t>(k)];
  f.epsilon = 2.0 * std::popcount(f.pattern) - params.n_spins;
  f.psi = product_x_state(params.n_spins, f.pattern);
  f.psi_pt = ops.p * f.psi;
  f.bright_plus = dynamics::embed_seed_state(ops, f.psi, dynamics::Branch::kPlus);
  f.bright_minus = dynamics::embed_seed_state(ops, f.psi, dynamics::Branch::kMinus);
  const ComplexVector pn_psi = ops.pn * f.psi;
  const ComplexVector r_psi = ops.r * f.psi;
  f.bath_plus = pn_psi - kI * r_psi;
  f.bath_minus = pn_psi + kI * r_psi;
  f.dark_plus = linalg::kron(up_y(), f.bath_plus);
  f.dark_minus = linalg::kron(down_y(), f.bath_minus);
  return f;
}

SpectralFamily spectral_family(const ModelParams& params, int k) {
  params.require_dense("spectral_family");
  return spectral_family(embedding::build_h_total(params), k);
}

double family_eigen_residual(const EmbeddingOperators& ops, const SpectralFamily& family) {
  const auto residual = [&](const ComplexVector& x) {
    return (ops.h_total * x - family.epsilon * x).norm();
  };
  return std::max({residual(family.bright_plus.amplitudes), residual(family.bright_minus.amplitudes),
                   residual(family.dark_plus), residual(family.dark_minus)});
}

double aligned_down_weight(const ModelParams& params) {
  return weight_pair(params.theta1, params.phi1).first;
}

OverlapReport overlap_dense(const ModelParams& params) {
  params.require_construction("overlap_dense");
  const int n = params.n_spins;
  const ComplexMatrix pn = normalized_p(params);
  const ComplexMatrix pn2 = pn * pn;
  // Within the eigensolver cap R is an independent matrix square root;
  // beyond it, the product-eigenbasis construction is used.
  const ComplexMatrix r = n <= params.dense_cap
                              ? linalg::psd_sqrt(linalg::identity(pn.rows()) - pn2)
                              : embedding::function_of_p(params, embedding::r_diagonal(params));
  const ComplexVector psi0 = product_x_state(n, 0);
  const ComplexVector pn_psi = pn * psi0;
  const ComplexVector r_psi = r * psi0;
  const ComplexVector b_plus = pn_psi - kI * r_psi;
  const ComplexVector b_minus = pn_psi + kI * r_psi;

  OverlapReport rep;
  rep.method = OverlapMethod::kDense;
  rep.overlap = b_minus.dot(b_plus);
  rep.modulus_sq = std::min(1.0, std::norm(rep.overlap));
  rep.p2_mean = psi0.dot(pn2 * psi0).real();
  rep.p2q_mean = pn_psi.dot(r_psi).real();
  rep.formula_overlap = Complex(-1.0 + 2.0 * rep.p2_mean, -2.0 * rep.p2q_mean);
  rep.route_difference = std::abs(rep.overlap - rep.formula_overlap);
  rep.dpmax_log = dpmax_log(params);
  fill_f_values(rep, n, aligned_down_weight(params));
  return rep;
}

OverlapReport overlap_binomial(const ModelParams& params) {
  params.validate();
  const int n = params.n_spins;
  const auto [w, omw] = weight_pair(params.theta1, params.phi1);
  const double log_w = log_or_neg_inf(w);
  const double log_omw = log_or_neg_inf(omw);
  const double base_gap = n * std::log1p(std::exp(-4.0 * params.theta));

  std::vector<double> t_p2(static_cast<std::size_t>(n + 1));
  std::vector<double> t_p2q(static_cast<std::size_t>(n + 1));
  double log_binom = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) log_binom += std::log(static_cast<double>(n - k + 1) / k);
    const double log_weight = log_binom + scaled_log(n - k, log_w) + scaled_log(k, log_omw);
    const double gap = 4.0 * params.theta * k + base_gap;
    t_p2[static_cast<std::size_t>(k)] = log_weight - gap;
    t_p2q[static_cast<std::size_t>(k)] = log_weight - 0.5 * gap + 0.5 * log1mexp(gap);
  }

  OverlapReport rep;
  rep.method = OverlapMethod::kBinomial;
  rep.p2_mean = std::exp(log_sum_exp(t_p2));
  rep.p2q_mean = std::exp(log_sum_exp(t_p2q));
  rep.overlap = Complex(-1.0 + 2.0 * rep.p2_mean, -2.0 * rep.p2q_mean);
  rep.formula_overlap = rep.overlap;
  rep.modulus_sq = std::min(1.0, std::norm(rep.overlap));
  rep.dpmax_log = dpmax_log(params);
  fill_f_values(rep, n, w);
  return rep;
}

double dpmax_log(int n_spins, double theta) {
  return -0.5 * n_spins * std::log1p(std::exp(-4.0 * theta));
}

double dpmax_log(const ModelParams& params) { return dpmax_log(params.n_spins, params.theta); }

LimitBathState limit_bath_state(const ModelParams& params) {
  params.require_dense("limit_bath_state");
  const int n = params.n_spins;
  const ComplexMatrix u = embedding::site_rotation(params.theta1, params.phi1);
  std::vector<ComplexMatrix> factors(static_cast<std::size_t>(n), u);
  const ComplexMatrix u_p = linalg::kron_chain(factors);
  const ComplexVector psi0 = product_x_state(n, 0);
  const ComplexVector rotated = u_p * psi0;

  ComplexVector plus_bar = -kI * rotated;
  ComplexVector minus_bar = kI * rotated;
  plus_bar(0) = rotated(0);
  minus_bar(0) = rotated(0);

  LimitBathState out;
  out.plus = u_p.adjoint() * plus_bar;
  out.minus = u_p.adjoint() * minus_bar;
  out.up_weight = std::norm(rotated(0));

  const ComplexMatrix pn = normalized_p(params);
  const ComplexMatrix r = embedding::function_of_p(params, embedding::r_diagonal(params));
  const ComplexVector exact_plus = pn * psi0 - kI * (r * psi0);
  const ComplexVector exact_minus = pn * psi0 + kI * (r * psi0);
  out.fidelity_plus = std::abs(exact_plus.dot(out.plus));
  out.fidelity_minus = std::abs(exact_minus.dot(out.minus));
  return out;
}

double phi1_star(int n_spins) {
  if (n_spins < 1) throw Error(ErrorCode::kOutOfDomain, "phi1_star needs N >= 1");
  return 2.0 * std::asin(std::sqrt(std::exp2(-1.0 / n_spins)));
}

FValues f_values(int n_spins, double beta, double phi1, double theta1) {
  if (n_spins < 1) throw Error(ErrorCode::kOutOfDomain, "f_values needs N >= 1");
  FValues f;
  f.f1 = std::ldexp(1.0, -n_spins);
  f.f2 = std::exp(scaled_log(2.0 * n_spins, log_or_neg_inf(std::abs(std::cos(beta)))));
  const double w = weight_pair(theta1, phi1).first;
  const double w_n = std::exp(scaled_log(n_spins, log_or_neg_inf(w)));
  f.f3 = std::clamp(std::pow(-1.0 + 2.0 * w_n, 2), 0.0, 1.0);
  return f;
}

double pinned_f3(int n_spins, int n_ref) {
  if (n_spins < 1 || n_ref < 1) throw Error(ErrorCode::kOutOfDomain, "pinned_f3 needs N, N_ref >= 1");
  const double x = std::exp2(1.0 - static_cast<double>(n_spins) / n_ref);
  return (x - 1.0) * (x - 1.0);
}

double solve_beta(int n_spins, double f3_value) {
  if (n_spins < 1) throw Error(ErrorCode::kOutOfDomain, "solve_beta needs N >= 1");
  if (!(f3_value >= 0.0 && f3_value <= 1.0)) {
    throw Error(ErrorCode::kOutOfDomain, "f3 must lie in [0, 1], got " + std::to_string(f3_value));
  }
  return std::acos(std::exp(log_or_neg_inf(f3_value) / (2.0 * n_spins)));
}

double spin_flip_element(const EmbeddingOperators& ops, int k) {
  const SpectralFamily f = spectral_family(ops, k);
  ComplexVector flipped = f.dark_plus;
  const Index half = flipped.size() / 2;
  flipped.tail(half) *= -1.0;
  return std::norm(f.dark_minus.dot(flipped));
}

double spin_flip_element(const ModelParams& params, int k) {
  params.require_dense("spin_flip_element");
  return spin_flip_element(embedding::build_h_total(params), k);
}

MagneticReport magnetic_analysis(const ModelParams& params, double m_y, int k) {
  params.require_dense("magnetic_analysis");
  if (!std::isfinite(m_y)) throw Error(ErrorCode::kInvalidArgument, "m_y must be finite");
  const EmbeddingOperators ops = embedding::build_h_total(params);
  const int n = params.n_spins;
  const ComplexMatrix field = m_y * linalg::kron(linalg::pauli_y(), linalg::identity(params.bath_dim()));
  const ComplexMatrix total = ops.h_total + field;

  MagneticReport rep;
  rep.commutator_norm = (ops.h_total * field - field * ops.h_total).norm();
  rep.spectrum = linalg::herm_eig(total).eigenvalues;

  std::vector<double> expected;
  for (unsigned long long pattern : eigen_patterns(n)) {
    const double e = 2.0 * std::popcount(pattern) - n;
    expected.push_back(e + m_y);
    expected.push_back(e - m_y);
  }
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    rep.spectrum_residual =
        std::max(rep.spectrum_residual, std::abs(rep.spectrum(static_cast<Index>(i)) - expected[i]));
  }

  const SpectralFamily f = spectral_family(ops, k);
  rep.dark_residual_plus = (total * f.dark_plus - (f.epsilon + m_y) * f.dark_plus).norm();
  rep.dark_residual_minus = (total * f.dark_minus - (f.epsilon - m_y) * f.dark_minus).norm();
  rep.splitting = f.dark_plus.dot(total * f.dark_plus).real() - f.dark_minus.dot(total * f.dark_minus).real();
  return rep;
}

double bright_entropy(const ModelParams& params, int k) {
  const SpectralFamily f = spectral_family(params, k);
  return linalg::von_neumann_entropy(linalg::partial_trace_ancilla(f.bright_plus.amplitudes));
}

double dark_entropy(const ModelParams& params, int k) {
  const SpectralFamily f = spectral_family(params, k);
  return linalg::von_neumann_entropy(linalg::partial_trace_ancilla(f.dark_plus));
}

double bath_site_entropy(const ModelParams& params, int site) {
  const SpectralFamily f = spectral_family(params, 0);
  return linalg::von_neumann_entropy(linalg::reduced_density_site(f.bath_plus, site));
}

}  // namespace ptembed::central_spin
