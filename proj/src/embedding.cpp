#include "embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace ptembed::embedding {

using linalg::Complex;
using linalg::Index;
using linalg::kI;

double theta_of_alpha(double alpha) {
  if (!(alpha >= 0.0) || !(alpha < std::numbers::pi / 2)) {
    throw Error(ErrorCode::kOutOfDomain, "alpha must lie in [0, pi/2), got " + std::to_string(alpha));
  }
  // atanh(sin a) = asinh(tan a) stays finite up to the last double below pi/2.
  return 0.5 * std::asinh(std::tan(alpha));
}

double alpha_of_theta(double theta) { return std::atan(std::sinh(2.0 * theta)); }

ModelParams ModelParams::from_alpha(int n_spins, double alpha, double theta1, double phi1) {
  ModelParams p;
  p.n_spins = n_spins;
  p.alpha = alpha;
  p.theta = theta_of_alpha(alpha);
  p.theta1 = theta1;
  p.phi1 = phi1;
  p.validate();
  return p;
}

ModelParams ModelParams::from_theta(int n_spins, double theta, double theta1, double phi1) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::kOutOfDomain, "theta must be finite and >= 0");
  }
  ModelParams p;
  p.n_spins = n_spins;
  p.theta = theta;
  p.alpha = alpha_of_theta(theta);
  p.theta1 = theta1;
  p.phi1 = phi1;
  p.validate();
  return p;
}

std::array<double, 3> ModelParams::direction() const {
  return {std::sin(theta1) * std::cos(phi1), std::sin(theta1) * std::sin(phi1), std::cos(theta1)};
}

double ModelParams::log_c() const {
  return n_spins * (2.0 * theta + std::log1p(std::exp(-4.0 * theta)));
}

double ModelParams::c() const { return std::exp(log_c()); }

void ModelParams::validate() const {
  if (n_spins < 1) throw Error(ErrorCode::kInvalidArgument, "n_spins must be >= 1");
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::kOutOfDomain, "theta must be finite and >= 0");
  }
  if (!(theta1 >= 0.0 && theta1 <= std::numbers::pi)) {
    throw Error(ErrorCode::kOutOfDomain, "theta1 must lie in [0, pi]");
  }
  if (!(phi1 >= 0.0 && phi1 < 2.0 * std::numbers::pi)) {
    throw Error(ErrorCode::kOutOfDomain, "phi1 must lie in [0, 2 pi)");
  }
  if (dense_cap < 1 || construction_cap < 1) {
    throw Error(ErrorCode::kInvalidArgument, "caps must be positive");
  }
}

void ModelParams::require_construction(const char* what) const {
  validate();
  if (n_spins > construction_cap) {
    throw Error(ErrorCode::kCapExceeded, std::string(what) + ": N = " + std::to_string(n_spins) +
                                             " exceeds construction cap " +
                                             std::to_string(construction_cap));
  }
  if (n_spins * theta > kMaxDenseExponent) {
    throw Error(ErrorCode::kCapExceeded,
                std::string(what) + ": N*theta too large for dense operators");
  }
}

void ModelParams::require_dense(const char* what) const {
  require_construction(what);
  if (n_spins > dense_cap) {
    throw Error(ErrorCode::kCapExceeded, std::string(what) + ": N = " + std::to_string(n_spins) +
                                             " exceeds dense cap " + std::to_string(dense_cap));
  }
}

namespace {

ComplexMatrix n_dot_sigma(double theta1, double phi1) {
  const double nx = std::sin(theta1) * std::cos(phi1);
  const double ny = std::sin(theta1) * std::sin(phi1);
  const double nz = std::cos(theta1);
  return nx * linalg::pauli_x() + ny * linalg::pauli_y() + nz * linalg::pauli_z();
}

void fix_column_phase(ComplexMatrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, j));
      if (mag > 1e-14) {
        v.col(j) *= std::conj(v(i, j)) / mag;
        v(i, j) = mag;
        break;
      }
    }
  }
}

ComplexMatrix product_of_sites(const ComplexMatrix& site, int n) {
  std::vector<ComplexMatrix> factors(static_cast<size_t>(n), site);
  return linalg::kron_chain(factors);
}

// Multiplies rows (left) or columns (right) of m by a 2x2 acting on one site.
void apply_site_left(ComplexMatrix& m, const ComplexMatrix& g, int site, int n) {
  const Index mask = Index{1} << (n - 1 - site);
  for (Index i0 = 0; i0 < m.rows(); ++i0) {
    if (i0 & mask) continue;
    const Index i1 = i0 | mask;
    const Eigen::RowVectorXcd r0 = m.row(i0);
    const Eigen::RowVectorXcd r1 = m.row(i1);
    m.row(i0) = g(0, 0) * r0 + g(0, 1) * r1;
    m.row(i1) = g(1, 0) * r0 + g(1, 1) * r1;
  }
}

void apply_site_right(ComplexMatrix& m, const ComplexMatrix& g, int site, int n) {
  const Index mask = Index{1} << (n - 1 - site);
  for (Index c0 = 0; c0 < m.cols(); ++c0) {
    if (c0 & mask) continue;
    const Index c1 = c0 | mask;
    const ComplexVector k0 = m.col(c0);
    const ComplexVector k1 = m.col(c1);
    m.col(c0) = g(0, 0) * k0 + g(1, 0) * k1;
    m.col(c1) = g(0, 1) * k0 + g(1, 1) * k1;
  }
}

// ln c - 2 theta (N - 2k) = 4 theta k + N ln(1 + e^{-4 theta}) >= 0
double log_gap(const ModelParams& params, int k) {
  return 4.0 * params.theta * k + params.n_spins * std::log1p(std::exp(-4.0 * params.theta));
}

ComplexMatrix normalized_site(const ModelParams& params) {
  const double norm = std::sqrt(2.0 * std::cosh(2.0 * params.theta));
  return site_exponential(params.theta, params.theta1, params.phi1) / norm;
}

}  // namespace

ComplexMatrix site_rotation(double theta1, double phi1) {
  const double ct = std::cos(theta1 / 2.0);
  const double st = std::sin(theta1 / 2.0);
  const Complex e = std::polar(1.0, phi1);
  ComplexMatrix v(2, 2);
  v(0, 0) = ct;
  v(1, 0) = st * e;
  v(0, 1) = st;
  v(1, 1) = -ct * e;
  fix_column_phase(v);
  return v.adjoint();
}

ComplexMatrix site_exponential(double theta, double theta1, double phi1) {
  return std::cosh(theta) * linalg::identity(2) + std::sinh(theta) * n_dot_sigma(theta1, phi1);
}

ComplexMatrix seed_hamiltonian(int n_spins) {
  const Index dim = Index{1} << n_spins;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int site = 0; site < n_spins; ++site) {
    const Index mask = Index{1} << (n_spins - 1 - site);
    for (Index i = 0; i < dim; ++i) h(i ^ mask, i) += 1.0;
  }
  return h;
}

PResult build_p(const ModelParams& params) {
  params.require_construction("build_p");
  return {product_of_sites(site_exponential(params.theta, params.theta1, params.phi1), params.n_spins),
          params.c()};
}

ComplexMatrix build_q(const ModelParams& params, const ComplexMatrix& p, double c) {
  if (p.rows() != params.bath_dim() || p.cols() != params.bath_dim()) {
    throw Error(ErrorCode::kDimMismatch, "build_q: P has wrong dimension");
  }
  const ComplexMatrix eta = linalg::func_herm(p, [](double x) { return Complex(1.0 / (x * x), 0.0); });
  return linalg::psd_sqrt(c * eta - linalg::identity(p.rows()));
}

ComplexMatrix function_of_p(const ModelParams& params, const std::vector<double>& by_weight) {
  const int n = params.n_spins;
  if (static_cast<int>(by_weight.size()) != n + 1) {
    throw Error(ErrorCode::kBadLength, "function_of_p needs N+1 weight values");
  }
  const Index dim = params.bath_dim();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    m(s, s) = by_weight[static_cast<size_t>(std::popcount(static_cast<unsigned long long>(s)))];
  }
  const ComplexMatrix u = site_rotation(params.theta1, params.phi1);
  const ComplexMatrix u_dag = u.adjoint();
  for (int site = 0; site < n; ++site) {
    apply_site_left(m, u_dag, site, n);
    apply_site_right(m, u, site, n);
  }
  return m;
}

std::vector<double> pn_diagonal(const ModelParams& params) {
  std::vector<double> d(static_cast<size_t>(params.n_spins + 1));
  for (int k = 0; k <= params.n_spins; ++k) d[static_cast<size_t>(k)] = std::exp(-0.5 * log_gap(params, k));
  return d;
}

std::vector<double> r_diagonal(const ModelParams& params) {
  std::vector<double> d(static_cast<size_t>(params.n_spins + 1));
  for (int k = 0; k <= params.n_spins; ++k) {
    d[static_cast<size_t>(k)] = std::sqrt(-std::expm1(-log_gap(params, k)));
  }
  return d;
}

std::vector<double> q_diagonal(const ModelParams& params) {
  std::vector<double> d(static_cast<size_t>(params.n_spins + 1));
  for (int k = 0; k <= params.n_spins; ++k) {
    d[static_cast<size_t>(k)] = std::sqrt(std::expm1(log_gap(params, k)));
  }
  return d;
}

ComplexMatrix build_q_spectral(const ModelParams& params) {
  params.require_construction("build_q_spectral");
  return function_of_p(params, q_diagonal(params));
}

ComplexMatrix build_h_pt(const ModelParams& params) {
  params.require_construction("build_h_pt");
  const int n = params.n_spins;
  const ComplexMatrix p = product_of_sites(site_exponential(params.theta, params.theta1, params.phi1), n);
  const ComplexMatrix p_inv = product_of_sites(site_exponential(-params.theta, params.theta1, params.phi1), n);
  return p * seed_hamiltonian(n) * p_inv;
}

namespace {

ABPair ab_from_normalized(const ComplexMatrix& h, const ComplexMatrix& pn, const ComplexMatrix& r) {
  const ComplexMatrix h_pn = h * pn;
  const ComplexMatrix h_r = h * r;
  ABPair out;
  out.a = pn * h_pn + r * h_r;
  out.b = kI * (pn * h_r - r * h_pn);
  return out;
}

}  // namespace

ABPair build_ab(const ModelParams& params) {
  params.require_construction("build_ab");
  const ComplexMatrix pn = product_of_sites(normalized_site(params), params.n_spins);
  const ComplexMatrix r = function_of_p(params, r_diagonal(params));
  return ab_from_normalized(seed_hamiltonian(params.n_spins), pn, r);
}

ABPair build_ab_seed_form(const ModelParams& params) {
  params.require_dense("build_ab_seed_form");
  const auto [p, c] = build_p(params);
  const ComplexMatrix q = build_q(params, p, c);
  const ComplexMatrix h = seed_hamiltonian(params.n_spins);
  ABPair out;
  out.a = p * (h + q * h * q) * p / c;
  out.b = (kI / c) * (p * (h * q - q * h) * p);
  return out;
}

ABPair build_ab_pt_form(const ModelParams& params) {
  params.require_dense("build_ab_pt_form");
  const auto [p, c] = build_p(params);
  const ComplexMatrix q = build_q(params, p, c);
  const linalg::HermEigResult q_eig = linalg::herm_eig(q);
  if (q_eig.eigenvalues(0) < 1e-8) {
    throw Error(ErrorCode::kSingularQ,
                "min eig(Q) = " + std::to_string(q_eig.eigenvalues(0)) + " below 1e-8");
  }
  const ComplexMatrix q_inv = linalg::func_from_eig(q_eig, [](double x) { return Complex(1.0 / x, 0.0); });
  const ComplexMatrix h_pt = build_h_pt(params);
  const ComplexMatrix eta_inv = p * p;
  ABPair out;
  out.a = (h_pt * q_inv + q * h_pt) * eta_inv * q / c;
  out.b = (kI / c) * ((h_pt - q * h_pt * q_inv) * eta_inv * q);
  return out;
}

ComplexMatrix assemble_h_total(const ComplexMatrix& a_op, const ComplexMatrix& b_op) {
  return linalg::kron(linalg::identity(2), a_op) + linalg::kron(linalg::pauli_y(), b_op);
}

EmbeddingOperators build_h_total(const ModelParams& params) {
  params.require_construction("build_h_total");
  const int n = params.n_spins;
  EmbeddingOperators ops;
  ops.params = params;
  ops.h = seed_hamiltonian(n);
  ops.p = product_of_sites(site_exponential(params.theta, params.theta1, params.phi1), n);
  ops.p_inv = product_of_sites(site_exponential(-params.theta, params.theta1, params.phi1), n);
  ops.eta = product_of_sites(site_exponential(-2.0 * params.theta, params.theta1, params.phi1), n);
  ops.log_c = params.log_c();
  ops.c = std::exp(ops.log_c);
  ops.q = function_of_p(params, q_diagonal(params));
  ops.h_pt = ops.p * ops.h * ops.p_inv;
  ops.pn = product_of_sites(normalized_site(params), n);
  ops.r = function_of_p(params, r_diagonal(params));
  ABPair ab = ab_from_normalized(ops.h, ops.pn, ops.r);
  ops.a_op = std::move(ab.a);
  ops.b_op = std::move(ab.b);
  ops.h_total = assemble_h_total(ops.a_op, ops.b_op);
  return ops;
}

double binom_half(int m) {
  double b = 1.0;
  for (int j = 0; j < m; ++j) b *= (0.5 - j) / (j + 1);
  return b;
}

QSeriesResult q_series(const ModelParams& params, double tol, int m_max) {
  params.require_construction("q_series");
  if (m_max < 0 || !(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "q_series: bad tol/m_max");
  const int n = params.n_spins;
  const ComplexMatrix pn = product_of_sites(normalized_site(params), n);
  const ComplexMatrix ratio = pn * pn;  // P^2 / c
  // c^{1/2-m} P^{2m-1} = sqrt(c) P^{-1} (P^2/c)^m
  ComplexMatrix power = std::sqrt(params.c()) *
                        product_of_sites(site_exponential(-params.theta, params.theta1, params.phi1), n);
  QSeriesResult out;
  out.q = ComplexMatrix::Zero(power.rows(), power.cols());
  double coef = 1.0;
  bool converged = false;
  for (int m = 0; m <= m_max; ++m) {
    const ComplexMatrix term = coef * power;
    out.q += term;
    out.terms = m + 1;
    out.last_term_norm = term.norm();
    if (out.last_term_norm < tol) {
      converged = true;
      break;
    }
    power = power * ratio;
    coef *= (m - 0.5) / (m + 1);
  }
  if (!converged && out.last_term_norm > 1e3 * tol) {
    throw Error(ErrorCode::kNoConvergence, "q_series: term norm " + std::to_string(out.last_term_norm) +
                                               " after " + std::to_string(out.terms) + " terms");
  }
  return out;
}

ComplexMatrix pauli_matrix(Pauli p) {
  switch (p) {
    case Pauli::I: return linalg::identity(2);
    case Pauli::X: return linalg::pauli_x();
    case Pauli::Y: return linalg::pauli_y();
    case Pauli::Z: return linalg::pauli_z();
  }
  return linalg::identity(2);
}

std::string PauliTerm::label() const {
  std::string s(1, static_cast<char>(ancilla));
  for (Pauli p : sites) s.push_back(static_cast<char>(p));
  return s;
}

int PauliTerm::weight() const {
  int w = ancilla == Pauli::I ? 0 : 1;
  for (Pauli p : sites) w += p == Pauli::I ? 0 : 1;
  return w;
}

namespace {

struct StringMasks {
  Index x = 0;   // bits flipped (X, Y)
  Index zy = 0;  // bits carrying a sign (Y, Z)
  int n_y = 0;
};

StringMasks masks_of(const std::string& label) {
  const int n = static_cast<int>(label.size());
  StringMasks m;
  for (int j = 0; j < n; ++j) {
    const Index bit = Index{1} << (n - 1 - j);
    switch (label[static_cast<size_t>(j)]) {
      case 'I': break;
      case 'X': m.x |= bit; break;
      case 'Y': m.x |= bit; m.zy |= bit; ++m.n_y; break;
      case 'Z': m.zy |= bit; break;
      default: throw Error(ErrorCode::kInvalidArgument, "bad Pauli label " + label);
    }
  }
  return m;
}

Complex minus_i_power(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

// Nonzero entry of the string in column b: row a = b ^ x.
Complex string_entry(const StringMasks& m, Index a) {
  const int parity = std::popcount(static_cast<unsigned long long>(a & m.zy)) & 1;
  const Complex base = minus_i_power(m.n_y);
  return parity ? -base : base;
}

PauliTerm term_from_label(const std::string& label, double coefficient) {
  PauliTerm t;
  t.ancilla = static_cast<Pauli>(label[0]);
  for (size_t j = 1; j < label.size(); ++j) t.sites.push_back(static_cast<Pauli>(label[j]));
  t.coefficient = coefficient;
  return t;
}

}  // namespace

ComplexMatrix pauli_string_matrix(const std::string& label) {
  const StringMasks m = masks_of(label);
  const Index dim = Index{1} << label.size();
  ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
  for (Index b = 0; b < dim; ++b) {
    const Index a = b ^ m.x;
    s(a, b) = string_entry(m, a);
  }
  return s;
}

std::vector<PauliTerm> pauli_decompose(const ComplexMatrix& op, double cutoff) {
  if (op.rows() != op.cols() || op.rows() < 2) {
    throw Error(ErrorCode::kNotHermitian, "pauli_decompose needs a square 2^n matrix");
  }
  const int n = linalg::log2_exact(op.rows());
  if (linalg::hermiticity_residual(op) > linalg::kHermitianTol) {
    throw Error(ErrorCode::kNotHermitian, "pauli_decompose on non-Hermitian operator");
  }
  static constexpr char kLabels[4] = {'I', 'X', 'Y', 'Z'};
  const Index dim = op.rows();
  const Index n_strings = Index{1} << (2 * n);
  std::vector<PauliTerm> terms;
  std::string label(static_cast<size_t>(n), 'I');
  for (Index s = 0; s < n_strings; ++s) {
    for (int j = 0; j < n; ++j) {
      label[static_cast<size_t>(j)] = kLabels[(s >> (2 * (n - 1 - j))) & 3];
    }
    const StringMasks m = masks_of(label);
    Complex acc = 0.0;
    // Tr(op s) = sum_b op(b, b^x) s(b^x, b)
    for (Index b = 0; b < dim; ++b) {
      const Index a = b ^ m.x;
      acc += op(b, a) * string_entry(m, a);
    }
    const double coefficient = acc.real() / static_cast<double>(dim);
    if (std::abs(coefficient) < cutoff || coefficient == 0.0) continue;
    terms.push_back(term_from_label(label, coefficient));
  }
  std::stable_sort(terms.begin(), terms.end(), [](const PauliTerm& x, const PauliTerm& y) {
    const int wx = x.weight();
    const int wy = y.weight();
    if (wx != wy) return wx < wy;
    return x.label() < y.label();
  });
  return terms;
}

ComplexMatrix resynthesize(const std::vector<PauliTerm>& terms) {
  if (terms.empty()) throw Error(ErrorCode::kInvalidArgument, "resynthesize: no terms");
  const size_t n = terms.front().sites.size() + 1;
  const Index dim = Index{1} << n;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (const auto& t : terms) {
    const std::string label = t.label();
    if (label.size() != n) throw Error(ErrorCode::kDimMismatch, "resynthesize: mixed register sizes");
    const StringMasks m = masks_of(label);
    for (Index b = 0; b < dim; ++b) {
      const Index a = b ^ m.x;
      out(a, b) += t.coefficient * string_entry(m, a);
    }
  }
  return out;
}

N2Coefficients n2_coefficients(double alpha) {
  const ModelParams params = ModelParams::from_alpha(2, alpha, 0.0, 0.0);
  const EmbeddingOperators ops = build_h_total(params);
  std::map<std::string, double> coeff;
  for (const auto& t : pauli_decompose(ops.h_total, 0.0)) coeff[t.label()] = t.coefficient;
  auto get = [&](const char* s) {
    const auto it = coeff.find(s);
    return it == coeff.end() ? 0.0 : it->second;
  };

  N2Coefficients out;
  out.a1 = get("IXI");
  out.a2 = get("IXZ");
  out.b1 = get("YYI");
  out.b2 = get("YYZ");
  out.exchange_asymmetry = std::max({std::abs(out.a1 - get("IIX")), std::abs(out.a2 - get("IZX")),
                                     std::abs(out.b1 - get("YIY")), std::abs(out.b2 - get("YZY"))});
  static const char* kAllowed[] = {"IXI", "IIX", "IXZ", "IZX", "YYI", "YIY", "YYZ", "YZY"};
  for (const auto& [label, value] : coeff) {
    if (std::find_if(std::begin(kAllowed), std::end(kAllowed),
                     [&](const char* s) { return label == s; }) == std::end(kAllowed)) {
      out.max_other_coefficient = std::max(out.max_other_coefficient, std::abs(value));
    }
  }

  const ComplexMatrix rebuilt =
      out.a1 * (pauli_string_matrix("IXI") + pauli_string_matrix("IIX")) +
      out.a2 * (pauli_string_matrix("IXZ") + pauli_string_matrix("IZX")) +
      out.b1 * (pauli_string_matrix("YYI") + pauli_string_matrix("YIY")) +
      out.b2 * (pauli_string_matrix("YYZ") + pauli_string_matrix("YZY"));
  out.resynthesis_residual = linalg::relative_residual(rebuilt, ops.h_total);
  return out;
}

}  // namespace ptembed::embedding
