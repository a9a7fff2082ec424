#pragma once

// Operators of the Hermitian embedding of N free PT-symmetric spins:
// seed Hamiltonian h = sum_i X_i, similarity P = (x)_i exp(theta n.sigma_i),
// metric eta = P^-2, Q = (c P^-2 - I)^{1/2}, H_PT = P h P^-1, and the
// embedding Hamiltonian H_T = I (x) A + Y (x) B on ancilla (x) bath.

#include <array>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace ptembed::embedding {

using linalg::ComplexMatrix;
using linalg::ComplexVector;

inline constexpr int kDefaultDenseCap = 8;
inline constexpr int kDefaultConstructionCap = 10;
// Dense operators are refused once N*theta exceeds this (entries ~ e^{2 N theta}).
inline constexpr double kMaxDenseExponent = 300.0;

double theta_of_alpha(double alpha);
double alpha_of_theta(double theta);

struct ModelParams {
  int n_spins = 1;
  double alpha = 0.0;
  double theta = 0.0;
  double theta1 = 0.0;
  double phi1 = 0.0;
  // Max N for operations that diagonalize 2^N or 2^(N+1) matrices.
  int dense_cap = kDefaultDenseCap;
  // Max N for operations that only build dense operators.
  int construction_cap = kDefaultConstructionCap;

  static ModelParams from_alpha(int n_spins, double alpha, double theta1 = 0.0, double phi1 = 0.0);
  static ModelParams from_theta(int n_spins, double theta, double theta1 = 0.0, double phi1 = 0.0);

  std::array<double, 3> direction() const;
  // ln c = N ln(2 cosh 2 theta), evaluated without overflow.
  double log_c() const;
  double c() const;
  linalg::Index bath_dim() const { return linalg::Index{1} << n_spins; }

  void validate() const;
  void require_dense(const char* what) const;
  void require_construction(const char* what) const;
};

// u with u^dagger sigma_z u = n.sigma, so exp(theta n.sigma) = u^dagger exp(theta sigma_z) u.
ComplexMatrix site_rotation(double theta1, double phi1);

// cosh(theta) I + sinh(theta) n.sigma
ComplexMatrix site_exponential(double theta, double theta1, double phi1);

ComplexMatrix seed_hamiltonian(int n_spins);

struct PResult {
  ComplexMatrix p;
  double c = 0.0;
};

PResult build_p(const ModelParams& params);

// Literal route: psd_sqrt(c p^-2 - I).
ComplexMatrix build_q(const ModelParams& params, const ComplexMatrix& p, double c);

// Closed-form route in the product eigenbasis of P.
ComplexMatrix build_q_spectral(const ModelParams& params);

ComplexMatrix build_h_pt(const ModelParams& params);

struct ABPair {
  ComplexMatrix a;
  ComplexMatrix b;
};

// A = Pn h Pn + R h R, B = i (Pn h R - R h Pn) with Pn = P/sqrt(c), R = QP/sqrt(c).
ABPair build_ab(const ModelParams& params);
// A = (1/c) P (h + Q h Q) P, B = (i/c) P [h, Q] P with Q from build_q.
ABPair build_ab_seed_form(const ModelParams& params);
// A = (1/c)(H_PT Q^-1 + Q H_PT) eta^-1 Q, B = (i/c)(H_PT - Q H_PT Q^-1) eta^-1 Q.
// Throws SingularQ when min eig(Q) < 1e-8.
ABPair build_ab_pt_form(const ModelParams& params);

// Functions of P evaluated in its product eigenbasis: U_P^dagger diag(f(k)) U_P,
// where k is the number of spins anti-aligned with n in the basis state.
ComplexMatrix function_of_p(const ModelParams& params, const std::vector<double>& by_weight);

// Diagonal values, indexed by anti-aligned count k = 0..N.
std::vector<double> pn_diagonal(const ModelParams& params);  // e^{theta(N-2k)}/sqrt(c)
std::vector<double> r_diagonal(const ModelParams& params);   // sqrt(1 - e^{2 theta(N-2k)}/c)
std::vector<double> q_diagonal(const ModelParams& params);   // sqrt(c e^{-2 theta(N-2k)} - 1)

struct EmbeddingOperators {
  ModelParams params;
  ComplexMatrix h;
  ComplexMatrix p;
  ComplexMatrix p_inv;
  double c = 0.0;
  double log_c = 0.0;
  ComplexMatrix q;
  ComplexMatrix eta;
  ComplexMatrix h_pt;
  ComplexMatrix a_op;
  ComplexMatrix b_op;
  ComplexMatrix h_total;
  ComplexMatrix pn;  // P / sqrt(c)
  ComplexMatrix r;   // Q P / sqrt(c) = (I - Pn^2)^{1/2}
};

EmbeddingOperators build_h_total(const ModelParams& params);

ComplexMatrix assemble_h_total(const ComplexMatrix& a_op, const ComplexMatrix& b_op);

struct QSeriesResult {
  ComplexMatrix q;
  int terms = 0;
  double last_term_norm = 0.0;
};

// Q = sum_m (-1)^m binom(1/2, m) c^{1/2-m} P^{2m-1}; stops once a term's
// Frobenius norm drops below tol or m reaches m_max.
QSeriesResult q_series(const ModelParams& params, double tol = 1e-12, int m_max = 200000);

double binom_half(int m);

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

ComplexMatrix pauli_matrix(Pauli p);

// Factor 0 is the ancilla, then bath sites 0..N-1.
struct PauliTerm {
  Pauli ancilla = Pauli::I;
  std::vector<Pauli> sites;
  double coefficient = 0.0;

  std::string label() const;
  int weight() const;
};

inline constexpr double kDefaultPauliCutoff = 1e-12;

// Coefficients Tr(op s)/2^n over all Pauli strings s of an n-qubit operator
// (ancilla first). Sorted by (weight, label).
std::vector<PauliTerm> pauli_decompose(const ComplexMatrix& op, double cutoff = kDefaultPauliCutoff);

ComplexMatrix resynthesize(const std::vector<PauliTerm>& terms);

ComplexMatrix pauli_string_matrix(const std::string& label);

struct N2Coefficients {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double exchange_asymmetry = 0.0;    // max mismatch between site-swapped strings
  double resynthesis_residual = 0.0;  // four-coefficient form rebuilt vs H_T, relative
  double max_other_coefficient = 0.0; // largest coefficient outside the eight allowed strings
};

// N = 2, n = z.
N2Coefficients n2_coefficients(double alpha);

}  // namespace ptembed::embedding
