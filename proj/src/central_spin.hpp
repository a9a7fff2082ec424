#pragma once

// Dark and bright eigenstates of H_T, overlaps of the two bath states of the
// dark pair, and the scaling analytics built on them.

#include <string>
#include <vector>

#include "dynamics.hpp"
#include "embedding.hpp"

namespace ptembed::central_spin {

using dynamics::EmbeddedState;
using embedding::EmbeddingOperators;
using embedding::ModelParams;
using linalg::Complex;
using linalg::ComplexMatrix;
using linalg::ComplexVector;

struct SpectralFamily {
  int k = 0;
  double epsilon = 0.0;
  unsigned long long pattern = 0;  // bit (N-1-i) set: site i is |up_x>
  ComplexVector psi;               // seed eigenvector
  ComplexVector psi_pt;            // P psi
  EmbeddedState bright_plus;
  EmbeddedState bright_minus;
  ComplexVector dark_plus;   // |+y> (x) bath_plus
  ComplexVector dark_minus;  // |-y> (x) bath_minus
  ComplexVector bath_plus;   // (Pn - iR) psi
  ComplexVector bath_minus;  // (Pn + iR) psi
};

// Seed eigenpatterns ordered by ascending energy, then by pattern value.
std::vector<unsigned long long> eigen_patterns(int n_spins);

ComplexVector product_x_state(int n_spins, unsigned long long pattern);

SpectralFamily spectral_family(const EmbeddingOperators& ops, int k);
SpectralFamily spectral_family(const ModelParams& params, int k);

// Largest |H x - e x| over the four states of a family, H = H_T.
double family_eigen_residual(const EmbeddingOperators& ops, const SpectralFamily& family);

enum class OverlapMethod { kDense, kBinomial };

struct OverlapReport {
  Complex overlap;            // <B-|B+> for the ground family
  double modulus_sq = 0.0;
  double p2_mean = 0.0;       // <psi0|P^2|psi0>/c
  double p2q_mean = 0.0;      // <psi0|P^2 Q|psi0>/c
  double dpmax_log = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double beta = 0.0;
  OverlapMethod method = OverlapMethod::kDense;
  // Dense only: the expectation-value formula evaluated with the dense operators.
  Complex formula_overlap;
  double route_difference = 0.0;
};

OverlapReport overlap_dense(const ModelParams& params);
OverlapReport overlap_binomial(const ModelParams& params);

// -(N/2) ln(1 + e^{-4 theta}) = ln(e^{N theta}/sqrt(c))
double dpmax_log(const ModelParams& params);
double dpmax_log(int n_spins, double theta);

// Probability of |down_x> in the spin state aligned with n.
double aligned_down_weight(const ModelParams& params);

struct LimitBathState {
  ComplexVector plus;
  ComplexVector minus;
  double fidelity_plus = 0.0;
  double fidelity_minus = 0.0;
  double up_weight = 0.0;  // |<all aligned|psi0>|^2
};

LimitBathState limit_bath_state(const ModelParams& params);

double phi1_star(int n_spins);

struct FValues {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

FValues f_values(int n_spins, double beta, double phi1, double theta1);

// (-1 + 2^{1 - N/n_ref})^2: f3 with phi1 pinned at phi1_star(n_ref), theta1 = pi/2.
double pinned_f3(int n_spins, int n_ref);

double solve_beta(int n_spins, double f3_value);

double spin_flip_element(const EmbeddingOperators& ops, int k);
double spin_flip_element(const ModelParams& params, int k);

struct MagneticReport {
  double commutator_norm = 0.0;
  linalg::RealVector spectrum;
  double spectrum_residual = 0.0;   // vs {e_k +- m_y}
  double dark_residual_plus = 0.0;  // |H chi+ - (e_k + m_y) chi+|
  double dark_residual_minus = 0.0;
  double splitting = 0.0;           // <chi+|H|chi+> - <chi-|H|chi->
};

MagneticReport magnetic_analysis(const ModelParams& params, double m_y, int k = 0);

double bright_entropy(const ModelParams& params, int k);
double dark_entropy(const ModelParams& params, int k);
double bath_site_entropy(const ModelParams& params, int site = 0);

}  // namespace ptembed::central_spin
