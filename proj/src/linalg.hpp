#pragma once

// Dense complex linear algebra used by every other module: Kronecker
// products, Pauli matrices, a cyclic Jacobi eigensolver for Hermitian
// matrices, matrix functions, partial traces and entropies.

#include <complex>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace ptembed::linalg {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

ComplexMatrix identity(Index dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);
ComplexMatrix kron_chain(std::span<const ComplexMatrix> factors);

// op2 acting on `site` of an n_sites register (site 0 is the leftmost factor).
ComplexMatrix site_operator(const ComplexMatrix& op2, int site, int n_sites);

double max_abs(const ComplexMatrix& m);

// max|m - m^dagger| / max(1, max|m|)
double hermiticity_residual(const ComplexMatrix& m);

// max|a - b| / max(1, max|b|); dimensions must agree.
double relative_residual(const ComplexMatrix& a, const ComplexMatrix& b);

// Eigenvalues ascending; eigenvector columns orthonormal.
struct HermEigResult {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
  int sweeps = 0;
};

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kJacobiOffTol = 1e-13;
inline constexpr int kJacobiMaxSweeps = 100;

// Cyclic complex Jacobi. Throws NotHermitian / NoConvergence.
HermEigResult herm_eig(const ComplexMatrix& h);

using ScalarFunction = std::function<Complex(double)>;

ComplexMatrix func_from_eig(const HermEigResult& eig, const ScalarFunction& f);
ComplexMatrix func_herm(const ComplexMatrix& h, const ScalarFunction& f);

inline constexpr double kDefaultClampTol = 1e-12;

// Hermitian square root of a positive semidefinite matrix. Eigenvalues in
// (-clamp_tol*|m|, 0) are clamped to zero; anything lower is NotPositive.
ComplexMatrix psd_sqrt(const ComplexMatrix& m, double clamp_tol = kDefaultClampTol);

// Cached eigendecomposition of a Hermitian generator; apply() computes
// exp(-i H t) v without re-diagonalizing.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const ComplexMatrix& hamiltonian);

  ComplexVector apply(const ComplexVector& v, double t) const;
  ComplexMatrix matrix(double t) const;
  const HermEigResult& eig() const { return eig_; }

 private:
  HermEigResult eig_;
};

// Ancilla is the first tensor factor of a 2 * 2^N state.
ComplexMatrix partial_trace_ancilla(const ComplexVector& state);

// Single-site reduced density matrix of an N-spin state.
ComplexMatrix reduced_density_site(const ComplexVector& bath_state, int site);

// -sum(l ln l) in nats; throws NotDensityMatrix.
double von_neumann_entropy(const ComplexMatrix& rho);

bool is_power_of_two(Index n);
int log2_exact(Index n);

}  // namespace ptembed::linalg
