#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ptembed::linalg {

ComplexMatrix identity(Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

ComplexMatrix kron_chain(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

ComplexMatrix site_operator(const ComplexMatrix& op2, int site, int n_sites) {
  if (n_sites < 1 || site < 0 || site >= n_sites) {
    throw Error(ErrorCode::kBadSite,
                "site " + std::to_string(site) + " outside register of " + std::to_string(n_sites));
  }
  std::vector<ComplexMatrix> factors(static_cast<size_t>(n_sites), identity(2));
  factors[static_cast<size_t>(site)] = op2;
  return kron_chain(factors);
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint()) / std::max(1.0, max_abs(m));
}

double relative_residual(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimMismatch, "relative_residual on mismatched shapes");
  }
  return max_abs(a - b) / std::max(1.0, max_abs(b));
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(Index n) {
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::kBadLength, "length " + std::to_string(n) + " is not a power of two");
  }
  int k = 0;
  while ((Index{1} << k) < n) ++k;
  return k;
}

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  const Index n = a.rows();
  for (Index q = 0; q < n; ++q) {
    for (Index p = 0; p < n; ++p) {
      if (p != q) sum += std::norm(a(p, q));
    }
  }
  return std::sqrt(sum);
}

// Plain complex product, without the inf/nan recovery of the library operator.
inline Complex mul(Complex x, Complex y) {
  return {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
}

struct Rotation {
  Index p;
  Index q;
  double c;
  double s;
  Complex se;
  Complex ce;
  double new_pp;
  double new_qq;
};

// x <- c x - se y, y <- s x + ce y
void rotate_columns(Complex* x, Complex* y, Index n, const Rotation& rot) {
  for (Index k = 0; k < n; ++k) {
    const Complex xk = x[k];
    const Complex yk = y[k];
    x[k] = rot.c * xk - mul(rot.se, yk);
    y[k] = rot.s * xk + mul(rot.ce, yk);
  }
}

}  // namespace

HermEigResult herm_eig(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw Error(ErrorCode::kNotHermitian, "matrix is not square");
  }
  if (!h.allFinite()) throw Error(ErrorCode::kNotHermitian, "matrix has non-finite entries");
  const double dev = hermiticity_residual(h);
  if (dev > kHermitianTol) {
    throw Error(ErrorCode::kNotHermitian, "deviation " + std::to_string(dev));
  }

  const Index n = h.rows();
  ComplexMatrix a = 0.5 * (h + h.adjoint());
  ComplexMatrix v = identity(n);
  HermEigResult result;

  const double target = kJacobiOffTol * a.norm();
  const Index m = n + (n % 2);  // odd n gets a dummy slot
  std::vector<Index> slots(static_cast<size_t>(m));
  std::vector<Rotation> batch;
  batch.reserve(static_cast<size_t>(m / 2));
  bool converged = false;
  int sweep = 0;
  for (; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    // Round-robin ordering: each round is a set of disjoint (p, q) pairs, so
    // the column pass and the row pass of a round can each sweep memory once.
    std::iota(slots.begin(), slots.end(), Index{0});
    for (Index round = 0; round + 1 < m; ++round) {
      batch.clear();
      for (Index i = 0; i < m / 2; ++i) {
        Index p = slots[static_cast<size_t>(i)];
        Index q = slots[static_cast<size_t>(m - 1 - i)];
        if (p > q) std::swap(p, q);
        if (q >= n) continue;
        const Complex apq = a(p, q);
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Late sweeps: drop entries below the rounding floor of the diagonal.
        if (sweep > 3 && std::abs(app) + 100.0 * r == std::abs(app) &&
            std::abs(aqq) + 100.0 * r == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * r);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex e = std::conj(apq / r);  // exp(-i arg a_pq)
        batch.push_back({p, q, c, s, s * e, c * e, app - t * r, aqq + t * r});
      }

      for (const Rotation& rot : batch) {
        rotate_columns(a.col(rot.p).data(), a.col(rot.q).data(), n, rot);
        rotate_columns(v.col(rot.p).data(), v.col(rot.q).data(), n, rot);
      }
      for (Index k = 0; k < n; ++k) {
        for (const Rotation& rot : batch) {
          const Complex apk = a(rot.p, k);
          const Complex aqk = a(rot.q, k);
          a(rot.p, k) = rot.c * apk - mul(std::conj(rot.se), aqk);
          a(rot.q, k) = rot.s * apk + mul(std::conj(rot.ce), aqk);
        }
      }
      for (const Rotation& rot : batch) {
        a(rot.p, rot.p) = rot.new_pp;
        a(rot.q, rot.q) = rot.new_qq;
        a(rot.p, rot.q) = 0.0;
        a(rot.q, rot.p) = 0.0;
      }
      std::rotate(slots.begin() + 1, slots.end() - 1, slots.end());
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNoConvergence,
                "Jacobi off-diagonal norm above tolerance after " +
                    std::to_string(kJacobiMaxSweeps) + " sweeps");
  }

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i).real() < a(j, j).real(); });

  result.eigenvalues.resize(n);
  result.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<size_t>(k)];
    result.eigenvalues(k) = a(src, src).real();
    result.eigenvectors.col(k) = v.col(src);
  }
  result.sweeps = sweep;
  return result;
}

ComplexMatrix func_from_eig(const HermEigResult& eig, const ScalarFunction& f) {
  const Index n = eig.eigenvalues.size();
  ComplexVector fvals(n);
  for (Index k = 0; k < n; ++k) fvals(k) = f(eig.eigenvalues(k));
  return eig.eigenvectors * fvals.asDiagonal() * eig.eigenvectors.adjoint();
}

ComplexMatrix func_herm(const ComplexMatrix& h, const ScalarFunction& f) {
  return func_from_eig(herm_eig(h), f);
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m, double clamp_tol) {
  const HermEigResult eig = herm_eig(m);
  const double scale = std::max(std::abs(eig.eigenvalues(0)),
                                std::abs(eig.eigenvalues(eig.eigenvalues.size() - 1)));
  const double floor = -clamp_tol * scale;
  for (Index k = 0; k < eig.eigenvalues.size(); ++k) {
    if (eig.eigenvalues(k) < floor) {
      throw Error(ErrorCode::kNotPositive,
                  "eigenvalue " + std::to_string(eig.eigenvalues(k)) + " below clamp floor");
    }
  }
  return func_from_eig(eig, [](double x) { return Complex(x > 0.0 ? std::sqrt(x) : 0.0, 0.0); });
}

UnitaryPropagator::UnitaryPropagator(const ComplexMatrix& hamiltonian) : eig_(herm_eig(hamiltonian)) {}

ComplexVector UnitaryPropagator::apply(const ComplexVector& v, double t) const {
  if (v.size() != eig_.eigenvalues.size()) {
    throw Error(ErrorCode::kDimMismatch, "propagator applied to vector of wrong length");
  }
  ComplexVector coeffs = eig_.eigenvectors.adjoint() * v;
  for (Index k = 0; k < coeffs.size(); ++k) {
    coeffs(k) *= std::exp(-kI * (eig_.eigenvalues(k) * t));
  }
  return eig_.eigenvectors * coeffs;
}

ComplexMatrix UnitaryPropagator::matrix(double t) const {
  return func_from_eig(eig_, [t](double x) { return std::exp(-kI * (x * t)); });
}

ComplexMatrix partial_trace_ancilla(const ComplexVector& state) {
  if (state.size() < 2 || !is_power_of_two(state.size())) {
    throw Error(ErrorCode::kBadLength,
                "ancilla state length " + std::to_string(state.size()) + " is not 2*2^N");
  }
  const Index half = state.size() / 2;
  const auto up = state.head(half);
  const auto down = state.tail(half);
  ComplexMatrix rho(2, 2);
  rho(0, 0) = up.squaredNorm();
  rho(1, 1) = down.squaredNorm();
  rho(0, 1) = down.dot(up);  // sum up_i * conj(down_i)
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

ComplexMatrix reduced_density_site(const ComplexVector& bath_state, int site) {
  if (bath_state.size() < 2 || !is_power_of_two(bath_state.size())) {
    throw Error(ErrorCode::kBadLength,
                "bath state length " + std::to_string(bath_state.size()) + " is not 2^N");
  }
  const int n = log2_exact(bath_state.size());
  if (site < 0 || site >= n) {
    throw Error(ErrorCode::kBadSite,
                "site " + std::to_string(site) + " outside " + std::to_string(n) + " spins");
  }
  const Index mask = Index{1} << (n - 1 - site);
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  for (Index i = 0; i < bath_state.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = bath_state(i);
    const Complex a1 = bath_state(i | mask);
    rho(0, 0) += std::norm(a0);
    rho(1, 1) += std::norm(a1);
    rho(0, 1) += a0 * std::conj(a1);
  }
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

double von_neumann_entropy(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw Error(ErrorCode::kNotDensityMatrix, "density matrix must be square");
  }
  if (hermiticity_residual(rho) > 1e-10) {
    throw Error(ErrorCode::kNotDensityMatrix, "density matrix is not Hermitian");
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    throw Error(ErrorCode::kNotDensityMatrix, "trace " + std::to_string(tr) + " differs from 1");
  }
  const HermEigResult eig = herm_eig(rho);
  double s = 0.0;
  for (Index k = 0; k < eig.eigenvalues.size(); ++k) {
    const double l = eig.eigenvalues(k);
    if (l < -1e-10) {
      throw Error(ErrorCode::kNotDensityMatrix, "negative eigenvalue " + std::to_string(l));
    }
    if (l > 0.0) s -= l * std::log(l);
  }
  return std::max(0.0, s);
}

}  // namespace ptembed::linalg
