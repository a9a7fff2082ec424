#include "dynamics.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace ptembed::dynamics {

using linalg::Index;
using linalg::kI;

namespace {

ComplexMatrix product_of_sites(const ComplexMatrix& site, int n) {
  std::vector<ComplexMatrix> factors(static_cast<std::size_t>(n), site);
  return linalg::kron_chain(factors);
}

void require_bath_length(const EmbeddingOperators& ops, const ComplexVector& v, const char* what) {
  if (v.size() != ops.params.bath_dim()) {
    throw Error(ErrorCode::kDimMismatch, std::string(what) + ": vector length " + std::to_string(v.size()) +
                                             " != " + std::to_string(ops.params.bath_dim()));
  }
}

}  // namespace

Complex pt_inner(const ComplexVector& psi, const ComplexVector& phi, const ComplexMatrix& eta) {
  if (psi.size() != phi.size() || eta.rows() != psi.size() || eta.cols() != phi.size()) {
    throw Error(ErrorCode::kDimMismatch, "pt_inner: dimensions disagree");
  }
  return psi.dot(eta * phi);
}

double pt_norm(const EmbeddingOperators& ops, const ComplexVector& psi) {
  require_bath_length(ops, psi, "pt_norm");
  return (ops.p_inv * psi).norm();
}

ComplexVector EmbeddedState::upper() const { return amplitudes.head(amplitudes.size() / 2); }
ComplexVector EmbeddedState::lower() const { return amplitudes.tail(amplitudes.size() / 2); }

EmbeddedState embed_seed_state(const EmbeddingOperators& ops, const ComplexVector& phi, Branch branch) {
  require_bath_length(ops, phi, "embed_seed_state");
  const double norm = phi.norm();
  if (std::abs(norm * norm - 1.0) > kPTNormTol) {
    throw Error(ErrorCode::kNotPTNormalized,
                "<psi|eta|psi> = " + std::to_string(norm * norm) + ", expected 1");
  }
  const Index dim = ops.params.bath_dim();
  EmbeddedState s;
  s.branch = branch;
  s.n_spins = ops.params.n_spins;
  s.amplitudes.resize(2 * dim);
  // psi/sqrt(c) = Pn phi and Q psi/sqrt(c) = R phi.
  if (branch == Branch::kPlus) {
    s.amplitudes.head(dim) = ops.pn * phi;
    s.amplitudes.tail(dim) = ops.r * phi;
  } else {
    s.amplitudes.head(dim) = -(ops.r * phi);
    s.amplitudes.tail(dim) = ops.pn * phi;
  }
  return s;
}

EmbeddedState embed_state(const EmbeddingOperators& ops, const ComplexVector& psi_pt, Branch branch) {
  require_bath_length(ops, psi_pt, "embed_state");
  return embed_seed_state(ops, ops.p_inv * psi_pt, branch);
}

double form_residual(const EmbeddingOperators& ops, const EmbeddedState& state) {
  const ComplexVector up = state.upper();
  const ComplexVector down = state.lower();
  const ComplexVector mismatch = state.branch == Branch::kPlus ? ComplexVector(down - ops.q * up)
                                                               : ComplexVector(up + ops.q * down);
  const double scale = std::max(1.0, state.branch == Branch::kPlus ? down.cwiseAbs().maxCoeff()
                                                                   : up.cwiseAbs().maxCoeff());
  return mismatch.cwiseAbs().maxCoeff() / scale;
}

EmbeddedState evolve_total(const linalg::UnitaryPropagator& propagator, const EmbeddedState& state,
                           double t) {
  EmbeddedState out = state;
  out.amplitudes = propagator.apply(state.amplitudes, t);
  return out;
}

EmbeddedState evolve_total(const EmbeddingOperators& ops, const EmbeddedState& state, double t) {
  if (state.amplitudes.size() != ops.h_total.rows()) {
    throw Error(ErrorCode::kDimMismatch, "evolve_total: state does not match H_T");
  }
  if (t == 0.0) return state;
  return evolve_total(linalg::UnitaryPropagator(ops.h_total), state, t);
}

ComplexVector nonhermitian_evolve(const ModelParams& params, const ComplexVector& psi, double t) {
  params.require_dense("nonhermitian_evolve");
  if (psi.size() != params.bath_dim()) throw Error(ErrorCode::kDimMismatch, "nonhermitian_evolve: bad length");
  const int n = params.n_spins;
  const ComplexMatrix site_u = std::cos(t) * linalg::identity(2) - kI * std::sin(t) * linalg::pauli_x();
  const ComplexMatrix p = product_of_sites(embedding::site_exponential(params.theta, params.theta1, params.phi1), n);
  const ComplexMatrix p_inv =
      product_of_sites(embedding::site_exponential(-params.theta, params.theta1, params.phi1), n);
  return p * (product_of_sites(site_u, n) * (p_inv * psi));
}

PostSelection post_select(const EmbeddedState& state) {
  PostSelection out;
  out.bath = state.upper();
  out.success_prob = out.bath.squaredNorm();
  out.failure_prob = state.lower().squaredNorm();
  return out;
}

ComplexVector default_initial_state(const ModelParams& params) {
  params.require_construction("default_initial_state");
  ComplexVector down_x(2);
  down_x << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  ComplexVector phi = down_x;
  for (int i = 1; i < params.n_spins; ++i) phi = linalg::kron(phi, down_x);
  const ComplexMatrix p =
      product_of_sites(embedding::site_exponential(params.theta, params.theta1, params.phi1), params.n_spins);
  return p * phi;
}

std::vector<TrajectoryRecord> run_trajectory(const ModelParams& params, const ComplexVector& psi0,
                                             const std::vector<double>& t_grid) {
  params.require_dense("run_trajectory");
  for (double t : t_grid) {
    if (!std::isfinite(t)) throw Error(ErrorCode::kInvalidArgument, "t_grid entries must be finite");
  }
  const EmbeddingOperators ops = embedding::build_h_total(params);
  const EmbeddedState initial = embed_state(ops, psi0, Branch::kPlus);
  const linalg::UnitaryPropagator propagator(ops.h_total);
  const double sqrt_c = std::sqrt(ops.c);

  std::vector<TrajectoryRecord> records;
  records.reserve(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const EmbeddedState state = evolve_total(propagator, initial, t);
    const PostSelection ps = post_select(state);
    const ComplexVector scaled = sqrt_c * ps.bath;
    TrajectoryRecord rec;
    rec.index = i;
    rec.t = t;
    rec.postselected_state = ps.bath;
    rec.success_prob = ps.success_prob;
    rec.failure_prob = ps.failure_prob;
    rec.pt_norm = pt_norm(ops, scaled);
    rec.euclid_norm = scaled.norm();
    rec.oracle_distance = (scaled - nonhermitian_evolve(params, psi0, t)).norm();
    rec.form_residual = form_residual(ops, state);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ptembed::dynamics
