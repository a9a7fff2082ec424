#pragma once

// Embedded states on ancilla (x) bath, unitary evolution under H_T,
// post-selection of the ancilla |up> outcome and the direct
// non-Hermitian reference evolution.

#include <vector>

#include "embedding.hpp"

namespace ptembed::dynamics {

using embedding::EmbeddingOperators;
using embedding::ModelParams;
using linalg::Complex;
using linalg::ComplexMatrix;
using linalg::ComplexVector;

// <psi| eta |phi>
Complex pt_inner(const ComplexVector& psi, const ComplexVector& phi, const ComplexMatrix& eta);

// sqrt(<psi|eta|psi>) with eta = P^-2, evaluated as |P^-1 psi|.
double pt_norm(const EmbeddingOperators& ops, const ComplexVector& psi);

enum class Branch { kPlus, kMinus };

struct EmbeddedState {
  ComplexVector amplitudes;  // 2 * 2^N, ancilla first
  Branch branch = Branch::kPlus;
  int n_spins = 0;

  ComplexVector upper() const;  // ancilla |up>
  ComplexVector lower() const;  // ancilla |down>
};

inline constexpr double kPTNormTol = 1e-8;

// plus:  (|up> psi + |down> Q psi) / sqrt(c)
// minus: (|down> psi - |up> Q psi) / sqrt(c)
EmbeddedState embed_state(const EmbeddingOperators& ops, const ComplexVector& psi_pt, Branch branch);

// Same state from the seed vector phi = P^-1 psi (unit norm), which avoids
// forming P phi when P is badly conditioned.
EmbeddedState embed_seed_state(const EmbeddingOperators& ops, const ComplexVector& phi, Branch branch);

// Relative mismatch of the block structure: lower - Q upper (plus) or
// upper + Q lower (minus).
double form_residual(const EmbeddingOperators& ops, const EmbeddedState& state);

EmbeddedState evolve_total(const EmbeddingOperators& ops, const EmbeddedState& state, double t);
EmbeddedState evolve_total(const linalg::UnitaryPropagator& propagator, const EmbeddedState& state,
                           double t);

// P exp(-i h t) P^-1 psi
ComplexVector nonhermitian_evolve(const ModelParams& params, const ComplexVector& psi, double t);

struct PostSelection {
  ComplexVector bath;  // unnormalized upper block
  double success_prob = 0.0;
  double failure_prob = 0.0;
};

PostSelection post_select(const EmbeddedState& state);

// P (x)_i |down_x>, PT-normalized.
ComplexVector default_initial_state(const ModelParams& params);

struct TrajectoryRecord {
  std::size_t index = 0;
  double t = 0.0;
  ComplexVector postselected_state;
  double success_prob = 0.0;
  double failure_prob = 0.0;
  double pt_norm = 0.0;
  double euclid_norm = 0.0;
  double oracle_distance = 0.0;
  double form_residual = 0.0;
};

std::vector<TrajectoryRecord> run_trajectory(const ModelParams& params, const ComplexVector& psi0,
                                             const std::vector<double>& t_grid);

}  // namespace ptembed::dynamics
