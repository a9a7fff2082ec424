#include "ptembed/ptembed.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <cstring>
#include <limits>
#include <new>
#include <string>
#include <vector>

#include "central_spin.hpp"
#include "dynamics.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "scaling.hpp"
#include "verify.hpp"

struct ptembed_params {
  ptembed::embedding::ModelParams value;
};

struct ptembed_model {
  ptembed::embedding::EmbeddingOperators ops;
};

struct ptembed_pauli_list {
  std::vector<std::string> labels;
  std::vector<double> coefficients;
};

struct ptembed_trajectory {
  std::vector<ptembed::dynamics::TrajectoryRecord> records;
  std::size_t bath_dim = 0;
};

struct ptembed_contour {
  ptembed::central_spin::ContourResult result;
};

struct ptembed_verify_report {
  ptembed::verify::VerifyReport report;
};

namespace {

namespace pe = ptembed::embedding;
namespace pc = ptembed::central_spin;
namespace pd = ptembed::dynamics;

thread_local std::string g_last_error;

struct ApiError {
  ptembed_status status;
  std::string message;
};

ptembed_status status_of(ptembed::ErrorCode code) {
  using ptembed::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return PTEMBED_ERR_INVALID_ARGUMENT;
    case ErrorCode::kOutOfDomain: return PTEMBED_ERR_OUT_OF_DOMAIN;
    case ErrorCode::kCapExceeded: return PTEMBED_ERR_CAP_EXCEEDED;
    case ErrorCode::kNotHermitian: return PTEMBED_ERR_NOT_HERMITIAN;
    case ErrorCode::kNotPositive: return PTEMBED_ERR_NOT_POSITIVE;
    case ErrorCode::kNoConvergence: return PTEMBED_ERR_NO_CONVERGENCE;
    case ErrorCode::kSingularQ: return PTEMBED_ERR_SINGULAR_Q;
    case ErrorCode::kBadLength: return PTEMBED_ERR_BAD_LENGTH;
    case ErrorCode::kBadSite: return PTEMBED_ERR_BAD_SITE;
    case ErrorCode::kBadIndex: return PTEMBED_ERR_BAD_INDEX;
    case ErrorCode::kDimMismatch: return PTEMBED_ERR_DIM_MISMATCH;
    case ErrorCode::kNotPTNormalized: return PTEMBED_ERR_NOT_PT_NORMALIZED;
    case ErrorCode::kNotDensityMatrix: return PTEMBED_ERR_NOT_DENSITY_MATRIX;
    case ErrorCode::kNoBracket: return PTEMBED_ERR_NO_BRACKET;
    case ErrorCode::kDegenerateFit: return PTEMBED_ERR_DEGENERATE_FIT;
  }
  return PTEMBED_ERR_INTERNAL;
}

template <class F>
ptembed_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PTEMBED_OK;
  } catch (const ApiError& e) {
    g_last_error = e.message;
    return e.status;
  } catch (const ptembed::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "Internal: out of memory";
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
  } catch (...) {
    g_last_error = "Internal: unknown exception";
  }
  return PTEMBED_ERR_INTERNAL;
}

template <class T>
void need(const T* p, const char* what) {
  if (p == nullptr) throw ApiError{PTEMBED_ERR_NULL_POINTER, std::string("NullPointer: ") + what + " is NULL"};
}

void need_capacity(std::size_t have, std::size_t want) {
  if (have < want) {
    throw ApiError{PTEMBED_ERR_BUFFER_TOO_SMALL, "BufferTooSmall: need " + std::to_string(want) + " doubles, got " +
                                                     std::to_string(have)};
  }
}

void need_index(std::size_t index, std::size_t size) {
  if (index >= size) {
    throw ApiError{PTEMBED_ERR_BAD_INDEX,
                   "BadIndex: index " + std::to_string(index) + " >= size " + std::to_string(size)};
  }
}

const ptembed::linalg::ComplexMatrix& operator_of(const ptembed_model* m, ptembed_operator op) {
  const auto& o = m->ops;
  switch (op) {
    case PTEMBED_OP_SEED: return o.h;
    case PTEMBED_OP_P: return o.p;
    case PTEMBED_OP_P_INV: return o.p_inv;
    case PTEMBED_OP_Q: return o.q;
    case PTEMBED_OP_ETA: return o.eta;
    case PTEMBED_OP_H_PT: return o.h_pt;
    case PTEMBED_OP_A: return o.a_op;
    case PTEMBED_OP_B: return o.b_op;
    case PTEMBED_OP_H_TOTAL: return o.h_total;
  }
  throw ApiError{PTEMBED_ERR_INVALID_ARGUMENT, "InvalidArgument: unknown operator id"};
}

void fill_overlap(const pc::OverlapReport& r, ptembed_overlap_report* out) {
  out->overlap_re = r.overlap.real();
  out->overlap_im = r.overlap.imag();
  out->modulus_sq = r.modulus_sq;
  out->p2_mean = r.p2_mean;
  out->p2q_mean = r.p2q_mean;
  out->dpmax_log = r.dpmax_log;
  out->f1 = r.f1;
  out->f2 = r.f2;
  out->f3 = r.f3;
  out->beta = r.beta;
  out->route_difference = r.route_difference;
}

}  // namespace

extern "C" {

const char* ptembed_status_name(ptembed_status status) {
  switch (status) {
    case PTEMBED_OK: return "Ok";
    case PTEMBED_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PTEMBED_ERR_OUT_OF_DOMAIN: return "OutOfDomain";
    case PTEMBED_ERR_CAP_EXCEEDED: return "CapExceeded";
    case PTEMBED_ERR_NOT_HERMITIAN: return "NotHermitian";
    case PTEMBED_ERR_NOT_POSITIVE: return "NotPositive";
    case PTEMBED_ERR_NO_CONVERGENCE: return "NoConvergence";
    case PTEMBED_ERR_SINGULAR_Q: return "SingularQ";
    case PTEMBED_ERR_BAD_LENGTH: return "BadLength";
    case PTEMBED_ERR_BAD_SITE: return "BadSite";
    case PTEMBED_ERR_BAD_INDEX: return "BadIndex";
    case PTEMBED_ERR_DIM_MISMATCH: return "DimMismatch";
    case PTEMBED_ERR_NOT_PT_NORMALIZED: return "NotPTNormalized";
    case PTEMBED_ERR_NOT_DENSITY_MATRIX: return "NotDensityMatrix";
    case PTEMBED_ERR_NO_BRACKET: return "NoBracket";
    case PTEMBED_ERR_DEGENERATE_FIT: return "DegenerateFit";
    case PTEMBED_ERR_NULL_POINTER: return "NullPointer";
    case PTEMBED_ERR_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case PTEMBED_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* ptembed_last_error(void) { return g_last_error.c_str(); }

const char* ptembed_version(void) { return PTEMBED_VERSION_STRING; }

ptembed_status ptembed_params_from_alpha(int n_spins, double alpha, double theta1, double phi1, ptembed_params** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new ptembed_params{pe::ModelParams::from_alpha(n_spins, alpha, theta1, phi1)};
  });
}

ptembed_status ptembed_params_from_theta(int n_spins, double theta, double theta1, double phi1, ptembed_params** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new ptembed_params{pe::ModelParams::from_theta(n_spins, theta, theta1, phi1)};
  });
}

ptembed_status ptembed_params_set_caps(ptembed_params* params, int dense_cap, int construction_cap) {
  return guarded([&] {
    need(params, "params");
    pe::ModelParams next = params->value;
    next.dense_cap = dense_cap;
    next.construction_cap = construction_cap;
    next.validate();
    params->value = next;
  });
}

ptembed_status ptembed_params_get(const ptembed_params* params, ptembed_param_values* out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    const auto& p = params->value;
    *out = {p.n_spins, p.alpha, p.theta, p.theta1, p.phi1, p.log_c(), p.dense_cap, p.construction_cap};
  });
}

void ptembed_params_free(ptembed_params* params) { delete params; }

ptembed_status ptembed_theta_of_alpha(double alpha, double* theta) {
  return guarded([&] {
    need(theta, "theta");
    *theta = pe::theta_of_alpha(alpha);
  });
}

ptembed_status ptembed_dpmax_log(int n_spins, double theta, double* out) {
  return guarded([&] {
    need(out, "out");
    if (n_spins < 1) throw ptembed::Error(ptembed::ErrorCode::kInvalidArgument, "n_spins must be >= 1");
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
      throw ptembed::Error(ptembed::ErrorCode::kOutOfDomain, "theta must be finite and >= 0");
    }
    *out = pc::dpmax_log(n_spins, theta);
  });
}

ptembed_status ptembed_phi1_star(int n_spins, double* phi1) {
  return guarded([&] {
    need(phi1, "phi1");
    *phi1 = pc::phi1_star(n_spins);
  });
}

ptembed_status ptembed_f_values_eval(int n_spins, double beta, double phi1, double theta1, ptembed_f_values* out) {
  return guarded([&] {
    need(out, "out");
    const auto f = pc::f_values(n_spins, beta, phi1, theta1);
    *out = {f.f1, f.f2, f.f3};
  });
}

ptembed_status ptembed_pinned_f3(int n_spins, int n_ref, double* f3) {
  return guarded([&] {
    need(f3, "f3");
    *f3 = pc::pinned_f3(n_spins, n_ref);
  });
}

ptembed_status ptembed_solve_beta(int n_spins, double f3, double* beta) {
  return guarded([&] {
    need(beta, "beta");
    *beta = pc::solve_beta(n_spins, f3);
  });
}

ptembed_status ptembed_model_build(const ptembed_params* params, ptembed_model** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    *out = new ptembed_model{pe::build_h_total(params->value)};
  });
}

ptembed_status ptembed_model_dim(const ptembed_model* model, ptembed_operator op, size_t* dim) {
  return guarded([&] {
    need(model, "model");
    need(dim, "dim");
    *dim = static_cast<size_t>(operator_of(model, op).rows());
  });
}

ptembed_status ptembed_model_copy_operator(const ptembed_model* model, ptembed_operator op, double* out,
                                           size_t capacity_doubles) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const auto& m = operator_of(model, op);
    const auto rows = static_cast<size_t>(m.rows());
    const auto cols = static_cast<size_t>(m.cols());
    need_capacity(capacity_doubles, 2 * rows * cols);
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < cols; ++j) {
        const auto z = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        out[2 * (i * cols + j)] = z.real();
        out[2 * (i * cols + j) + 1] = z.imag();
      }
    }
  });
}

ptembed_status ptembed_model_c(const ptembed_model* model, double* c, double* log_c) {
  return guarded([&] {
    need(model, "model");
    if (c != nullptr) *c = model->ops.c;
    if (log_c != nullptr) *log_c = model->ops.log_c;
  });
}

void ptembed_model_free(ptembed_model* model) { delete model; }

ptembed_status ptembed_model_pauli(const ptembed_model* model, double cutoff, ptembed_pauli_list** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    if (!(cutoff >= 0.0)) throw ptembed::Error(ptembed::ErrorCode::kInvalidArgument, "cutoff must be >= 0");
    auto list = std::make_unique<ptembed_pauli_list>();
    for (const auto& t : pe::pauli_decompose(model->ops.h_total, cutoff)) {
      list->labels.push_back(t.label());
      list->coefficients.push_back(t.coefficient);
    }
    *out = list.release();
  });
}

size_t ptembed_pauli_count(const ptembed_pauli_list* list) { return list == nullptr ? 0 : list->labels.size(); }

ptembed_status ptembed_pauli_term(const ptembed_pauli_list* list, size_t index, const char** label,
                                  double* coefficient) {
  return guarded([&] {
    need(list, "list");
    need_index(index, list->labels.size());
    if (label != nullptr) *label = list->labels[index].c_str();
    if (coefficient != nullptr) *coefficient = list->coefficients[index];
  });
}

void ptembed_pauli_free(ptembed_pauli_list* list) { delete list; }

ptembed_status ptembed_n2_coefficients_eval(double alpha, ptembed_n2_coefficients* out) {
  return guarded([&] {
    need(out, "out");
    const auto c = pe::n2_coefficients(alpha);
    *out = {c.a1, c.a2, c.b1, c.b2, c.exchange_asymmetry, c.resynthesis_residual, c.max_other_coefficient};
  });
}

ptembed_status ptembed_trajectory_run(const ptembed_params* params, const double* psi0, size_t psi0_len,
                                      const double* t_grid, size_t n_times, ptembed_trajectory** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    if (n_times > 0) need(t_grid, "t_grid");
    const auto& p = params->value;
    p.require_dense("trajectory");
    ptembed::linalg::ComplexVector initial;
    if (psi0 == nullptr) {
      initial = pd::default_initial_state(p);
    } else {
      if (psi0_len != static_cast<size_t>(p.bath_dim())) {
        throw ptembed::Error(ptembed::ErrorCode::kBadLength, "psi0 must hold 2^N amplitudes");
      }
      initial.resize(static_cast<Eigen::Index>(psi0_len));
      for (size_t i = 0; i < psi0_len; ++i) initial(static_cast<Eigen::Index>(i)) = {psi0[2 * i], psi0[2 * i + 1]};
    }
    auto traj = std::make_unique<ptembed_trajectory>();
    traj->records = pd::run_trajectory(p, initial, std::vector<double>(t_grid, t_grid + n_times));
    traj->bath_dim = static_cast<size_t>(p.bath_dim());
    *out = traj.release();
  });
}

ptembed_status ptembed_trajectory_size(const ptembed_trajectory* traj, size_t* rows, size_t* bath_dim) {
  return guarded([&] {
    need(traj, "traj");
    if (rows != nullptr) *rows = traj->records.size();
    if (bath_dim != nullptr) *bath_dim = traj->bath_dim;
  });
}

ptembed_status ptembed_trajectory_row_get(const ptembed_trajectory* traj, size_t index, ptembed_trajectory_row* out) {
  return guarded([&] {
    need(traj, "traj");
    need(out, "out");
    need_index(index, traj->records.size());
    const auto& r = traj->records[index];
    *out = {r.t, r.success_prob, r.failure_prob, r.pt_norm, r.euclid_norm, r.oracle_distance, r.form_residual};
  });
}

ptembed_status ptembed_trajectory_state(const ptembed_trajectory* traj, size_t index, double* out,
                                        size_t capacity_doubles) {
  return guarded([&] {
    need(traj, "traj");
    need(out, "out");
    need_index(index, traj->records.size());
    const auto& v = traj->records[index].postselected_state;
    need_capacity(capacity_doubles, 2 * static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out[2 * i] = v(i).real();
      out[2 * i + 1] = v(i).imag();
    }
  });
}

void ptembed_trajectory_free(ptembed_trajectory* traj) { delete traj; }

ptembed_status ptembed_overlap(const ptembed_params* params, ptembed_overlap_method method,
                               ptembed_overlap_report* out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    switch (method) {
      case PTEMBED_OVERLAP_DENSE: fill_overlap(pc::overlap_dense(params->value), out); return;
      case PTEMBED_OVERLAP_BINOMIAL: fill_overlap(pc::overlap_binomial(params->value), out); return;
    }
    throw ptembed::Error(ptembed::ErrorCode::kInvalidArgument, "unknown overlap method");
  });
}

ptembed_status ptembed_darkstate(const ptembed_params* params, int k, double m_y, ptembed_darkstate_report* out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    const auto& p = params->value;
    p.require_dense("darkstate");
    const auto ops = pe::build_h_total(p);
    const auto fam = pc::spectral_family(ops, k);
    const auto entropy_of = [](const ptembed::linalg::ComplexVector& v) {
      return ptembed::linalg::von_neumann_entropy(ptembed::linalg::partial_trace_ancilla(v));
    };
    const auto overlap = fam.bath_minus.dot(fam.bath_plus);
    const auto mag = pc::magnetic_analysis(p, m_y, k);
    ptembed_darkstate_report r{};
    r.epsilon = fam.epsilon;
    r.eigen_residual = pc::family_eigen_residual(ops, fam);
    r.dark_entropy_plus = entropy_of(fam.dark_plus);
    r.dark_entropy_minus = entropy_of(fam.dark_minus);
    r.bright_entropy = entropy_of(fam.bright_plus.amplitudes);
    r.overlap_re = overlap.real();
    r.overlap_im = overlap.imag();
    r.overlap_modulus_sq = std::norm(overlap);
    r.spin_flip = pc::spin_flip_element(ops, k);
    r.commutator_norm = mag.commutator_norm;
    r.spectrum_residual = mag.spectrum_residual;
    r.dark_residual_plus = mag.dark_residual_plus;
    r.dark_residual_minus = mag.dark_residual_minus;
    r.splitting = mag.splitting;
    r.bath_site_entropy =
        ptembed::linalg::von_neumann_entropy(ptembed::linalg::reduced_density_site(fam.bath_plus, 0));
    *out = r;
  });
}

ptembed_status ptembed_log_spaced_sizes(double n_min, double n_max, int n_points, int* out, size_t capacity,
                                        size_t* count) {
  return guarded([&] {
    need(count, "count");
    const auto sizes = pc::log_spaced_sizes(n_min, n_max, n_points);
    *count = sizes.size();
    if (out == nullptr) return;
    need_capacity(capacity, sizes.size());
    std::copy(sizes.begin(), sizes.end(), out);
  });
}

ptembed_status ptembed_contour_trace(double target, const int* n_list, size_t count, double alpha_lo, double alpha_hi,
                                     double theta1, int threads, ptembed_contour** out) {
  return guarded([&] {
    need(n_list, "n_list");
    need(out, "out");
    *out = nullptr;
    auto c = std::make_unique<ptembed_contour>();
    c->result = pc::contour_trace(target, std::vector<int>(n_list, n_list + count), alpha_lo, alpha_hi, threads, theta1);
    *out = c.release();
  });
}

ptembed_status ptembed_contour_size(const ptembed_contour* contour, size_t* points, size_t* skipped) {
  return guarded([&] {
    need(contour, "contour");
    if (points != nullptr) *points = contour->result.points.size();
    if (skipped != nullptr) *skipped = contour->result.skipped.size();
  });
}

ptembed_status ptembed_contour_point(const ptembed_contour* contour, size_t index, int* n_spins, double* alpha,
                                     double* residual) {
  return guarded([&] {
    need(contour, "contour");
    need_index(index, contour->result.points.size());
    const auto& p = contour->result.points[index];
    if (n_spins != nullptr) *n_spins = p.n_spins;
    if (alpha != nullptr) *alpha = p.alpha;
    if (residual != nullptr) *residual = p.residual;
  });
}

ptembed_status ptembed_contour_skip(const ptembed_contour* contour, size_t index, int* n_spins, const char** reason) {
  return guarded([&] {
    need(contour, "contour");
    need_index(index, contour->result.skipped.size());
    const auto& s = contour->result.skipped[index];
    if (n_spins != nullptr) *n_spins = s.n_spins;
    if (reason != nullptr) *reason = s.reason.c_str();
  });
}

void ptembed_contour_free(ptembed_contour* contour) { delete contour; }

ptembed_status ptembed_power_law_fit(const double* n, const double* alpha, size_t count, ptembed_fit* out) {
  return guarded([&] {
    if (count > 0) {
      need(n, "n");
      need(alpha, "alpha");
    }
    need(out, "out");
    std::vector<pc::FitPoint> pts;
    for (size_t i = 0; i < count; ++i) pts.push_back({n[i], alpha[i]});
    const auto fit = pc::power_law_fit(pts);
    *out = {fit.a, fit.b, fit.gamma, fit.residual_rms};
  });
}

ptembed_status ptembed_inset_fit(double a, const double* n, const double* alpha, size_t count, double n_min,
                                 ptembed_line_fit* out) {
  return guarded([&] {
    if (count > 0) {
      need(n, "n");
      need(alpha, "alpha");
    }
    need(out, "out");
    pc::FitResult fit;
    fit.a = a;
    for (size_t i = 0; i < count; ++i) fit.points.push_back({n[i], alpha[i]});
    const auto lf = pc::inset_fit(fit, n_min);
    *out = {lf.slope, lf.intercept, lf.r_squared, lf.used};
  });
}

void ptembed_verify_options_default(ptembed_verify_options* out) {
  if (out == nullptr) return;
  const ptembed::verify::VerifyOptions d;
  *out = {d.seed, d.tolerance_override, d.orthogonality_theta, d.max_n, d.dense_cap};
}

ptembed_status ptembed_verify_run(const ptembed_verify_options* options, ptembed_verify_report** out) {
  return guarded([&] {
    need(options, "options");
    need(out, "out");
    *out = nullptr;
    ptembed::verify::VerifyOptions o;
    o.seed = options->seed;
    o.tolerance_override = options->tolerance_override;
    o.orthogonality_theta = options->orthogonality_theta;
    o.max_n = options->max_n;
    o.dense_cap = options->dense_cap;
    auto r = std::make_unique<ptembed_verify_report>();
    r->report = ptembed::verify::run_verify(o);
    *out = r.release();
  });
}

size_t ptembed_verify_count(const ptembed_verify_report* report) {
  return report == nullptr ? 0 : report->report.checks.size();
}

ptembed_status ptembed_verify_check(const ptembed_verify_report* report, size_t index, ptembed_check* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    need_index(index, report->report.checks.size());
    const auto& c = report->report.checks[index];
    *out = {c.name.c_str(), c.passed ? 1 : 0, c.residual, c.tolerance, c.detail.c_str()};
  });
}

void ptembed_verify_free(ptembed_verify_report* report) { delete report; }

}  // extern "C"
