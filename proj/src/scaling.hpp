#pragma once

// Fixed-overlap contours in the (alpha, N) plane and the power-law fit
// alpha(N) = A - B N^{-gamma}.

#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace ptembed::central_spin {

struct BisectResult {
  double root = 0.0;
  double value = 0.0;  // f(root)
  int iterations = 0;
};

// Requires f(lo) and f(hi) of opposite sign (or one of them zero).
BisectResult bisect_root(const std::function<double(double)>& f, double lo, double hi, double x_tol = 1e-15,
                         int max_iter = 400);

inline constexpr double kContourAlphaLo = 0.01;
inline constexpr double kContourAlphaHi = std::numbers::pi / 2 - 1e-6;

struct ContourPoint {
  int n_spins = 0;
  double alpha = 0.0;
  double residual = 0.0;  // modulus_sq(alpha) - target
};

struct ContourSkip {
  int n_spins = 0;
  std::string reason;
};

struct ContourResult {
  double target = 0.0;
  std::vector<ContourPoint> points;  // ordered as n_list
  std::vector<ContourSkip> skipped;
};

// modulus_sq of the ground bath-state overlap at phi1 = phi1_star(N).
double contour_modsq(int n_spins, double alpha, double theta1 = std::numbers::pi / 2);

// Throws NoBracket when the target is not crossed on [alpha_lo, alpha_hi].
ContourPoint contour_alpha(double target, int n_spins, double alpha_lo = kContourAlphaLo,
                           double alpha_hi = kContourAlphaHi, double theta1 = std::numbers::pi / 2);

ContourResult contour_trace(double target, const std::vector<int>& n_list, double alpha_lo = kContourAlphaLo,
                            double alpha_hi = kContourAlphaHi, int threads = 1,
                            double theta1 = std::numbers::pi / 2);

struct FitPoint {
  double n = 0.0;
  double alpha = 0.0;
};

struct FitResult {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  double residual_rms = 0.0;
  std::vector<FitPoint> points;
};

inline constexpr double kGammaLo = 0.05;
inline constexpr double kGammaHi = 2.0;

FitResult power_law_fit(const std::vector<FitPoint>& points);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int used = 0;
};

// Linear fit of ln(A - alpha) against ln N over points with N >= n_min
// and A > alpha.
LineFit inset_fit(const FitResult& fit, double n_min);

// n_points values log-uniform on [n_min, n_max], rounded, duplicates removed.
std::vector<int> log_spaced_sizes(double n_min, double n_max, int n_points);

}  // namespace ptembed::central_spin
