#include "scaling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "central_spin.hpp"
#include "errors.hpp"

namespace ptembed::central_spin {

BisectResult bisect_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                         int max_iter) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "bisect_root: need lo < hi");
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if (!(std::signbit(f_lo) != std::signbit(f_hi)) || std::isnan(f_lo) || std::isnan(f_hi)) {
    throw Error(ErrorCode::kNoBracket, "f(" + std::to_string(lo) + ") = " + std::to_string(f_lo) + ", f(" +
                                           std::to_string(hi) + ") = " + std::to_string(f_hi));
  }
  BisectResult r;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= x_tol) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return {mid, 0.0, r.iterations + 1};
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double f_at_lo = f(lo);
  const double f_at_hi = f(hi);
  if (std::abs(f_at_lo) <= std::abs(f_at_hi)) {
    r.root = lo;
    r.value = f_at_lo;
  } else {
    r.root = hi;
    r.value = f_at_hi;
  }
  return r;
}

double contour_modsq(int n_spins, double alpha, double theta1) {
  const embedding::ModelParams params =
      embedding::ModelParams::from_alpha(n_spins, alpha, theta1, phi1_star(n_spins));
  return overlap_binomial(params).modulus_sq;
}

ContourPoint contour_alpha(double target, int n_spins, double alpha_lo, double alpha_hi, double theta1) {
  if (!(target > 0.0 && target < 1.0)) throw Error(ErrorCode::kOutOfDomain, "contour target must lie in (0, 1)");
  const auto g = [&](double alpha) { return contour_modsq(n_spins, alpha, theta1) - target; };
  BisectResult r;
  try {
    r = bisect_root(g, alpha_lo, alpha_hi);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoBracket) throw;
    throw Error(ErrorCode::kNoBracket,
                "N = " + std::to_string(n_spins) + ": target " + std::to_string(target) + " not crossed");
  }
  return {n_spins, r.root, r.value};
}

ContourResult contour_trace(double target, const std::vector<int>& n_list, double alpha_lo, double alpha_hi,
                            int threads, double theta1) {
  if (n_list.empty()) throw Error(ErrorCode::kInvalidArgument, "contour_trace: empty N list");
  struct Slot {
    bool ok = false;
    ContourPoint point;
    std::string reason;
  };
  std::vector<Slot> slots(n_list.size());
  const auto work = [&](std::size_t i) {
    try {
      slots[i].point = contour_alpha(target, n_list[i], alpha_lo, alpha_hi, theta1);
      slots[i].ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoBracket) throw;
      slots[i].reason = e.what();
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, n_list.size());
  if (n_workers == 1) {
    for (std::size_t i = 0; i < n_list.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n_list.size(); i += n_workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ContourResult out;
  out.target = target;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      out.points.push_back(slots[i].point);
    } else {
      out.skipped.push_back({n_list[i], slots[i].reason});
    }
  }
  return out;
}

namespace {

struct LinearSolution {
  double a = 0.0;
  double b = 0.0;
  double sse = 0.0;
};

// alpha ~ a - b x with x = N^{-gamma}
LinearSolution solve_linear(const std::vector<FitPoint>& pts, double gamma) {
  const double m = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += std::pow(p.n, -gamma);
    sy += p.alpha;
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    const double dx = std::pow(p.n, -gamma) - mx;
    sxx += dx * dx;
    sxy += dx * (p.alpha - my);
  }
  LinearSolution s;
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  s.b = -slope;
  s.a = my - slope * mx;
  for (const auto& p : pts) {
    const double e = p.alpha - (s.a - s.b * std::pow(p.n, -gamma));
    s.sse += e * e;
  }
  return s;
}

}  // namespace

FitResult power_law_fit(const std::vector<FitPoint>& points) {
  std::vector<double> ns;
  for (const auto& p : points) {
    if (!std::isfinite(p.n) || !std::isfinite(p.alpha) || p.n <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "power_law_fit: points must be finite with N > 0");
    }
    ns.push_back(p.n);
  }
  std::sort(ns.begin(), ns.end());
  const auto distinct = std::unique(ns.begin(), ns.end()) - ns.begin();
  if (points.size() < 4 || distinct < 3) {
    throw Error(ErrorCode::kDegenerateFit, "power_law_fit needs >= 4 points over >= 3 distinct N (got " +
                                               std::to_string(points.size()) + " points, " +
                                               std::to_string(distinct) + " distinct)");
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kGammaLo;
  double hi = kGammaHi;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = solve_linear(points, x1).sse;
  double f2 = solve_linear(points, x2).sse;
  while (hi - lo > 1e-13) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = solve_linear(points, x1).sse;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = solve_linear(points, x2).sse;
    }
  }
  FitResult r;
  r.gamma = 0.5 * (lo + hi);
  const LinearSolution s = solve_linear(points, r.gamma);
  r.a = s.a;
  r.b = s.b;
  r.residual_rms = std::sqrt(s.sse / static_cast<double>(points.size()));
  r.points = points;
  return r;
}

LineFit inset_fit(const FitResult& fit, double n_min) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : fit.points) {
    if (p.n >= n_min && fit.a > p.alpha) xy.emplace_back(std::log(p.n), std::log(fit.a - p.alpha));
  }
  LineFit lf;
  lf.used = static_cast<int>(xy.size());
  if (xy.size() < 2) return lf;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) return lf;
  lf.slope = sxy / sxx;
  lf.intercept = my - lf.slope * mx;
  lf.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return lf;
}

std::vector<int> log_spaced_sizes(double n_min, double n_max, int n_points) {
  if (!(n_min >= 1.0) || !(n_max >= n_min) || n_points < 1) {
    throw Error(ErrorCode::kInvalidArgument, "log_spaced_sizes: need 1 <= n_min <= n_max, n_points >= 1");
  }
  std::vector<int> out;
  const double l0 = std::log(n_min);
  const double l1 = std::log(n_max);
  for (int i = 0; i < n_points; ++i) {
    const double frac = n_points == 1 ? 0.0 : static_cast<double>(i) / (n_points - 1);
    const int n = static_cast<int>(std::lround(std::exp(l0 + frac * (l1 - l0))));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

}  // namespace ptembed::central_spin
