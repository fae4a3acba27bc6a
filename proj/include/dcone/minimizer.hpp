#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dcone/cone_ansatz.hpp"
#include "dcone/disk_grid.hpp"
#include "dcone/energy_model.hpp"
#include "dcone/errors.hpp"

namespace dcone {

struct MinimizeConfig {
  int max_iters = 1500;
  /// Tolerance on the weighted gradient metric max |g|/w, scaled by
  /// sqrt(E_total) so that stopping is mesh- and energy-level independent.
  double grad_tol = 1e-7;
  int memory = 10;
  double ls_shrink = 0.5;
  double ls_armijo = 1e-4;
  std::vector<double> h_schedule;

  /// Stop when the best energy improved by less than this relative amount
  /// over `stall_window` iterations; equalizes optimization effort across a
  /// thickness sweep.
  int stall_window = 80;
  double stall_rel_decrease = 1e-11;

  /// Extra randomized restarts around the ansatz (0 disables).
  int perturbed_starts = 0;
  double perturbation = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(grad_tol > 0.0)) throw InvalidParameter("grad_tol must be positive");
    if (memory < 1) throw InvalidParameter("memory must be at least 1");
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0))
      throw InvalidParameter("ls_shrink must lie in (0,1)");
    if (!(ls_armijo > 0.0 && ls_armijo < 1.0))
      throw InvalidParameter("ls_armijo must lie in (0,1)");
    for (std::size_t k = 1; k < h_schedule.size(); ++k)
      if (!(h_schedule[k] < h_schedule[k - 1]))
        throw InvalidParameter("h_schedule must be strictly decreasing");
    for (double h : h_schedule)
      if (!(h > 0.0 && h < 1.0))
        throw InvalidParameter("h_schedule entries must lie in (0,1)");
  }
};

struct IterationRecord {
  int iter;
  double energy;
  double grad_metric;
  double step;
};

struct MinimizeResult {
  FieldState state;
  EnergyBreakdown breakdown;
  int iters = 0;
  bool converged = false;
  bool line_search_failed = false;
  double final_grad_metric = 0.0;
  std::vector<IterationRecord> history;
};

namespace detail {

/// Maps interior node values to a flat vector (u1, u2, v blocks).
class DofMap {
 public:
  explicit DofMap(const DiskGrid& grid)
      : nr_(grid.n_r()), nt_(grid.n_theta()), per_field_((nr_ - 1) * nt_) {
    weights_.resize(size());
    for (int f = 0; f < 3; ++f)
      for (int i = 0; i < nr_ - 1; ++i)
        for (int j = 0; j < nt_; ++j)
          weights_[f * per_field_ + i * nt_ + j] = grid.weight(i, j);
  }

  int size() const { return 3 * per_field_; }
  const VectorXd& node_weights() const { return weights_; }

  VectorXd pack(const FieldState& s) const {
    VectorXd x(size());
    copy_in(x, 0, s.u1);
    copy_in(x, 1, s.u2);
    copy_in(x, 2, s.v);
    return x;
  }
  VectorXd pack(const EnergyGradient& g) const {
    VectorXd x(size());
    copy_in(x, 0, g.u1);
    copy_in(x, 1, g.u2);
    copy_in(x, 2, g.v);
    return x;
  }
  void unpack(const VectorXd& x, FieldState& s) const {
    copy_out(x, 0, s.u1);
    copy_out(x, 1, s.u2);
    copy_out(x, 2, s.v);
  }

 private:
  void copy_in(VectorXd& x, int f, const MatrixXd& m) const {
    for (int i = 0; i < nr_ - 1; ++i)
      for (int j = 0; j < nt_; ++j) x[f * per_field_ + i * nt_ + j] = m(i, j);
  }
  void copy_out(const VectorXd& x, int f, MatrixXd& m) const {
    for (int i = 0; i < nr_ - 1; ++i)
      for (int j = 0; j < nt_; ++j) m(i, j) = x[f * per_field_ + i * nt_ + j];
  }
  int nr_, nt_, per_field_;
  VectorXd weights_;
};

}  // namespace detail

/// Limited-memory quasi-Newton descent with backtracking Armijo line search.
///
/// The search runs in weight-scaled variables y = sqrt(w) x, which acts as a
/// mass-matrix preconditioner; without it the near-pole degrees of freedom
/// (tiny quadrature weights) dominate the iteration count.
inline MinimizeResult minimize(const FieldState& initial, double h, double p,
                               const MinimizeConfig& cfg) {
  cfg.validate();
  if (!initial.all_finite())
    throw InvalidParameter("initial state contains non-finite values");
  const detail::DofMap dofs(*initial.grid);
  const VectorXd sqw = dofs.node_weights().cwiseSqrt();

  FieldState work = initial;
  work.apply_pins();

  EnergyGradient grad;
  auto eval = [&](const VectorXd& y, VectorXd* gy) -> double {
    dofs.unpack(VectorXd(y.cwiseQuotient(sqw)), work);
    if (gy) {
      const EnergyBreakdown bd = energy_and_gradient(work, h, p, grad);
      *gy = dofs.pack(grad).cwiseQuotient(sqw);
      return bd.total;
    }
    return energy(work, h, p).total;
  };

  VectorXd y = dofs.pack(initial).cwiseProduct(sqw);
  VectorXd gy(dofs.size());
  double f = eval(y, &gy);

  // variational residual: max |dE/dx| / w over interior nodes
  auto grad_metric = [&](const VectorXd& gy_vec) {
    return (gy_vec.cwiseQuotient(sqw)).cwiseAbs().maxCoeff();
  };

  MinimizeResult result;
  result.history.push_back({0, f, grad_metric(gy), 0.0});

  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> f_window{f};

  const int n = dofs.size();
  VectorXd d(n), q(n), y_new(n), g_new(n);

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const double metric = grad_metric(gy);
    const double tol = cfg.grad_tol * std::sqrt(std::max(f, 1e-300));
    if (metric <= tol) {
      result.converged = true;
      break;
    }

    // two-loop recursion
    q = -gy;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    d = q;
    double slope = gy.dot(d);
    if (!(slope < 0.0)) {  // not a descent direction: restart from steepest
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -gy;
      slope = gy.dot(d);
    }

    double step = iter == 0 ? 1.0 / std::max(1.0, d.norm()) : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      y_new = y + step * d;
      f_new = eval(y_new, nullptr);
      // strict decrease keeps the test meaningful at the rounding floor,
      // where the Armijo margin itself rounds away
      if (std::isfinite(f_new) && f_new < f &&
          f_new <= f + cfg.ls_armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= cfg.ls_shrink;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    eval(y_new, &g_new);
    VectorXd s_vec = y_new - y;
    VectorXd yk = g_new - gy;
    const double sy = s_vec.dot(yk);
    if (sy > 1e-12 * s_vec.norm() * yk.norm()) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(yk));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    y.swap(y_new);
    gy.swap(g_new);
    f = f_new;
    result.history.push_back({iter + 1, f, grad_metric(gy), step});

    f_window.push_back(f);
    if (static_cast<int>(f_window.size()) > cfg.stall_window + 1) {
      f_window.pop_front();
      const double drop = f_window.front() - f_window.back();
      if (drop <= cfg.stall_rel_decrease * std::abs(f_window.front())) break;
    }
  }

  dofs.unpack(VectorXd(y.cwiseQuotient(sqw)), work);
  work.apply_pins();
  result.state = work;
  result.breakdown = energy(result.state, h, p);
  result.iters = iter;
  result.final_grad_metric = grad_metric(gy);
  return result;
}

// ---- power-law fit ----------------------------------------------------------

struct PowerLawFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = 0.0;
};

/// Least squares on (ln x, ln y); needs at least two points.
inline PowerLawFit fit_power_law(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  PowerLawFit fit;
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return fit;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double res =
          std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
      ss += res * res;
    }
    fit.slope_stderr = std::sqrt(ss / double(n - 2) / sxx);
  }
  return fit;
}

// ---- continuation over a thickness schedule ---------------------------------

struct ScalingEntry {
  double h = 0.0;
  EnergyBreakdown breakdown;
  int iters = 0;
  double final_grad_metric = 0.0;
  bool converged = false;
  std::string start;  ///< which candidate start won: "ansatz", "warm", "perturbed"
};

struct ScalingReport {
  std::vector<ScalingEntry> entries;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double theoretical_slope = 0.0;
  double slope_stderr = 0.0;
};

/// Samples the smoothed-cone configuration onto the grid.
inline FieldState ansatz_state(std::shared_ptr<const DiskGrid> grid,
                               const BoundaryCondition& bc, const ConeTrace& trace,
                               double h, double p) {
  const SmoothedCone sc(trace, h, p);
  return FieldState::sample(
      std::move(grid), bc,
      [&](const Vec2& x) { return ansatz_fields(sc, x).u; },
      [&](const Vec2& x) { return ansatz_fields(sc, x).v; });
}

/// Warm-started sweep over the h-schedule. Each entry starts from whichever
/// candidate has the lower discrete energy: the previous minimizer or the
/// fresh ansatz at this h (a warm start with the wrong core scale can sit
/// above the ansatz and trap the descent). Per-entry failures are recorded,
/// not fatal.
inline ScalingReport continuation_run(const BoundaryProfile& profile, double p,
                                      const MinimizeConfig& cfg,
                                      std::shared_ptr<const DiskGrid> grid) {
  cfg.validate();
  if (cfg.h_schedule.empty())
    throw InvalidParameter("h_schedule must not be empty");
  require_admissible(profile);
  const ConeTrace trace = ConeTrace::build(profile);
  const BoundaryCondition bc = BoundaryCondition::from_trace(*grid, trace);

  ScalingReport report;
  report.theoretical_slope = dual_exponent(p);

  FieldState warm;
  bool have_warm = false;
  std::mt19937_64 rng(cfg.seed);

  for (std::size_t idx = 0; idx < cfg.h_schedule.size(); ++idx) {
    const double h = cfg.h_schedule[idx];
    FieldState ansatz = ansatz_state(grid, bc, trace, h, p);

    FieldState* start = &ansatz;
    std::string label = "ansatz";
    if (have_warm && energy(warm, h, p).total < energy(ansatz, h, p).total) {
      start = &warm;
      label = "warm";
    }
    MinimizeResult best = minimize(*start, h, p, cfg);
    best.state.apply_pins();

    for (int k = 0; k < cfg.perturbed_starts; ++k) {
      FieldState perturbed = ansatz;
      std::normal_distribution<double> noise(0.0, cfg.perturbation);
      for (int i = 0; i < grid->n_r() - 1; ++i)
        for (int j = 0; j < grid->n_theta(); ++j) {
          perturbed.u1(i, j) += noise(rng);
          perturbed.u2(i, j) += noise(rng);
          perturbed.v(i, j) += noise(rng);
        }
      MinimizeResult alt = minimize(perturbed, h, p, cfg);
      if (alt.breakdown.total < best.breakdown.total) {
        best = std::move(alt);
        label = "perturbed";
      }
    }

    ScalingEntry entry;
    entry.h = h;
    entry.breakdown = best.breakdown;
    entry.iters = best.iters;
    entry.final_grad_metric = best.final_grad_metric;
    entry.converged = best.converged;
    entry.start = label;
    report.entries.push_back(entry);

    warm = best.state;
    have_warm = true;
  }

  std::vector<double> hs, es;
  for (const auto& e : report.entries)
    if (e.breakdown.total > 0.0) {
      hs.push_back(e.h);
      es.push_back(e.breakdown.total);
    }
  const PowerLawFit fit = fit_power_law(hs, es);
  report.fitted_slope = fit.slope;
  report.slope_stderr = fit.slope_stderr;
  return report;
}

}  // namespace dcone
