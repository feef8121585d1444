#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "raceway/types.hpp"

// Direct-shooting NLP machinery: decision-vector layout with move blocking,
// a projected quasi-Newton (L-BFGS) solver with an augmented-Lagrangian
// treatment of inequality constraints, and warm-start construction.

namespace raceway {

/// Layout of the blocked decision vector:
///   [3 flows per move block (air, dilution, harvest)] * nc
///   + one level slack per prediction step (np)
///   + one terminal biomass slack.
/// Each move block is held over block_len = ceil(np/nc) consecutive steps;
/// the final block absorbs any shorter tail.
struct MoveLayout {
  int np = 0;
  int nc = 0;
  int block_len = 1;

  static MoveLayout make(int np, int nc) {
    if (np < 1 || nc < 1 || nc > np)
      throw invalid_parameter("MoveLayout: require 1 <= nc <= np");
    return {np, nc, (np + nc - 1) / nc};
  }

  int block_of(int step) const { return std::min(step / block_len, nc - 1); }
  int size() const { return 3 * nc + np + 1; }
  int flow_index(int block, int flow) const { return 3 * block + flow; }
  int slack_level_index(int step) const { return 3 * nc + step; }
  int slack_terminal_index() const { return 3 * nc + np; }
};

/// A smooth objective over a box, with optional inequality constraints
/// g(z) <= 0 handled by the solver's augmented Lagrangian.
struct NlpProblem {
  MoveLayout layout;
  std::vector<double> lower, upper, guess;
  std::function<double(const std::vector<double>&)> objective;
  std::function<std::vector<double>(const std::vector<double>&)> inequality;  // optional
};

struct NlpSolution {
  std::vector<double> z;
  double objective = 0.0;
  double optimality = 0.0;            ///< projected-gradient inf-norm (scaled space)
  double constraint_violation = 0.0;  ///< max(0, g) inf-norm
  int iterations = 0;
  std::string status;  ///< converged | iteration-limit | infeasible-guess
  std::vector<double> merit_history;  ///< accepted merit values, per inner phase
};

struct SolverOptions {
  int max_iterations = 200;      ///< total accepted inner iterations
  double tol = 1e-6;             ///< projected-gradient inf-norm target
  double tol_constraint = 1e-6;  ///< max inequality violation target
  double fd_step = 1e-6;         ///< relative forward-difference step
  int memory = 8;                ///< L-BFGS pair memory
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e8;
  int max_outer = 12;            ///< multiplier updates
};

namespace detail {

/// Powell-Hestenes-Rockafellar term for one inequality g <= 0.
inline double phr(double g, double lambda, double mu) {
  const double s = lambda + mu * g;
  if (s > 0.0) return (s * s - lambda * lambda) / (2.0 * mu);
  return -lambda * lambda / (2.0 * mu);
}

}  // namespace detail

/// Projected L-BFGS with augmented-Lagrangian outer loop. Variables are
/// scaled to [0,1] internally; gradients use forward finite differences.
/// The returned point never violates the box bounds.
inline NlpSolution solve(const NlpProblem& problem, const SolverOptions& opt = {}) {
  const std::size_t n = problem.guess.size();
  if (problem.lower.size() != n || problem.upper.size() != n)
    throw invalid_parameter("solve: bounds/guess size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (problem.lower[i] > problem.upper[i])
      throw invalid_parameter("solve: lower bound above upper bound");

  NlpSolution out;
  out.z = problem.guess;
  for (std::size_t i = 0; i < n; ++i) {
    if (problem.guess[i] < problem.lower[i] - 1e-9 ||
        problem.guess[i] > problem.upper[i] + 1e-9) {
      out.status = "infeasible-guess";
      return out;
    }
  }

  std::vector<double> span(n);
  for (std::size_t i = 0; i < n; ++i) span[i] = problem.upper[i] - problem.lower[i];
  auto to_z = [&](const std::vector<double>& y) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = problem.lower[i] + y[i] * span[i];
    return z;
  };

  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (span[i] > 0.0)
      y[i] = std::clamp((problem.guess[i] - problem.lower[i]) / span[i], 0.0, 1.0);

  const bool constrained = static_cast<bool>(problem.inequality);
  std::vector<double> lambda;
  double mu = opt.penalty_init;

  // Augmented Lagrangian at a scaled point.
  auto eval = [&](const std::vector<double>& yy) {
    const std::vector<double> z = to_z(yy);
    double val = problem.objective(z);
    if (constrained) {
      const std::vector<double> g = problem.inequality(z);
      if (lambda.empty()) lambda.assign(g.size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j)
        val += detail::phr(g[j], lambda[j], mu);
    }
    return val;
  };

  double f0 = eval(y);
  if (!std::isfinite(f0)) {
    out.status = "infeasible-guess";
    out.objective = f0;  // non-finite: lets callers detect a vacuous solve
    return out;
  }

  int used = 0;
  double pg_norm = std::numeric_limits<double>::infinity();

  auto gradient = [&](const std::vector<double>& yy, double f_yy,
                      std::vector<double>& grad) {
    grad.assign(n, 0.0);
    std::vector<double> yp = yy;
    for (std::size_t i = 0; i < n; ++i) {
      if (span[i] <= 0.0) continue;
      double h = opt.fd_step * (1.0 + std::abs(yy[i]));
      if (yy[i] + h > 1.0) h = -h;  // step inward at the upper face
      yp[i] = yy[i] + h;
      grad[i] = (eval(yp) - f_yy) / h;
      yp[i] = yy[i];
    }
  };

  auto inner = [&]() {
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> grad(n), grad_new(n);
    double f = eval(y);
    gradient(y, f, grad);

    while (used < opt.max_iterations) {
      // projected-gradient optimality
      pg_norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double step = std::clamp(y[i] - grad[i], 0.0, 1.0) - y[i];
        pg_norm = std::max(pg_norm, std::abs(step));
      }
      if (pg_norm < opt.tol) return;

      // L-BFGS two-loop recursion
      std::vector<double> d = grad;
      std::vector<double> alpha(s_hist.size());
      for (std::size_t k = s_hist.size(); k-- > 0;) {
        double sd = 0.0;
        for (std::size_t i = 0; i < n; ++i) sd += s_hist[k][i] * d[i];
        alpha[k] = rho_hist[k] * sd;
        for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y_hist[k][i];
      }
      if (!s_hist.empty()) {
        double sy = 0.0, yy2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          sy += s_hist.back()[i] * y_hist.back()[i];
          yy2 += y_hist.back()[i] * y_hist.back()[i];
        }
        const double gamma = sy / std::max(yy2, 1e-300);
        for (std::size_t i = 0; i < n; ++i) d[i] *= gamma;
      }
      for (std::size_t k = 0; k < s_hist.size(); ++k) {
        double yd = 0.0;
        for (std::size_t i = 0; i < n; ++i) yd += y_hist[k][i] * d[i];
        const double beta = rho_hist[k] * yd;
        for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s_hist[k][i];
      }
      for (std::size_t i = 0; i < n; ++i) d[i] = -d[i];

      double descent = 0.0;
      for (std::size_t i = 0; i < n; ++i) descent += d[i] * grad[i];
      if (!(descent < 0.0)) {  // not a descent direction: steepest-descent reset
        for (std::size_t i = 0; i < n; ++i) d[i] = -grad[i];
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
      }

      // projected backtracking (Armijo)
      const double c1 = 1e-4;
      double step = 1.0;
      std::vector<double> y_try(n);
      double f_try = f;
      bool accepted = false;
      for (int ls = 0; ls < 45; ++ls) {
        for (std::size_t i = 0; i < n; ++i)
          y_try[i] = std::clamp(y[i] + step * d[i], 0.0, 1.0);
        double dir = 0.0;
        for (std::size_t i = 0; i < n; ++i) dir += grad[i] * (y_try[i] - y[i]);
        f_try = eval(y_try);
        if (std::isfinite(f_try) && f_try <= f + c1 * std::min(dir, 0.0) &&
            f_try < f) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) return;  // stationary for the current AL surface

      ++used;
      out.merit_history.push_back(f_try);
      const double f_new = f_try;
      gradient(y_try, f_new, grad_new);
      std::vector<double> s_vec(n), y_vec(n);
      double sy = 0.0, sn = 0.0, yn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s_vec[i] = y_try[i] - y[i];
        y_vec[i] = grad_new[i] - grad[i];
        sy += s_vec[i] * y_vec[i];
        sn += s_vec[i] * s_vec[i];
        yn += y_vec[i] * y_vec[i];
      }
      if (sy > 1e-10 * std::sqrt(sn * yn)) {
        s_hist.push_back(std::move(s_vec));
        y_hist.push_back(std::move(y_vec));
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > opt.memory) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      y = y_try;
      f = f_new;
      grad = grad_new;
    }
  };

  double viol_prev = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    inner();
    double viol = 0.0;
    if (constrained) {
      const std::vector<double> g = problem.inequality(to_z(y));
      if (lambda.empty()) lambda.assign(g.size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j)
        viol = std::max(viol, std::max(0.0, g[j]));
      out.constraint_violation = viol;
      // an inner stall is the cue to tighten the AL surface, not to give up
      if (pg_norm < opt.tol && viol <= opt.tol_constraint) {
        out.status = "converged";
        break;
      }
      if (used >= opt.max_iterations) break;
      for (std::size_t j = 0; j < g.size(); ++j)
        lambda[j] = std::max(0.0, lambda[j] + mu * g[j]);
      if (viol > 0.25 * viol_prev)
        mu = std::min(mu * opt.penalty_growth, opt.penalty_max);
      viol_prev = viol;
    } else {
      if (pg_norm < opt.tol) out.status = "converged";
      break;
    }
  }
  if (out.status.empty()) out.status = "iteration-limit";

  out.z = to_z(y);
  out.objective = problem.objective(out.z);
  out.optimality = pg_norm;
  out.iterations = used;
  return out;
}

/// Builds an initial guess for a new horizon layout by shifting the previous
/// solution forward one controller period and repeating the last move; slacks
/// reset to zero. Without a previous solution every flow starts at
/// default_flow. The result is clamped into the bounds.
inline std::vector<double> warm_start(const std::vector<double>& prev_z,
                                      const MoveLayout& prev, const MoveLayout& next,
                                      const std::vector<double>& lower,
                                      const std::vector<double>& upper,
                                      double default_flow) {
  std::vector<double> guess(static_cast<std::size_t>(next.size()), 0.0);
  for (int b = 0; b < next.nc; ++b) {
    for (int k = 0; k < 3; ++k) {
      double v = default_flow;
      if (prev_z.size() == static_cast<std::size_t>(prev.size())) {
        const int old_step = std::min(b * next.block_len + 1, prev.np - 1);
        v = prev_z[static_cast<std::size_t>(prev.flow_index(prev.block_of(old_step), k))];
      }
      guess[static_cast<std::size_t>(next.flow_index(b, k))] = v;
    }
  }
  for (std::size_t i = 0; i < guess.size(); ++i)
    guess[i] = std::clamp(guess[i], lower[i], upper[i]);
  return guess;
}

}  // namespace raceway
