#pragma once

// Damped nonlinear least squares (Levenberg-Marquardt) over an unconstrained
// parameter vector with a central-difference Jacobian.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "thzrefl/error.hpp"

namespace thzrefl::lm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Residual evaluator: maps n parameters to m residuals, deterministically.
template <class Fn>
concept ResidualFunction = requires(const Fn& fn, const Vector& x) {
  { fn(x) } -> std::convertible_to<Vector>;
};

struct LMConfig {
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double max_damping = 1e10;
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double cost_tolerance = 1e-12;
  double jacobian_step = 1e-6;

  void validate() const {
    if (!(initial_damping > 0.0) || !(damping_up > 1.0) || !(damping_down > 1.0) ||
        !(max_damping > initial_damping)) {
      throw DomainError("LMConfig: invalid damping schedule");
    }
    if (max_iterations < 1) throw DomainError("LMConfig: max_iterations must be >= 1");
    if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(cost_tolerance > 0.0) ||
        !(jacobian_step > 0.0)) {
      throw DomainError("LMConfig: tolerances must be positive");
    }
  }
};

enum class Termination { Gradient, Step, Cost, MaxIterations, DampingLimit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Gradient: return "gradient";
    case Termination::Step: return "step";
    case Termination::Cost: return "cost";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::DampingLimit: return "damping-limit";
  }
  return "?";
}

struct FitResult {
  Vector params;
  double rmse = 0.0;
  double cost = 0.0;  // 0.5 * sum r^2
  int iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;  // infinity norm of J^T r
  Termination termination = Termination::MaxIterations;
  std::vector<double> accepted_costs;  // cost after every accepted step, starting with p0
};

inline constexpr double kJacobianStepFloor = 1e-8;

/// Central-difference Jacobian with h_j = step * max(|x_j|, 1e-8).
template <ResidualFunction Fn>
Matrix numerical_jacobian(const Fn& residuals, const Vector& at, double step) {
  if (!(step > 0.0)) throw DomainError("numerical_jacobian: step must be positive");
  const Eigen::Index n = at.size();
  Matrix J;
  Vector x = at;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step * std::max(std::abs(at[j]), kJacobianStepFloor);
    x[j] = at[j] + h;
    const Vector up = residuals(x);
    x[j] = at[j] - h;
    const Vector down = residuals(x);
    x[j] = at[j];
    if (j == 0) J.resize(up.size(), n);
    J.col(j) = (up - down) / (2.0 * h);
  }
  return J;
}

namespace detail {

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Marquardt scaling diag(J^T J), floored relative to its largest entry so a
// nearly insensitive parameter cannot take unbounded steps.
inline Vector damping_scale(const Matrix& jtj) {
  Vector d = jtj.diagonal();
  const double floor = 1e-6 * d.maxCoeff();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d[i] = std::max(d[i], floor);
    if (d[i] <= 0.0) d[i] = 1.0;
  }
  return d;
}

}  // namespace detail

/// Minimizes 0.5 ||r(x)||^2 from p0.
///
/// Damping is multiplied by damping_up on a rejected trial and divided by
/// damping_down on an accepted one. Accepted steps strictly decrease the
/// cost. A trial whose residuals cannot be evaluated (non-finite values or a
/// library error from the evaluator) counts as rejected.
template <ResidualFunction Fn>
FitResult levenberg_marquardt(const Fn& residuals, const Vector& p0, const LMConfig& config) {
  config.validate();
  if (!detail::all_finite(p0)) throw DomainError("levenberg_marquardt: p0 must be finite");

  FitResult out;
  Vector x = p0;
  Vector r = residuals(x);
  if (r.size() < x.size()) {
    throw UnderdeterminedError("levenberg_marquardt: fewer residuals than parameters");
  }
  if (!detail::all_finite(r)) throw DomainError("levenberg_marquardt: non-finite residuals at p0");

  double cost = 0.5 * r.squaredNorm();
  out.accepted_costs.push_back(cost);
  double lambda = config.initial_damping;

  Matrix J = numerical_jacobian(residuals, x, config.jacobian_step);
  Vector g = J.transpose() * r;
  int iter = 0;
  Termination why = Termination::MaxIterations;

  while (true) {
    if (g.allFinite() && g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) {
      why = Termination::Gradient;
      break;
    }
    if (iter >= config.max_iterations) {
      why = Termination::MaxIterations;
      break;
    }
    ++iter;

    const Matrix jtj = J.transpose() * J;
    const Vector scale = detail::damping_scale(jtj);
    Matrix A = jtj;
    A.diagonal() += lambda * scale;
    Vector delta;
    bool solved = A.allFinite() && g.allFinite();
    Eigen::LDLT<Matrix> ldlt;
    if (solved) {
      ldlt.compute(A);
      solved = ldlt.info() == Eigen::Success;
    }
    if (solved) {
      delta = ldlt.solve(-g);
      solved = detail::all_finite(delta);
    }
    if (!solved) {
      lambda *= config.damping_up;
      if (lambda > config.max_damping) {
        throw SingularError("levenberg_marquardt: damped normal equations not solvable");
      }
      continue;
    }

    const Vector trial = x + delta;
    double trial_cost = std::numeric_limits<double>::infinity();
    Vector trial_r;
    try {
      trial_r = residuals(trial);
      if (detail::all_finite(trial_r)) trial_cost = 0.5 * trial_r.squaredNorm();
    } catch (const Error&) {
      // outside the evaluator's domain: reject
    }

    if (trial_cost < cost) {
      const double decrease = (cost - trial_cost) / std::max(cost, std::numeric_limits<double>::min());
      const bool small_step =
          delta.norm() <= config.step_tolerance * (x.norm() + config.step_tolerance);
      x = trial;
      r = std::move(trial_r);
      cost = trial_cost;
      out.accepted_costs.push_back(cost);
      lambda = std::max(lambda / config.damping_down, 1e-300);
      J = numerical_jacobian(residuals, x, config.jacobian_step);
      g = J.transpose() * r;
      if (small_step) {
        why = Termination::Step;
        break;
      }
      if (decrease <= config.cost_tolerance) {
        why = Termination::Cost;
        break;
      }
    } else {
      lambda *= config.damping_up;
      if (lambda > config.max_damping) {
        why = Termination::DampingLimit;
        break;
      }
    }
  }

  out.params = x;
  out.cost = cost;
  out.rmse = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  out.iterations = iter;
  out.termination = why;
  out.converged = why != Termination::MaxIterations;
  out.final_gradient_norm = g.lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace thzrefl::lm
