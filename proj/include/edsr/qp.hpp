#pragma once

#include <Eigen/Dense>
#include <array>
#include <limits>
#include <vector>

#include "edsr/constraints.hpp"
#include "edsr/types.hpp"

namespace edsr {

using QpMatrix = Eigen::Matrix<double, kNumVars, kNumVars>;
using QpVector = Eigen::Matrix<double, kNumVars, 1>;

// Strictly convex QP over the fixed 8-var decision vector:
//   min 1/2 z'Hz + f'z   s.t.  rows (>=|<=) and lower <= z <= upper.
struct QpProblem {
  QpMatrix H = QpMatrix::Identity();
  QpVector f = QpVector::Zero();
  std::vector<ConstraintRow> rows;
  std::array<double, kNumVars> lower{};
  std::array<double, kNumVars> upper{};

  QpProblem() {
    lower.fill(-std::numeric_limits<double>::infinity());
    upper.fill(std::numeric_limits<double>::infinity());
  }
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

// Multiplier conventions: stationarity holds as
//   Hz + f - sum_Ge lambda_i c_i + sum_Le mu_i c_i - lambda_lo + lambda_up = 0
// with every reported multiplier >= 0 (row_duals aligned with problem.rows).
struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  std::array<double, kNumVars> z{};
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::vector<double> row_duals;
  std::array<double, kNumVars> lower_duals{};
  std::array<double, kNumVars> upper_duals{};
};

// Objective weights of the controller QP: quadratic costs on each CAV's
// acceleration, a small regularizer keeping the steering block positive
// definite, and the per-certificate relaxation penalties.
struct QpWeights {
  double accel_a = 1.0;
  double accel_b = 1.0;
  double steer_reg = 0.01;
  std::array<double, 4> relax{1.0, 1.0, 100.0, 1.0};
};

// Controller QP: H = diag(accel_a, steer_reg, accel_b, steer_reg, relax...),
// f = 0, actuator boxes on inputs, relaxations bounded below by zero.
QpProblem build_qp(const std::vector<ConstraintRow>& rows, const QpWeights& w,
                   const InputLimits& lim);

// Dual active-set method for dense strictly convex QPs (Goldfarb-Idnani).
// Starts from the unconstrained minimizer and adds violated constraints,
// dropping blocking ones along the way; detects infeasibility when neither a
// primal nor a dual step can reduce the violation. Deterministic.
QpSolution solve_qp(const QpProblem& p, double tol = 1e-8, int max_iter = 200);

// Worst violation among stationarity, primal feasibility, dual sign and
// complementary slackness at the given solution (infinity norm).
double kkt_residual(const QpProblem& p, const QpSolution& s);

double qp_objective(const QpProblem& p, const std::array<double, kNumVars>& z);

}  // namespace edsr
