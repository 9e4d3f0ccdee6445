#include "edsr/qp.hpp"

#include <cmath>
#include <stdexcept>

namespace edsr {

namespace {

constexpr int kN = kNumVars;
constexpr double kInf = std::numeric_limits<double>::infinity();

// One inequality in the solver-internal form c'z >= d with unit-norm c.
// source >= 0 indexes problem.rows; source == -1 marks a variable bound
// (bound_var / is_upper say which one). scale maps duals back: the original
// row is scale * c'z >= scale * d.
struct InternalRow {
  QpVector c = QpVector::Zero();
  double d = 0.0;
  int source = -1;
  int bound_var = -1;
  bool is_upper = false;
  double scale = 1.0;
};

std::vector<InternalRow> normalize_rows(const QpProblem& p, bool* infeasible) {
  std::vector<InternalRow> rows;
  rows.reserve(p.rows.size() + 2 * kN);
  for (size_t i = 0; i < p.rows.size(); ++i) {
    const ConstraintRow& r = p.rows[i];
    InternalRow ir;
    const double sgn = r.sense == RowSense::Ge ? 1.0 : -1.0;
    for (int k = 0; k < kN; ++k) ir.c[k] = sgn * r.coeffs[k];
    ir.d = sgn * r.rhs;
    ir.source = static_cast<int>(i);
    const double nrm = ir.c.norm();
    if (nrm < 1e-14) {
      // Vanishing row: either vacuous or structurally infeasible.
      if (ir.d > 1e-12) *infeasible = true;
      continue;
    }
    ir.c /= nrm;
    ir.d /= nrm;
    ir.scale = nrm;
    rows.push_back(ir);
  }
  for (int k = 0; k < kN; ++k) {
    if (p.lower[k] > -kInf) {
      InternalRow ir;
      ir.c[k] = 1.0;
      ir.d = p.lower[k];
      ir.bound_var = k;
      rows.push_back(ir);
    }
    if (p.upper[k] < kInf) {
      InternalRow ir;
      ir.c[k] = -1.0;
      ir.d = -p.upper[k];
      ir.bound_var = k;
      ir.is_upper = true;
      rows.push_back(ir);
    }
    if (p.lower[k] > p.upper[k]) *infeasible = true;
  }
  return rows;
}

}  // namespace

QpProblem build_qp(const std::vector<ConstraintRow>& rows, const QpWeights& w,
                   const InputLimits& lim) {
  QpProblem p;
  p.H = QpMatrix::Zero();
  p.H(kVarUA, kVarUA) = w.accel_a;
  p.H(kVarPhiA, kVarPhiA) = w.steer_reg;
  p.H(kVarUB, kVarUB) = w.accel_b;
  p.H(kVarPhiB, kVarPhiB) = w.steer_reg;
  for (int j = 0; j < 4; ++j) p.H(kVarDelta1 + j, kVarDelta1 + j) = w.relax[j];
  p.f = QpVector::Zero();
  p.rows = rows;
  p.lower = {lim.u_min, lim.phi_min, lim.u_min, lim.phi_min, 0.0, 0.0, 0.0, 0.0};
  p.upper = {lim.u_max, lim.phi_max, lim.u_max, lim.phi_max, kInf, kInf, kInf, kInf};
  return p;
}

double qp_objective(const QpProblem& p, const std::array<double, kNumVars>& z) {
  QpVector zv;
  for (int k = 0; k < kN; ++k) zv[k] = z[k];
  return 0.5 * zv.dot(p.H * zv) + p.f.dot(zv);
}

QpSolution solve_qp(const QpProblem& p, double tol, int max_iter) {
  QpSolution sol;
  sol.row_duals.assign(p.rows.size(), 0.0);

  Eigen::LLT<QpMatrix> llt(p.H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_qp: H must be positive definite");
  }

  bool structurally_infeasible = false;
  const std::vector<InternalRow> rows = normalize_rows(p, &structurally_infeasible);
  const int m = static_cast<int>(rows.size());

  // Unconstrained minimizer and the inverse Cholesky frame J = L^-T.
  QpVector x = llt.solve(-p.f);
  QpMatrix J = QpMatrix::Identity();
  llt.matrixL().transpose().solveInPlace(J);

  QpMatrix R = QpMatrix::Zero();      // triangular factor of active normals
  std::array<int, kN> active{};       // indices into rows
  Eigen::Matrix<double, kN, 1> u = Eigen::Matrix<double, kN, 1>::Zero();
  int q = 0;
  int iters = 0;

  const auto finish = [&](QpStatus status) {
    sol.status = status;
    for (int k = 0; k < kN; ++k) sol.z[k] = x[k];
    sol.objective = qp_objective(p, sol.z);
    sol.iterations = iters;
    for (int a = 0; a < q; ++a) {
      const InternalRow& ir = rows[active[a]];
      const double lambda = u[a];
      if (ir.source >= 0) {
        sol.row_duals[ir.source] += lambda / ir.scale;
      } else if (ir.is_upper) {
        sol.upper_duals[ir.bound_var] += lambda;
      } else {
        sol.lower_duals[ir.bound_var] += lambda;
      }
    }
    return sol;
  };

  if (structurally_infeasible) return finish(QpStatus::Infeasible);

  // Givens rotation of two columns of J (and the paired entries of d).
  const auto rotate_cols = [](QpMatrix& M, int j0, int j1, double cc, double ss) {
    for (int i = 0; i < kN; ++i) {
      const double t0 = M(i, j0);
      const double t1 = M(i, j1);
      M(i, j0) = cc * t0 + ss * t1;
      M(i, j1) = -ss * t0 + cc * t1;
    }
  };

  const auto add_constraint = [&](QpVector& d) {
    // Zero d[q+1..n-1] into d[q]; J tracks the rotations.
    for (int j = kN - 1; j > q; --j) {
      const double a = d[j - 1];
      const double b = d[j];
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double cc = a / h;
      const double ss = b / h;
      d[j - 1] = h;
      d[j] = 0.0;
      rotate_cols(J, j - 1, j, cc, ss);
    }
    R.col(q).setZero();
    R.col(q).head(q + 1) = d.head(q + 1);
    ++q;
  };

  const auto drop_constraint = [&](int pos) {
    for (int i = pos; i < q - 1; ++i) {
      active[i] = active[i + 1];
      u[i] = u[i + 1];
      R.col(i) = R.col(i + 1);
    }
    u[q - 1] = 0.0;
    R.col(q - 1).setZero();
    --q;
    // Restore the triangular structure of the shifted columns.
    for (int j = pos; j < q; ++j) {
      const double a = R(j, j);
      const double b = R(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double cc = a / h;
      const double ss = b / h;
      for (int col = j; col < q; ++col) {
        const double t0 = R(j, col);
        const double t1 = R(j + 1, col);
        R(j, col) = cc * t0 + ss * t1;
        R(j + 1, col) = -ss * t0 + cc * t1;
      }
      rotate_cols(J, j, j + 1, cc, ss);
    }
  };

  while (true) {
    // Most violated inactive constraint.
    int pick = -1;
    double worst = -tol;
    for (int i = 0; i < m; ++i) {
      bool in_active = false;
      for (int a = 0; a < q; ++a) {
        if (active[a] == i) { in_active = true; break; }
      }
      if (in_active) continue;
      const double s = rows[i].c.dot(x) - rows[i].d;
      if (s < worst) {
        worst = s;
        pick = i;
      }
    }
    if (pick < 0) return finish(QpStatus::Optimal);

    const QpVector np = rows[pick].c;
    double s_p = worst;
    double u_p = 0.0;  // multiplier of the incoming constraint

    while (true) {
      if (++iters > max_iter) return finish(QpStatus::MaxIterations);

      QpVector d = J.transpose() * np;
      // Primal step direction lives in the null space of the active normals.
      QpVector zdir = QpVector::Zero();
      for (int j = q; j < kN; ++j) zdir += J.col(j) * d[j];
      // Dual step direction: R^-1 d_head.
      Eigen::Matrix<double, kN, 1> r = Eigen::Matrix<double, kN, 1>::Zero();
      if (q > 0) {
        r.head(q) = R.topLeftCorner(q, q)
                        .template triangularView<Eigen::Upper>()
                        .solve(d.head(q));
      }

      double t1 = kInf;
      int drop = -1;
      for (int a = 0; a < q; ++a) {
        if (r[a] > 1e-14) {
          const double step = u[a] / r[a];
          if (step < t1) {
            t1 = step;
            drop = a;
          }
        }
      }
      const double z_dot_np = zdir.dot(np);
      const double t2 = z_dot_np > 1e-14 ? -s_p / z_dot_np : kInf;
      const double t = std::min(t1, t2);

      if (t == kInf) return finish(QpStatus::Infeasible);

      if (t2 == kInf) {
        // Dual-only step: shed the blocking constraint and retry.
        for (int a = 0; a < q; ++a) u[a] -= t * r[a];
        u_p += t;
        drop_constraint(drop);
        continue;
      }

      x += t * zdir;
      for (int a = 0; a < q; ++a) u[a] -= t * r[a];
      u_p += t;

      if (t == t2) {
        // Full step: the incoming constraint becomes active.
        u[q] = u_p;
        active[q] = pick;
        add_constraint(d);
        break;
      }
      // Partial step: a blocking constraint leaves, violation shrinks.
      drop_constraint(drop);
      s_p = np.dot(x) - rows[pick].d;
      if (s_p >= -tol) break;  // became satisfied while stepping
    }
  }
}

double kkt_residual(const QpProblem& p, const QpSolution& s) {
  QpVector z;
  for (int k = 0; k < kN; ++k) z[k] = s.z[k];

  QpVector grad = p.H * z + p.f;
  double residual = 0.0;

  for (size_t i = 0; i < p.rows.size(); ++i) {
    const ConstraintRow& r = p.rows[i];
    QpVector c;
    for (int k = 0; k < kN; ++k) c[k] = r.coeffs[k];
    const double val = c.dot(z);
    const double lambda = i < s.row_duals.size() ? s.row_duals[i] : 0.0;
    double slack;
    if (r.sense == RowSense::Ge) {
      grad -= lambda * c;
      slack = val - r.rhs;
      residual = std::max(residual, -slack);  // primal violation
    } else {
      grad += lambda * c;
      slack = r.rhs - val;
      residual = std::max(residual, -slack);
    }
    residual = std::max(residual, -lambda);               // dual sign
    residual = std::max(residual, std::abs(lambda * slack));  // complementarity
  }
  for (int k = 0; k < kN; ++k) {
    if (p.lower[k] > -kInf) {
      const double slack = z[k] - p.lower[k];
      grad[k] -= s.lower_duals[k];
      residual = std::max(residual, -slack);
      residual = std::max(residual, -s.lower_duals[k]);
      residual = std::max(residual, std::abs(s.lower_duals[k] * slack));
    }
    if (p.upper[k] < kInf) {
      const double slack = p.upper[k] - z[k];
      grad[k] += s.upper_duals[k];
      residual = std::max(residual, -slack);
      residual = std::max(residual, -s.upper_duals[k]);
      residual = std::max(residual, std::abs(s.upper_duals[k] * slack));
    }
  }
  residual = std::max(residual, grad.template lpNorm<Eigen::Infinity>());
  return residual;
}

}  // namespace edsr
