#include "edsr/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace edsr {

Vec4 estimate_derivative(const HdvEstimate& est, const VehicleParams& p,
                         HdvHeadingModel model) {
  if (!all_finite(est.xbar) || !all_finite(est.h)) {
    throw std::invalid_argument("estimate_derivative: non-finite estimate");
  }
  const double heading_base =
      model == HdvHeadingModel::SpeedOverWheelbase ? est.xbar.v / p.wheelbase
                                                   : 0.0;
  return {
      est.xbar.v * std::cos(est.xbar.theta) + est.h[kIdxX],
      est.xbar.v * std::sin(est.xbar.theta) + est.h[kIdxY],
      heading_base + est.h[kIdxTheta],
      est.h[kIdxV],
  };
}

Vec4 measure_error(const VehicleState& hdv_true, const HdvEstimate& est) {
  return {
      hdv_true.x - est.xbar.x,
      hdv_true.y - est.xbar.y,
      hdv_true.theta - est.xbar.theta,
      hdv_true.v - est.xbar.v,
  };
}

Vec4 error_rate(const Vec4& e_now, const Vec4& e_prev, double dt,
                bool first_sample_after_reset) {
  if (first_sample_after_reset) return {0.0, 0.0, 0.0, 0.0};
  if (!(dt > 0.0)) {
    throw std::invalid_argument("error_rate: dt must be positive");
  }
  return {
      (e_now[0] - e_prev[0]) / dt,
      (e_now[1] - e_prev[1]) / dt,
      (e_now[2] - e_prev[2]) / dt,
      (e_now[3] - e_prev[3]) / dt,
  };
}

void reset_and_adapt(HdvEstimate& est, const VehicleState& hdv_true,
                     const Vec4& e_dot_at_event) {
  for (int k = 0; k < 4; ++k) est.h[k] += e_dot_at_event[k];
  est.xbar = hdv_true;
  est.e = {0.0, 0.0, 0.0, 0.0};
  est.e_dot = {0.0, 0.0, 0.0, 0.0};
}

}  // namespace edsr
