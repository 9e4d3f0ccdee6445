#pragma once

#include "edsr/types.hpp"

namespace edsr {

// Variants of the estimator's heading channel. SpeedOverWheelbase keeps the
// vbar/L_w base term of the adaptive model verbatim; Zero drops it and leaves
// the heading rate entirely to the adaptive offset h_theta.
enum class HdvHeadingModel { SpeedOverWheelbase, Zero };

// Online adaptive estimate of the human-driven vehicle. xbar integrates the
// estimator vector field between events; h accumulates measured error rates
// at events; e / e_dot are the latest measured error and its backward
// difference (both exactly zero right after a reset).
struct HdvEstimate {
  VehicleState xbar;
  Vec4 h{0.0, 0.0, 0.0, 0.0};
  Vec4 e{0.0, 0.0, 0.0, 0.0};
  Vec4 e_dot{0.0, 0.0, 0.0, 0.0};
};

// Estimator vector field:
//   [vbar cos(thetabar) + h_x,
//    vbar sin(thetabar) + h_y,
//    vbar / L_w + h_theta      (SpeedOverWheelbase)  or  h_theta (Zero),
//    h_v]
Vec4 estimate_derivative(const HdvEstimate& est, const VehicleParams& p,
                         HdvHeadingModel model = HdvHeadingModel::SpeedOverWheelbase);

// e = measured true state minus estimate, componentwise.
Vec4 measure_error(const VehicleState& hdv_true, const HdvEstimate& est);

// Backward finite difference of the measured error. The first sample after a
// reset has no meaningful predecessor, so the rate is defined as zero there.
Vec4 error_rate(const Vec4& e_now, const Vec4& e_prev, double dt,
                bool first_sample_after_reset);

// Event-time update: fold the measured error rate into the adaptive offsets,
// re-anchor the estimate on the measured state, and zero the error bookkeeping.
void reset_and_adapt(HdvEstimate& est, const VehicleState& hdv_true,
                     const Vec4& e_dot_at_event);

}  // namespace edsr
