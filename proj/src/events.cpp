#include "edsr/events.hpp"

#include <cmath>

namespace edsr {

namespace {

bool any_component_at_bound(const Vec4& value, const Vec4& bound) {
  for (int k = 0; k < 4; ++k) {
    if (std::abs(value[k]) >= bound[k]) return true;
  }
  return false;
}

Vec4 state_delta(const VehicleState& now, const VehicleState& snap) {
  return {now.x - snap.x, now.y - snap.y, now.theta - snap.theta,
          now.v - snap.v};
}

}  // namespace

TriggerDecision should_trigger(const Vec4& e, const Vec4& e_dot,
                               const VehicleState& cav_a,
                               const VehicleState& cav_b,
                               const VehicleState& estimate,
                               const TriggerState& trig,
                               const UncertaintyBounds& bounds,
                               bool first_sample) {
  TriggerDecision d;
  if (first_sample) {
    d.fire = true;
    d.reasons |= kTriggerInitial;
    return d;
  }
  if (any_component_at_bound(e, bounds.w)) d.reasons |= kTriggerError;
  if (any_component_at_bound(e_dot, bounds.nu)) d.reasons |= kTriggerErrorRate;
  if (any_component_at_bound(state_delta(cav_a, trig.snap_a), bounds.s_a) ||
      any_component_at_bound(state_delta(cav_b, trig.snap_b), bounds.s_b)) {
    d.reasons |= kTriggerCavDrift;
  }
  if (any_component_at_bound(state_delta(estimate, trig.snap_estimate),
                             bounds.s_est)) {
    d.reasons |= kTriggerEstimateDrift;
  }
  d.fire = d.reasons != 0;
  return d;
}

void record_event(TriggerState& trig, double t, const VehicleState& cav_a,
                  const VehicleState& cav_b, const VehicleState& estimate) {
  trig.last_event_time = t;
  trig.snap_a = cav_a;
  trig.snap_b = cav_b;
  trig.snap_estimate = estimate;
  ++trig.event_count;
}

}  // namespace edsr
