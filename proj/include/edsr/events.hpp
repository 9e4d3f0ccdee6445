#pragma once

#include "edsr/constraints.hpp"
#include "edsr/types.hpp"

namespace edsr {

// Snapshot taken when a control event fires; drift clauses compare the
// current states against it.
struct TriggerState {
  double last_event_time = 0.0;
  VehicleState snap_a, snap_b;
  VehicleState snap_estimate;
  int event_count = 0;
};

// Reason bitmask of a fired trigger.
inline constexpr unsigned kTriggerInitial = 1u << 0;
inline constexpr unsigned kTriggerError = 1u << 1;      // |e_j| >= w_j
inline constexpr unsigned kTriggerErrorRate = 1u << 2;  // |edot_j| >= nu_j
inline constexpr unsigned kTriggerCavDrift = 1u << 3;   // |x_i - x_i(t_k)| >= s_i
inline constexpr unsigned kTriggerEstimateDrift = 1u << 4;

struct TriggerDecision {
  bool fire = false;
  unsigned reasons = 0;
};

// Componentwise OR semantics: any single component crossing its bound fires
// the trigger. The first sample of a run always fires.
TriggerDecision should_trigger(const Vec4& e, const Vec4& e_dot,
                               const VehicleState& cav_a,
                               const VehicleState& cav_b,
                               const VehicleState& estimate,
                               const TriggerState& trig,
                               const UncertaintyBounds& bounds,
                               bool first_sample);

void record_event(TriggerState& trig, double t, const VehicleState& cav_a,
                  const VehicleState& cav_b, const VehicleState& estimate);

}  // namespace edsr
