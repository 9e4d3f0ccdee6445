#pragma once

#include <string>

namespace edsr {

enum class Carrier { Sin, Cos, None };

// Exponentially growing false-data injection on a CAV's acceleration channel:
//   gamma(t) = eta * exp(kappa * t) * carrier(freq * t)   for t >= start_time
// and 0 before start_time or when disabled.
struct AttackParams {
  double eta = 0.0;
  double kappa = 0.0;
  Carrier carrier = Carrier::None;
  double carrier_freq = 0.0;
  bool enabled = false;
  double start_time = 0.0;
};

double eu_fdi_signal(double t, const AttackParams& p);

// Envelope the controller is designed against: |gamma(t)| <= eta_bar *
// exp(kappa_bar * t). Configs whose parameters exceed the envelope are
// rejected at load time; throws std::invalid_argument with a diagnostic.
void validate_attack(const AttackParams& p, double eta_bar, double kappa_bar,
                     const std::string& who);

const char* to_string(Carrier c);
Carrier carrier_from_string(const std::string& s);

}  // namespace edsr
