#include "edsr/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace edsr {

double eu_fdi_signal(double t, const AttackParams& p) {
  if (!p.enabled || t < p.start_time) return 0.0;
  const double envelope = p.eta * std::exp(p.kappa * t);
  switch (p.carrier) {
    case Carrier::Sin: return envelope * std::sin(p.carrier_freq * t);
    case Carrier::Cos: return envelope * std::cos(p.carrier_freq * t);
    case Carrier::None: return envelope;
  }
  return 0.0;
}

void validate_attack(const AttackParams& p, double eta_bar, double kappa_bar,
                     const std::string& who) {
  if (!std::isfinite(p.eta) || !std::isfinite(p.kappa) ||
      !std::isfinite(p.carrier_freq) || !std::isfinite(p.start_time)) {
    throw std::invalid_argument(who + ": non-finite attack parameter");
  }
  if (std::abs(p.eta) > eta_bar) {
    throw std::invalid_argument(who + ": |eta|=" + std::to_string(p.eta) +
                                " exceeds envelope bound " +
                                std::to_string(eta_bar));
  }
  if (std::abs(p.kappa) > kappa_bar) {
    throw std::invalid_argument(who + ": |kappa|=" + std::to_string(p.kappa) +
                                " exceeds envelope bound " +
                                std::to_string(kappa_bar));
  }
}

const char* to_string(Carrier c) {
  switch (c) {
    case Carrier::Sin: return "sin";
    case Carrier::Cos: return "cos";
    case Carrier::None: return "none";
  }
  return "?";
}

Carrier carrier_from_string(const std::string& s) {
  if (s == "sin") return Carrier::Sin;
  if (s == "cos") return Carrier::Cos;
  if (s == "none") return Carrier::None;
  throw std::invalid_argument("unknown carrier '" + s +
                              "' (expected sin|cos|none)");
}

}  // namespace edsr
