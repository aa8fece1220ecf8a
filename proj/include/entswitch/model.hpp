#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace entswitch {

/// Thrown when a configuration or policy violates a model invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Upper bound on the link count; keeps the closed-form polynomials in k
// well inside double range.
inline constexpr int kMaxLinks = 1'000'000;

/// Physical parameters of the star switch: k homogeneous links, link-level
/// entanglement generated at rate mu per link, per-qubit decoherence at rate
/// alpha, and a per-link buffer of one or two qubits.
struct SwitchConfig {
  int k = 3;
  double mu = 1.0;
  double alpha = 0.0;
  int buffer_size = 1;

  bool operator==(const SwitchConfig&) const = default;
};

/// Randomized policy knobs, each a probability:
///   r1  BSM vs store when a second link generates while one qubit is stored
///       (meaningful for buffer size 1 only; must be 0 for buffer size 2)
///   r2  GHZ vs BSM when qubits from three distinct links are available
///   r3  BSM vs drop when an arrival lands on a link that is already full
struct PolicyParams {
  double r1 = 0.0;
  double r2 = 1.0;
  double r3 = 1.0;

  bool operator==(const PolicyParams&) const = default;
};

/// One operating point of the switch: c3 tripartite (GHZ) measurements per
/// second, c2 bipartite (BSM) measurements per second, and the policy that
/// produced it.
struct CapacityPoint {
  double c3 = 0.0;
  double c2 = 0.0;
  PolicyParams policy{};
};

namespace detail {

inline bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace detail

/// Checks every model invariant and returns the pair unchanged.  Throws
/// ValidationError naming the violated invariant otherwise.
inline std::pair<SwitchConfig, PolicyParams> validate_config(
    const SwitchConfig& cfg, const PolicyParams& pol) {
  if (cfg.k < 3)
    throw ValidationError("k >= 3 required (got " + std::to_string(cfg.k) + ")");
  if (cfg.k > kMaxLinks)
    throw ValidationError("k <= " + std::to_string(kMaxLinks) + " required (got " +
                          std::to_string(cfg.k) + ")");
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu))
    throw ValidationError("mu must be positive and finite");
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha))
    throw ValidationError("alpha must be nonnegative and finite");
  if (cfg.buffer_size != 1 && cfg.buffer_size != 2)
    throw ValidationError("buffer size must be 1 or 2 (got " +
                          std::to_string(cfg.buffer_size) + ")");
  if (!detail::is_probability(pol.r1))
    throw ValidationError("policy probability r1 outside [0,1]");
  if (!detail::is_probability(pol.r2))
    throw ValidationError("policy probability r2 outside [0,1]");
  if (!detail::is_probability(pol.r3))
    throw ValidationError("policy probability r3 outside [0,1]");
  if (cfg.buffer_size == 2 && pol.r1 != 0.0)
    throw ValidationError("r1 must be 0 when buffer size is 2");
  return {cfg, pol};
}

/// Converts a slotted link model (slot length tau, per-slot success
/// probability p) to the exponential rate used everywhere else: mu = p/tau.
inline double rate_from_slot(double tau, double p) {
  if (!(tau > 0.0)) throw ValidationError("slot length tau must be positive");
  if (!(p > 0.0) || p > 1.0)
    throw ValidationError("success probability p must lie in (0,1]");
  return p / tau;
}

}  // namespace entswitch
