#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hypercp {

// Verification-grade forms of the drift analysis, kept independent of the
// forwarding implementation so tests can cross-check one against the other.

/// Sum of squared per-(node, gateway) backlogs. packets^2.
double lyapunov_potential(std::span<const double> queue_lengths);

/// max{0, U_old - outgoing} + incoming + generated.
double queue_estimate(double u_old, double outgoing, double incoming,
                      double generated);

/// The squared-inequality identity used to bound the drift:
/// V <= max{0, U - mu} + A  implies  V^2 <= U^2 + mu^2 + A^2 - 2U(mu - A).
/// Returns whether the squared inequality holds for the given values.
bool identity_holds(double v, double u, double mu, double a);

/// Inputs of one node's summand of the drift bound right-hand side.
struct LocalRates {
  double staleness_s = 0.0;      ///< age of the node's reported status
  double in_rate_sum_pps = 0.0;  ///< sum of nominal rates of incoming links
  double out_rate_sum_pps = 0.0;
  double queue_at_report = 0.0;
  double generated = 0.0;
};

/// [tau*sum_in + U + G]^2 + [tau*sum_out - U]^2 - 2*U^2
double local_drift_bound(const LocalRates& r);

/// One candidate next hop as seen by the deciding node.
struct HopCandidate {
  double queue_est = 0.0;
  double generated_est = 0.0;
  double staleness_s = 0.0;  ///< age of the candidate's status
  double rate_pps = 0.0;     ///< nominal rate of the link into the candidate
};

/// The local decision problem: which subset of candidate out-links to
/// activate for one (node, gateway) pair.
struct DecisionContext {
  double own_queue = 0.0;
  double own_staleness_s = 0.0;
  double own_in_rate_pps = 0.0;  ///< incoming rates outside the decision
  double own_generated = 0.0;
  std::vector<HopCandidate> candidates;
};

/// Bound contribution of activating the chosen candidate links: the
/// deciding node's summand plus each chosen candidate's incoming-rate term
/// increase. `chosen` holds candidate indices.
double decision_bound(const DecisionContext& ctx,
                      std::span<const std::size_t> chosen);

/// Brute-force minimizer of decision_bound over single-candidate choices;
/// first index wins ties. Returns -1 for no candidates.
int bound_minimizing_hop(const DecisionContext& ctx);

}  // namespace hypercp
