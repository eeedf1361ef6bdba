#include "hypercp/lyapunov.hpp"

#include <algorithm>
#include <limits>

namespace hypercp {

double lyapunov_potential(std::span<const double> queue_lengths) {
  double sum = 0.0;
  for (double u : queue_lengths) sum += u * u;
  return sum;
}

double queue_estimate(double u_old, double outgoing, double incoming,
                      double generated) {
  return std::max(0.0, u_old - outgoing) + incoming + generated;
}

bool identity_holds(double v, double u, double mu, double a) {
  return v * v <= u * u + mu * mu + a * a - 2.0 * u * (mu - a);
}

double local_drift_bound(const LocalRates& r) {
  const double in_term =
      r.staleness_s * r.in_rate_sum_pps + r.queue_at_report + r.generated;
  const double out_term =
      r.staleness_s * r.out_rate_sum_pps - r.queue_at_report;
  return in_term * in_term + out_term * out_term -
         2.0 * r.queue_at_report * r.queue_at_report;
}

double decision_bound(const DecisionContext& ctx,
                      std::span<const std::size_t> chosen) {
  LocalRates own;
  own.staleness_s = ctx.own_staleness_s;
  own.in_rate_sum_pps = ctx.own_in_rate_pps;
  own.queue_at_report = ctx.own_queue;
  own.generated = ctx.own_generated;
  own.out_rate_sum_pps = 0.0;
  for (std::size_t k : chosen) own.out_rate_sum_pps += ctx.candidates[k].rate_pps;

  double total = local_drift_bound(own);
  // Each activated link raises the chosen candidate's incoming-rate term.
  for (std::size_t k : chosen) {
    const HopCandidate& m = ctx.candidates[k];
    const double backlog = m.queue_est + m.generated_est;
    const double with_link = m.staleness_s * m.rate_pps + backlog;
    total += with_link * with_link - backlog * backlog;
  }
  return total;
}

int bound_minimizing_hop(const DecisionContext& ctx) {
  if (ctx.candidates.empty()) return -1;
  int best = 0;
  double best_bound = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ctx.candidates.size(); ++k) {
    const std::size_t choice[1] = {k};
    const double b = decision_bound(ctx, choice);
    if (b < best_bound) {
      best_bound = b;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace hypercp
