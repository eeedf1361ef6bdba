#pragma once

#include "hypercp/grid.hpp"

namespace hypercp {

struct EnergyConfig {
  double harvest_rate_pj_per_s = 10.0;
  double drain_per_tx_pj = 10.0;
  double capacity_pj = 1000.0;
  double rest_duration_s = 1.0;
  double initial_battery_pj = 1000.0;
};

/// min(capacity, battery + rate * dt). dt must be >= 0.
double harvest(double battery_pj, double dt_s, const EnergyConfig& cfg);

struct DrainResult {
  double battery_pj = 0.0;
  int affordable = 0;  ///< how many of the requested transmissions fit
};

/// Drains as many of n_packets transmissions as the battery affords.
DrainResult drain_tx(double battery_pj, int n_packets, const EnergyConfig& cfg);

/// Brings the node's battery up to date at now_s (lazy harvesting) and
/// records the clamped gain in the node's energy ledger.
void settle_energy(NodeState& node, double now_s, const EnergyConfig& cfg);

/// Battery the node would have at now_s, without mutating it.
double battery_at(const NodeState& node, double now_s, const EnergyConfig& cfg);

/// Starts the rest interval after the queue's empty transition.
void enter_rest(NodeState& node, double now_s, const EnergyConfig& cfg);

}  // namespace hypercp
