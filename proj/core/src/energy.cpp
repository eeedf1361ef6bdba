#include "hypercp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypercp {

double harvest(double battery_pj, double dt_s, const EnergyConfig& cfg) {
  if (dt_s < 0.0) {
    throw std::invalid_argument("harvest: negative time step");
  }
  return std::min(cfg.capacity_pj,
                  battery_pj + cfg.harvest_rate_pj_per_s * dt_s);
}

DrainResult drain_tx(double battery_pj, int n_packets,
                     const EnergyConfig& cfg) {
  if (n_packets < 0) {
    throw std::invalid_argument("drain_tx: negative packet count");
  }
  const int affordable = std::min(
      n_packets,
      static_cast<int>(std::floor(battery_pj / cfg.drain_per_tx_pj)));
  DrainResult r;
  r.affordable = std::max(0, affordable);
  r.battery_pj = battery_pj - r.affordable * cfg.drain_per_tx_pj;
  return r;
}

void settle_energy(NodeState& node, double now_s, const EnergyConfig& cfg) {
  if (now_s < node.last_energy_update_s) {
    throw std::invalid_argument("settle_energy: time went backwards");
  }
  const double updated =
      harvest(node.battery_pj, now_s - node.last_energy_update_s, cfg);
  node.harvested_total_pj += updated - node.battery_pj;
  node.battery_pj = updated;
  node.last_energy_update_s = now_s;
}

double battery_at(const NodeState& node, double now_s,
                  const EnergyConfig& cfg) {
  if (now_s <= node.last_energy_update_s) return node.battery_pj;
  return harvest(node.battery_pj, now_s - node.last_energy_update_s, cfg);
}

void enter_rest(NodeState& node, double now_s, const EnergyConfig& cfg) {
  node.resting_until_s = now_s + cfg.rest_duration_s;
}

}  // namespace hypercp
