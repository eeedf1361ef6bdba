#include "hypercp/routing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hypercp {

const char* to_string(Variant v) {
  return v == Variant::ideal ? "ideal" : "estimated";
}

void NeighborTable::put(Coord m, NeighborEstimate est) {
  for (int k = 0; k < count_; ++k) {
    if (entries_[k].first == m) {
      entries_[k].second = est;
      return;
    }
  }
  if (count_ >= static_cast<int>(entries_.size())) {
    throw std::logic_error("NeighborTable: more than 4 neighbors");
  }
  entries_[count_++] = {m, est};
}

const NeighborEstimate* NeighborTable::find(Coord m) const {
  for (int k = 0; k < count_; ++k) {
    if (entries_[k].first == m) return &entries_[k].second;
  }
  return nullptr;
}

NeighborEstimate NeighborTable::get(Coord m, const RoutingConfig& cfg) const {
  if (const NeighborEstimate* e = find(m)) return *e;
  return NeighborEstimate{0.0, cfg.battery_capacity_pj, 0.0, 0.0};
}

NeighborEstimate estimate_neighbor(const std::optional<StatsSnapshot>& snapshot,
                                   double now_s, const RoutingConfig& cfg) {
  if (!snapshot.has_value()) {
    // Convention: unheard neighbors have empty buffers and full batteries.
    return NeighborEstimate{0.0, cfg.battery_capacity_pj, 0.0, 0.0};
  }
  const double age = now_s - snapshot->report_time_s;
  if (age < 0.0) {
    throw std::invalid_argument("estimate_neighbor: snapshot from the future");
  }
  NeighborEstimate est;
  est.age_s = age;
  est.queue_est = std::max(
      0.0, snapshot->queue_len + snapshot->queue_gradient_pps * age);
  est.generated_est = cfg.sense_rate_global_pps * age;
  est.battery_est = snapshot->battery_pj;
  return est;
}

NeighborEstimate ideal_estimate(const NodeState& neighbor, double now_s,
                                const EnergyConfig& energy) {
  NeighborEstimate est;
  est.queue_est = static_cast<double>(neighbor.queue.size());
  est.battery_est = battery_at(neighbor, now_s, energy);
  est.generated_est = 0.0;
  est.age_s = 0.0;
  return est;
}

std::vector<Coord> policy_filter(Coord n, Coord w, const GridTopology& topo,
                                 const NeighborTable& estimates,
                                 const RoutingConfig& cfg) {
  const double threshold_pj =
      cfg.battery_threshold_fraction * cfg.battery_capacity_pj;
  const int own_distance = manhattan(n, w);

  std::vector<Coord> relays;  // gateways never relay
  for (Coord m : neighbors(topo, n)) {
    if (!topo.is_gateway(m)) relays.push_back(m);
  }

  const auto battery_ok = [&](Coord m) {
    return estimates.get(m, cfg).battery_est >= threshold_pj;
  };
  const auto nearer = [&](Coord m) { return manhattan(m, w) < own_distance; };

  std::vector<Coord> out;
  for (Coord m : relays) {
    if (battery_ok(m) && nearer(m)) out.push_back(m);
  }
  if (!out.empty()) return out;
  for (Coord m : relays) {
    if (battery_ok(m)) out.push_back(m);
  }
  if (!out.empty()) return out;
  for (Coord m : relays) {
    if (nearer(m)) out.push_back(m);
  }
  if (!out.empty()) return out;
  return relays;
}

std::optional<Coord> select_next_hop(int own_queue_for_dest,
                                     const std::vector<Coord>& candidates,
                                     const NeighborTable& estimates,
                                     const RoutingConfig& cfg) {
  if (candidates.empty()) return std::nullopt;
  Coord best = candidates.front();
  double best_differential = -std::numeric_limits<double>::infinity();
  for (Coord m : candidates) {
    const NeighborEstimate est = estimates.get(m, cfg);
    const double differential =
        own_queue_for_dest - (est.queue_est + est.generated_est);
    if (differential > best_differential) {
      best = m;
      best_differential = differential;
    }
  }
  return best;
}

int default_hop_limit(const GridTopology& topo) {
  return 4 * (topo.n_rows + topo.n_cols);
}

ForwardingOutcome forwarding_step(NodeState& node, const GridTopology& topo,
                                  const RoutingConfig& routing,
                                  const EnergyConfig& energy, double now_s,
                                  int hop_limit,
                                  const NeighborTable& estimates) {
  ForwardingOutcome out;
  if (node.queue.empty()) {
    enter_rest(node, now_s, energy);
    out.entered_rest = true;
    return out;
  }

  std::set<Coord> destinations;
  for (const Packet& p : node.queue) destinations.insert(p.destination);

  for (Coord w : destinations) {
    // Discard routing-loop casualties before spending energy on them.
    for (auto it = node.queue.begin(); it != node.queue.end();) {
      if (it->destination == w && it->hop_count + 1 > hop_limit) {
        out.hop_limit_drops.push_back(std::move(*it));
        it = node.queue.erase(it);
      } else {
        ++it;
      }
    }
    const int pending = node.queued_for(w);
    if (pending == 0) continue;

    Coord next_hop{};
    if (manhattan(node.id, w) == 1) {
      next_hop = w;  // gateway-adjacent: the final hop is the delivery
    } else {
      const std::vector<Coord> candidates =
          policy_filter(node.id, w, topo, estimates, routing);
      const std::optional<Coord> picked =
          select_next_hop(pending, candidates, estimates, routing);
      if (!picked.has_value()) {
        throw std::logic_error("forwarding_step: empty candidate set");
      }
      next_hop = *picked;
    }

    const DrainResult drain = drain_tx(node.battery_pj, pending, energy);
    if (drain.affordable == 0) {
      out.retry_at_s = now_s + (energy.drain_per_tx_pj - node.battery_pj) /
                                   energy.harvest_rate_pj_per_s;
      break;  // the remaining destinations face the same empty battery
    }
    node.drained_total_pj += node.battery_pj - drain.battery_pj;
    node.battery_pj = drain.battery_pj;

    int emitted = 0;
    for (auto it = node.queue.begin();
         it != node.queue.end() && emitted < drain.affordable;) {
      if (it->destination == w) {
        Transmission tx;
        tx.packet = std::move(*it);
        tx.next_hop = next_hop;
        ++tx.packet.hop_count;
        out.transmissions.push_back(std::move(tx));
        it = node.queue.erase(it);
        ++emitted;
      } else {
        ++it;
      }
    }
  }

  // All packets of this event carry the node status as the batch leaves.
  if (!out.transmissions.empty()) {
    StatsSnapshot snap;
    snap.reporter = node.id;
    snap.queue_len = static_cast<int>(node.queue.size());
    snap.battery_pj = node.battery_pj;
    snap.report_time_s = now_s;
    snap.queue_gradient_pps = 0.0;
    if (node.has_tx_history && now_s > node.last_tx_time_s) {
      snap.queue_gradient_pps =
          (snap.queue_len - node.last_tx_queue_len) /
          (now_s - node.last_tx_time_s);
    }
    for (Transmission& tx : out.transmissions) tx.packet.stats = snap;
    node.has_tx_history = true;
    node.last_tx_queue_len = snap.queue_len;
    node.last_tx_time_s = now_s;
  }

  if (node.queue.empty() && !out.retry_at_s.has_value()) {
    enter_rest(node, now_s, energy);
    out.entered_rest = true;
  }
  return out;
}

}  // namespace hypercp
