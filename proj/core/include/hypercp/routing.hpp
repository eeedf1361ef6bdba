#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "hypercp/energy.hpp"
#include "hypercp/grid.hpp"

namespace hypercp {

enum class Variant { ideal, estimated };

const char* to_string(Variant v);

struct RoutingConfig {
  double battery_threshold_fraction = 0.5;
  double sense_rate_global_pps = 1.0;  ///< hard-wired 1 / sensing_period
  Variant variant = Variant::estimated;
  double battery_capacity_pj = 1000.0;  ///< mirrors EnergyConfig::capacity_pj
};

/// What a node believes about one neighbor at decision time.
struct NeighborEstimate {
  double queue_est = 0.0;      ///< max{0, reported + gradient * age}
  double battery_est = 0.0;
  double generated_est = 0.0;  ///< sense_rate * age
  double age_s = 0.0;
};

/// Estimates for up to the 4 grid neighbors of one node.
class NeighborTable {
 public:
  void put(Coord m, NeighborEstimate est);
  const NeighborEstimate* find(Coord m) const;
  /// Estimate for m; defaults (empty queue, full battery) when absent.
  NeighborEstimate get(Coord m, const RoutingConfig& cfg) const;
  int size() const { return count_; }

 private:
  std::array<std::pair<Coord, NeighborEstimate>, 4> entries_{};
  int count_ = 0;
};

/// Extrapolates a piggybacked snapshot to the current time. Without a
/// snapshot the conventional defaults apply: empty queue, full battery,
/// nothing generated. Throws std::invalid_argument for now < report_time.
NeighborEstimate estimate_neighbor(const std::optional<StatsSnapshot>& snapshot,
                                   double now_s, const RoutingConfig& cfg);

/// Exact current status of a neighbor (the "ideal" knowledge variant).
NeighborEstimate ideal_estimate(const NodeState& neighbor, double now_s,
                                const EnergyConfig& energy);

/// Eligible next hops of n for traffic to gateway w. Selection cascade:
///   (a) battery >= threshold AND strictly nearer to w,
///   (b) battery only, (c) nearer only, (d) all neighbors.
/// Gateways never relay and are excluded throughout. Order within each
/// step follows the N, S, W, E neighbor order. Never empty in bounds.
std::vector<Coord> policy_filter(Coord n, Coord w, const GridTopology& topo,
                                 const NeighborTable& estimates,
                                 const RoutingConfig& cfg);

/// The drift-bound-optimizing decision: the candidate maximizing
/// own_queue - (queue_est + generated_est), ties broken by candidate
/// order. Empty candidates yield nullopt.
std::optional<Coord> select_next_hop(int own_queue_for_dest,
                                     const std::vector<Coord>& candidates,
                                     const NeighborTable& estimates,
                                     const RoutingConfig& cfg);

struct Transmission {
  Packet packet;
  Coord next_hop;
};

struct ForwardingOutcome {
  std::vector<Transmission> transmissions;
  std::vector<Packet> hop_limit_drops;
  bool entered_rest = false;
  /// Set when backlog remains but the battery cannot afford one emission:
  /// the time the next emission becomes affordable.
  std::optional<double> retry_at_s;
};

/// One pass of the forwarding loop for one node: for each gateway with
/// pending traffic, pick the next hop once and emit every affordable packet
/// toward it, restamping each packet with the node's post-batch status.
/// The caller supplies current neighbor estimates and applies the outcome
/// (arrival scheduling, rest timer, retries).
ForwardingOutcome forwarding_step(NodeState& node, const GridTopology& topo,
                                  const RoutingConfig& routing,
                                  const EnergyConfig& energy, double now_s,
                                  int hop_limit,
                                  const NeighborTable& estimates);

/// Hop budget before a packet is discarded as a routing loop casualty.
int default_hop_limit(const GridTopology& topo);

}  // namespace hypercp
