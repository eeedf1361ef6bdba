#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hypercp {

/// Grid address of a node; doubles as its network identity.
struct Coord {
  int i = 0;  ///< row, 0-based
  int j = 0;  ///< column, 0-based

  auto operator<=>(const Coord&) const = default;
};

std::string to_string(Coord c);

/// Node status piggybacked on every transmitted packet: queue length, its
/// gradient, battery level, and the simulation time the values were taken.
struct StatsSnapshot {
  Coord reporter{};
  int queue_len = 0;
  double queue_gradient_pps = 0.0;  ///< packets per second, may be negative
  double battery_pj = 0.0;
  double report_time_s = 0.0;
};

/// One sensor reading in flight.
struct Packet {
  Coord origin{};
  Coord destination{};  ///< gateway
  double power_reading_mw = 0.0;
  double sensed_at_s = 0.0;
  StatsSnapshot stats{};  ///< restamped by the transmitting node on every hop
  int hop_count = 0;
  std::uint64_t id = 0;
};

enum class EnqueueResult { accepted, overflowed };

/// Mutable per-node state. Mutated only inside the single-threaded event loop.
struct NodeState {
  Coord id{};
  std::deque<Packet> queue;
  int queue_capacity = 10;
  double battery_pj = 0.0;
  std::optional<double> resting_until_s;
  std::map<Coord, StatsSnapshot> neighbor_estimates;
  std::uint64_t overflow_count = 0;

  // Energy ledger (lazy harvesting).
  double last_energy_update_s = 0.0;
  double harvested_total_pj = 0.0;
  double drained_total_pj = 0.0;

  // Gradient bookkeeping: queue length after the previous forwarding event.
  bool has_tx_history = false;
  int last_tx_queue_len = 0;
  double last_tx_time_s = 0.0;

  bool resting_at(double now_s) const {
    return resting_until_s.has_value() && now_s < *resting_until_s;
  }
  /// Number of queued packets destined to gateway w.
  int queued_for(Coord w) const;
};

struct GridTopology {
  int n_rows = 31;
  int n_cols = 31;
  std::vector<Coord> gateways;  ///< sorted by (i, j), unique

  bool in_bounds(Coord c) const {
    return c.i >= 0 && c.i < n_rows && c.j >= 0 && c.j < n_cols;
  }
  bool is_gateway(Coord c) const;

  /// Default topology: the four middle-most edge nodes are gateways
  /// (row/col index floor((N-1)/2)).
  static GridTopology make_default(int rows = 31, int cols = 31);
};

/// |a.i - b.i| + |a.j - b.j|
int manhattan(Coord a, Coord b);

/// 4-connected in-bounds neighbors in N, S, W, E order.
/// Throws std::out_of_range for an out-of-bounds cell.
std::vector<Coord> neighbors(const GridTopology& topo, Coord c);

/// Gateway with minimum Manhattan distance; ties broken by the sorted
/// gateway order.
Coord nearest_gateway(const GridTopology& topo, Coord c);

/// Appends the packet, or drops it and bumps overflow_count when the queue
/// is full. Overflow is a modeled outcome, not an error.
EnqueueResult enqueue(NodeState& node, Packet p);

}  // namespace hypercp
