#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hypercp/energy.hpp"
#include "hypercp/estimator.hpp"
#include "hypercp/grid.hpp"
#include "hypercp/routing.hpp"
#include "hypercp/scene.hpp"

namespace hypercp {

/// Full description of one simulation run.
struct RunConfig {
  double sensing_period_s = 1.0;
  double link_delay_s = 0.001;
  std::uint64_t seed = 1;
  /// Negative means "auto": the scene traversal time.
  double duration_s = -1.0;
  int queue_capacity = 10;
  double metric_sample_period_s = 0.1;
  SceneConfig scene;
  EnergyConfig energy;
  RoutingConfig routing;
  GridTopology topo = GridTopology::make_default();

  double resolved_duration_s() const;
  /// Empty when the configuration is consistent.
  std::vector<std::string> validate() const;
};

enum class TraceKind {
  generate,
  enqueue,
  overflow,
  transmit,
  arrive,
  deliver,
  hop_limit_drop,
  rest_begin,
  rest_end,
  metric_sample,
};

const char* to_string(TraceKind k);

struct TraceEvent {
  double time_s = 0.0;
  TraceKind kind{};
  Coord node{};
  std::uint64_t packet_id = 0;  ///< 0 when not applicable
  Coord peer{};                 ///< next hop / sender, kind-dependent
  Coord dest{};                 ///< packet destination gateway
};

using TraceFn = std::function<void(const TraceEvent&)>;

struct LatencyStats {
  static constexpr std::array<double, 13> kEdgesS = {
      0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10};
  std::array<std::uint64_t, 14> buckets{};
  std::uint64_t count = 0;
  double sum_s = 0.0;
  double min_s = std::numeric_limits<double>::infinity();
  double max_s = 0.0;

  void add(double latency_s);
  double mean_s() const { return count ? sum_s / double(count) : 0.0; }
};

struct RunMetrics {
  // Time-averaged over the post-warm-up window (NaN when never sampled).
  double mean_direction_error_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_offset_error_cm = std::numeric_limits<double>::quiet_NaN();
  double mean_battery_fraction = std::numeric_limits<double>::quiet_NaN();
  /// Lost packets (queue overflow + hop-limit drops) per second per
  /// non-gateway node, over the post-warm-up window.
  double overflow_rate_pps_per_node = 0.0;

  std::uint64_t generated_count = 0;
  std::uint64_t delivered_count = 0;
  std::uint64_t dropped_count = 0;  ///< overflow + hop-limit
  std::uint64_t overflow_drops = 0;
  std::uint64_t hop_limit_drops = 0;
  std::uint64_t queued_at_end = 0;
  std::uint64_t in_flight_at_end = 0;

  LatencyStats latency;
  double first_valid_time_s = std::numeric_limits<double>::quiet_NaN();
  int error_samples = 0;
  int battery_samples = 0;

  // Conservation checks, evaluated at run end.
  bool accounting_exact = false;
  double max_energy_rel_err = 0.0;
  bool bounds_ok = false;
};

/// Executes one deterministic discrete-event run.
/// Throws std::invalid_argument on an inconsistent configuration.
RunMetrics run(const RunConfig& cfg, const TraceFn& trace = {});

struct SweepCell {
  double period_s = 0.0;
  Variant variant = Variant::estimated;
  int replication = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct SweepResult {
  std::vector<double> periods;
  std::vector<Variant> variants;
  int replications = 0;
  std::vector<SweepCell> cells;  ///< ordered by (period, variant, replication)

  const SweepCell* find(double period_s, Variant v, int replication) const;
};

using TraceFactory =
    std::function<TraceFn(double period_s, Variant v, int replication)>;

/// Runs every (period, variant, replication) combination; replication r uses
/// seed base.seed + r. Runs execute concurrently on `threads` workers
/// (0 = hardware concurrency); results merge in deterministic order.
SweepResult sweep(const RunConfig& base, const std::vector<double>& periods,
                  const std::vector<Variant>& variants, int replications,
                  int threads = 0, const TraceFactory& trace_factory = {});

}  // namespace hypercp
