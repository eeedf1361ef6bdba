#include "hypercp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hypercp {

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::generate: return "generate";
    case TraceKind::enqueue: return "enqueue";
    case TraceKind::overflow: return "overflow";
    case TraceKind::transmit: return "transmit";
    case TraceKind::arrive: return "arrive";
    case TraceKind::deliver: return "deliver";
    case TraceKind::hop_limit_drop: return "hop_limit_drop";
    case TraceKind::rest_begin: return "rest_begin";
    case TraceKind::rest_end: return "rest_end";
    case TraceKind::metric_sample: return "metric_sample";
  }
  return "?";
}

void LatencyStats::add(double latency_s) {
  ++count;
  sum_s += latency_s;
  min_s = std::min(min_s, latency_s);
  max_s = std::max(max_s, latency_s);
  std::size_t b = 0;
  while (b < kEdgesS.size() && latency_s > kEdgesS[b]) ++b;
  ++buckets[b];
}

double RunConfig::resolved_duration_s() const {
  if (duration_s >= 0.0) return duration_s;
  return scene.traversal_time_s();
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> v;
  const auto positive = [&](double x, const char* name) {
    if (!(x > 0.0)) {
      std::ostringstream os;
      os << name << " must be > 0 (got " << x << ")";
      v.push_back(os.str());
    }
  };
  positive(sensing_period_s, "sim.sensing_period_s");
  positive(link_delay_s, "sim.link_delay_s");
  positive(metric_sample_period_s, "sim.metric_sample_period_s");
  if (queue_capacity < 1) v.push_back("sim.queue_capacity must be >= 1");
  if (topo.n_rows < 3 || topo.n_cols < 3) {
    v.push_back("sim.grid must be at least 3x3");
  }
  if (topo.gateways.empty()) v.push_back("topology has no gateways");
  for (Coord g : topo.gateways) {
    if (!topo.in_bounds(g)) {
      v.push_back("gateway " + to_string(g) + " outside the grid");
    }
  }
  positive(energy.harvest_rate_pj_per_s, "energy.harvest_rate_pj_per_s");
  positive(energy.drain_per_tx_pj, "energy.drain_per_tx_pj");
  positive(energy.capacity_pj, "energy.capacity_pj");
  positive(energy.rest_duration_s, "energy.rest_duration_s");
  if (energy.initial_battery_pj < 0.0 ||
      energy.initial_battery_pj > energy.capacity_pj) {
    v.push_back("energy.initial_battery_pj must lie in [0, capacity]");
  }
  if (routing.battery_threshold_fraction < 0.0 ||
      routing.battery_threshold_fraction > 1.0) {
    v.push_back("routing.battery_threshold_fraction must lie in [0, 1]");
  }
  positive(scene.y_max_cm, "scene.y_max_cm");
  positive(scene.z_max_cm, "scene.z_max_cm");
  positive(scene.tx_power_mw, "scene.tx_power_mw");
  if (!(scene.cone_opening_deg > 0.0 && scene.cone_opening_deg < 180.0)) {
    v.push_back("scene.cone_opening_deg must lie in (0, 180)");
  }
  if (scene.speed_cm_per_s < 0.0) {
    v.push_back("scene.speed_cm_per_s must be >= 0");
  }
  if (duration_s < 0.0 && scene.traversal_time_s() <= 0.0) {
    v.push_back("sim.duration_s required for a static source");
  }
  return v;
}

namespace {

struct Event {
  enum class Kind { sense, forward, arrive, rest_end, sample };
  double t = 0.0;
  std::uint64_t seq = 0;
  Kind kind = Kind::sense;
  int node = -1;
  Packet packet;  // arrive only
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

struct SimNode {
  NodeState state;
  double y_cm = 0.0, z_cm = 0.0;
  Coord gateway{};  // nearest, for original packets
  bool is_gateway = false;
  bool forward_scheduled = false;
};

// 53-bit uniform draw in [0, 1); pinned mapping for reproducibility.
double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

class Simulation {
 public:
  Simulation(const RunConfig& cfg, const TraceFn& trace)
      : cfg_(cfg),
        trace_(trace),
        duration_(cfg.resolved_duration_s()),
        hop_limit_(default_hop_limit(cfg.topo)),
        cell_area_(cell_area_cm2(cfg.topo, cfg.scene)),
        server_(cfg.scene, 50) {
    routing_ = cfg.routing;
    routing_.sense_rate_global_pps = 1.0 / cfg.sensing_period_s;
    routing_.battery_capacity_pj = cfg.energy.capacity_pj;
  }

  RunMetrics execute() {
    init_nodes();
    if (duration_ > 0.0) {
      schedule_initial_events();
      while (!events_.empty() && events_.top().t <= duration_) {
        const Event ev = events_.top();
        events_.pop();
        dispatch(ev);
      }
    }
    return finalize();
  }

 private:
  int index(Coord c) const { return c.i * cfg_.topo.n_cols + c.j; }

  void emit(double t, TraceKind kind, Coord node, std::uint64_t packet_id,
            Coord peer, Coord dest) {
    if (trace_) trace_(TraceEvent{t, kind, node, packet_id, peer, dest});
  }

  void schedule(Event ev) {
    ev.seq = next_seq_++;
    events_.push(std::move(ev));
  }

  void init_nodes() {
    const int total = cfg_.topo.n_rows * cfg_.topo.n_cols;
    nodes_.resize(total);
    for (int i = 0; i < cfg_.topo.n_rows; ++i) {
      for (int j = 0; j < cfg_.topo.n_cols; ++j) {
        const Coord c{i, j};
        SimNode& n = nodes_[index(c)];
        n.state.id = c;
        n.state.queue_capacity = cfg_.queue_capacity;
        n.state.battery_pj = cfg_.energy.initial_battery_pj;
        n.is_gateway = cfg_.topo.is_gateway(c);
        const auto [y, z] = node_surface_position_cm(c, cfg_.topo, cfg_.scene);
        n.y_cm = y;
        n.z_cm = z;
        if (!n.is_gateway) n.gateway = nearest_gateway(cfg_.topo, c);
      }
    }
  }

  void schedule_initial_events() {
    std::mt19937_64 rng(cfg_.seed);
    // Sensing phases in row-major node order; the run's only randomness.
    for (int i = 0; i < cfg_.topo.n_rows; ++i) {
      for (int j = 0; j < cfg_.topo.n_cols; ++j) {
        const Coord c{i, j};
        SimNode& n = nodes_[index(c)];
        if (n.is_gateway) continue;
        const double phase = uniform01(rng) * cfg_.sensing_period_s;
        if (phase <= duration_) {
          schedule(Event{phase, 0, Event::Kind::sense, index(c), {}});
        }
      }
    }
    if (cfg_.metric_sample_period_s <= duration_) {
      schedule(Event{cfg_.metric_sample_period_s, 0, Event::Kind::sample, -1,
                     {}});
    }
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Event::Kind::sense: return on_sense(ev.t, ev.node);
      case Event::Kind::forward: return on_forward(ev.t, ev.node);
      case Event::Kind::arrive: return on_arrive(ev.t, ev.node, ev.packet);
      case Event::Kind::rest_end: return on_rest_end(ev.t, ev.node);
      case Event::Kind::sample: return on_sample(ev.t);
    }
  }

  void maybe_schedule_forward(SimNode& n, double t) {
    if (n.forward_scheduled || n.state.resting_at(t)) return;
    n.forward_scheduled = true;
    schedule(Event{t, 0, Event::Kind::forward, index(n.state.id), {}});
  }

  void on_sense(double t, int node_idx) {
    SimNode& n = nodes_[node_idx];
    const double next = t + cfg_.sensing_period_s;
    if (next <= duration_) {
      schedule(Event{next, 0, Event::Kind::sense, node_idx, {}});
    }
    const double power =
        impinging_power_mw(n.y_cm, n.z_cm, t, cfg_.scene, cell_area_);
    if (power <= 0.0) return;  // zero readings never propagate

    Packet p;
    p.origin = n.state.id;
    p.destination = n.gateway;
    p.power_reading_mw = power;
    p.sensed_at_s = t;
    p.stats.reporter = n.state.id;
    p.id = next_packet_id_++;
    ++generated_;
    emit(t, TraceKind::generate, n.state.id, p.id, {}, p.destination);

    if (enqueue(n.state, std::move(p)) == EnqueueResult::accepted) {
      check_queue_bound(n.state);
      emit(t, TraceKind::enqueue, n.state.id, next_packet_id_ - 1,
           n.state.id, n.gateway);
      maybe_schedule_forward(n, t);
    } else {
      record_loss(t);
      ++overflow_drops_;
      emit(t, TraceKind::overflow, n.state.id, next_packet_id_ - 1,
           n.state.id, n.gateway);
    }
  }

  NeighborTable build_estimates(const SimNode& n, double t) {
    NeighborTable table;
    for (Coord m : neighbors(cfg_.topo, n.state.id)) {
      if (cfg_.topo.is_gateway(m)) continue;
      if (routing_.variant == Variant::ideal) {
        table.put(m, ideal_estimate(nodes_[index(m)].state, t, cfg_.energy));
      } else {
        std::optional<StatsSnapshot> snap;
        const auto it = n.state.neighbor_estimates.find(m);
        if (it != n.state.neighbor_estimates.end()) snap = it->second;
        table.put(m, estimate_neighbor(snap, t, routing_));
      }
    }
    return table;
  }

  void on_forward(double t, int node_idx) {
    SimNode& n = nodes_[node_idx];
    n.forward_scheduled = false;
    if (n.state.resting_at(t) || n.state.queue.empty()) return;

    settle_energy(n.state, t, cfg_.energy);
    check_battery_bound(n.state);

    const NeighborTable estimates = build_estimates(n, t);
    ForwardingOutcome out = forwarding_step(
        n.state, cfg_.topo, routing_, cfg_.energy, t, hop_limit_, estimates);
    check_battery_bound(n.state);

    for (Packet& dropped : out.hop_limit_drops) {
      record_loss(t);
      ++hop_limit_drops_;
      emit(t, TraceKind::hop_limit_drop, n.state.id, dropped.id, {},
           dropped.destination);
    }
    for (Transmission& tx : out.transmissions) {
      emit(t, TraceKind::transmit, n.state.id, tx.packet.id, tx.next_hop,
           tx.packet.destination);
      Event ev;
      ev.t = t + cfg_.link_delay_s;
      ev.kind = Event::Kind::arrive;
      ev.node = index(tx.next_hop);
      ev.packet = std::move(tx.packet);
      schedule(std::move(ev));
    }

    if (out.entered_rest) {
      emit(t, TraceKind::rest_begin, n.state.id, 0, {}, {});
      schedule(Event{*n.state.resting_until_s, 0, Event::Kind::rest_end,
                     node_idx, {}});
    } else if (out.retry_at_s.has_value()) {
      n.forward_scheduled = true;
      schedule(Event{*out.retry_at_s, 0, Event::Kind::forward, node_idx, {}});
    } else if (!n.state.queue.empty()) {
      // Service interval between forwarding batches equals the link slot.
      n.forward_scheduled = true;
      schedule(Event{t + cfg_.link_delay_s, 0, Event::Kind::forward, node_idx,
                     {}});
    }
  }

  void on_arrive(double t, int node_idx, const Packet& packet) {
    SimNode& n = nodes_[node_idx];
    if (n.is_gateway) {
      ++delivered_;
      latency_.add(t - packet.sensed_at_s);
      emit(t, TraceKind::deliver, n.state.id, packet.id, packet.origin,
           packet.destination);
      const SimNode& origin = nodes_[index(packet.origin)];
      Reading r;
      r.origin = packet.origin;
      r.y_cm = origin.y_cm;
      r.z_cm = origin.z_cm;
      r.power_mw = packet.power_reading_mw;
      r.sensed_at_s = packet.sensed_at_s;
      r.delivered_at_s = t;
      server_.add_reading(r);
      if (std::isnan(first_valid_t_) &&
          server_.window_size() >= kMinReadingsForEstimate) {
        first_valid_t_ = t;
      }
      return;
    }

    emit(t, TraceKind::arrive, n.state.id, packet.id, packet.stats.reporter,
         packet.destination);
    // Read the piggybacked status of the sender. A zero battery resets the
    // neighbor to the optimistic defaults.
    if (packet.stats.battery_pj <= 0.0) {
      n.state.neighbor_estimates.erase(packet.stats.reporter);
    } else {
      n.state.neighbor_estimates[packet.stats.reporter] = packet.stats;
    }

    Packet p = packet;
    if (enqueue(n.state, std::move(p)) == EnqueueResult::accepted) {
      check_queue_bound(n.state);
      emit(t, TraceKind::enqueue, n.state.id, packet.id,
           packet.stats.reporter, packet.destination);
      maybe_schedule_forward(n, t);
    } else {
      record_loss(t);
      ++overflow_drops_;
      emit(t, TraceKind::overflow, n.state.id, packet.id,
           packet.stats.reporter, packet.destination);
    }
  }

  void on_rest_end(double t, int node_idx) {
    SimNode& n = nodes_[node_idx];
    if (n.state.resting_until_s.has_value() &&
        *n.state.resting_until_s <= t) {
      n.state.resting_until_s.reset();
    }
    emit(t, TraceKind::rest_end, n.state.id, 0, {}, {});
    if (!n.state.queue.empty()) maybe_schedule_forward(n, t);
  }

  void on_sample(double t) {
    const double next = t + cfg_.metric_sample_period_s;
    if (next <= duration_) {
      schedule(Event{next, 0, Event::Kind::sample, -1, {}});
    }
    emit(t, TraceKind::metric_sample, {}, 0, {}, {});
    // Time-averaging starts once the server estimate first became valid.
    if (std::isnan(first_valid_t_)) return;

    double fraction_sum = 0.0;
    int constrained = 0;
    for (const SimNode& n : nodes_) {
      if (n.is_gateway) continue;
      fraction_sum +=
          battery_at(n.state, t, cfg_.energy) / cfg_.energy.capacity_pj;
      ++constrained;
    }
    if (constrained > 0) {
      battery_fraction_sum_ += fraction_sum / constrained;
      ++battery_samples_;
    }

    const Estimate& est = server_.estimate();
    if (est.valid) {
      const GroundTruth truth = ground_truth(t, cfg_.scene);
      direction_error_sum_ +=
          direction_error_deg(est.direction, truth.incident_direction);
      offset_error_sum_ += offset_error_cm(est.impact_y_cm, est.impact_z_cm,
                                           truth.impact_y_cm,
                                           truth.impact_z_cm);
      ++error_samples_;
    }
  }

  void record_loss(double t) {
    (void)t;
    if (!std::isnan(first_valid_t_)) ++losses_post_valid_;
  }

  void check_battery_bound(const NodeState& s) {
    if (s.battery_pj < -1e-9 ||
        s.battery_pj > cfg_.energy.capacity_pj + 1e-9) {
      throw std::logic_error("battery bound violated at " + to_string(s.id));
    }
  }
  void check_queue_bound(const NodeState& s) {
    if (static_cast<int>(s.queue.size()) > cfg_.queue_capacity) {
      throw std::logic_error("queue bound violated at " + to_string(s.id));
    }
  }

  RunMetrics finalize() {
    RunMetrics m;
    m.generated_count = generated_;
    m.delivered_count = delivered_;
    m.overflow_drops = overflow_drops_;
    m.hop_limit_drops = hop_limit_drops_;
    m.dropped_count = overflow_drops_ + hop_limit_drops_;
    m.latency = latency_;
    m.first_valid_time_s = first_valid_t_;
    m.error_samples = error_samples_;
    m.battery_samples = battery_samples_;
    if (error_samples_ > 0) {
      m.mean_direction_error_deg = direction_error_sum_ / error_samples_;
      m.mean_offset_error_cm = offset_error_sum_ / error_samples_;
    }
    if (battery_samples_ > 0) {
      m.mean_battery_fraction = battery_fraction_sum_ / battery_samples_;
    }

    int constrained = 0;
    for (SimNode& n : nodes_) {
      if (!n.is_gateway) ++constrained;
      m.queued_at_end += n.state.queue.size();
    }
    while (!events_.empty()) {
      if (events_.top().kind == Event::Kind::arrive) ++m.in_flight_at_end;
      events_.pop();
    }
    m.accounting_exact =
        generated_ == m.delivered_count + m.dropped_count + m.queued_at_end +
                          m.in_flight_at_end;

    const double loss_window =
        std::isnan(first_valid_t_) ? duration_ : duration_ - first_valid_t_;
    if (loss_window > 0.0 && constrained > 0) {
      const auto losses =
          std::isnan(first_valid_t_) ? m.dropped_count : losses_post_valid_;
      m.overflow_rate_pps_per_node =
          double(losses) / loss_window / constrained;
    }

    m.max_energy_rel_err = 0.0;
    for (SimNode& n : nodes_) {
      if (n.is_gateway) continue;
      settle_energy(n.state, duration_, cfg_.energy);
      const double expected = cfg_.energy.initial_battery_pj +
                              n.state.harvested_total_pj -
                              n.state.drained_total_pj;
      const double scale = std::max(
          1.0, cfg_.energy.initial_battery_pj + n.state.harvested_total_pj);
      m.max_energy_rel_err =
          std::max(m.max_energy_rel_err,
                   std::abs(expected - n.state.battery_pj) / scale);
      check_battery_bound(n.state);
    }
    m.bounds_ok = true;  // violations throw during the run
    return m;
  }

  RunConfig cfg_;
  TraceFn trace_;
  double duration_;
  int hop_limit_;
  double cell_area_;
  RoutingConfig routing_;
  ServerEstimator server_;

  std::vector<SimNode> nodes_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_packet_id_ = 1;

  std::uint64_t generated_ = 0, delivered_ = 0;
  std::uint64_t overflow_drops_ = 0, hop_limit_drops_ = 0;
  std::uint64_t losses_post_valid_ = 0;
  LatencyStats latency_;
  double first_valid_t_ = std::numeric_limits<double>::quiet_NaN();
  double direction_error_sum_ = 0.0, offset_error_sum_ = 0.0;
  double battery_fraction_sum_ = 0.0;
  int error_samples_ = 0, battery_samples_ = 0;
};

}  // namespace

RunMetrics run(const RunConfig& cfg, const TraceFn& trace) {
  const std::vector<std::string> violations = cfg.validate();
  if (!violations.empty()) {
    std::string joined = "invalid run configuration:";
    for (const std::string& v : violations) joined += "\n  - " + v;
    throw std::invalid_argument(joined);
  }
  Simulation sim(cfg, trace);
  return sim.execute();
}

const SweepCell* SweepResult::find(double period_s, Variant v,
                                   int replication) const {
  for (const SweepCell& c : cells) {
    if (std::abs(c.period_s - period_s) <= 1e-12 && c.variant == v &&
        c.replication == replication) {
      return &c;
    }
  }
  return nullptr;
}

SweepResult sweep(const RunConfig& base, const std::vector<double>& periods,
                  const std::vector<Variant>& variants, int replications,
                  int threads, const TraceFactory& trace_factory) {
  if (replications < 1) {
    throw std::invalid_argument("sweep: replications must be >= 1");
  }
  SweepResult result;
  result.periods = periods;
  result.variants = variants;
  result.replications = replications;
  result.cells.resize(periods.size() * variants.size() * replications);

  std::size_t idx = 0;
  for (double p : periods) {
    for (Variant v : variants) {
      for (int rep = 0; rep < replications; ++rep) {
        SweepCell& cell = result.cells[idx++];
        cell.period_s = p;
        cell.variant = v;
        cell.replication = rep;
        cell.seed = base.seed + static_cast<std::uint64_t>(rep);
      }
    }
  }

  int n_workers = threads > 0
                      ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min<int>(n_workers, static_cast<int>(result.cells.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= result.cells.size() || failed.load()) return;
      SweepCell& cell = result.cells[k];
      try {
        RunConfig cfg = base;
        cfg.sensing_period_s = cell.period_s;
        cfg.routing.variant = cell.variant;
        cfg.seed = cell.seed;
        TraceFn trace;
        if (trace_factory) {
          trace = trace_factory(cell.period_s, cell.variant, cell.replication);
        }
        cell.metrics = run(cfg, trace);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

}  // namespace hypercp
