#include "hypercp/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace hypercp {

std::string to_string(Coord c) {
  return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
}

int NodeState::queued_for(Coord w) const {
  int n = 0;
  for (const Packet& p : queue) {
    if (p.destination == w) ++n;
  }
  return n;
}

bool GridTopology::is_gateway(Coord c) const {
  return std::binary_search(gateways.begin(), gateways.end(), c);
}

GridTopology GridTopology::make_default(int rows, int cols) {
  GridTopology topo;
  topo.n_rows = rows;
  topo.n_cols = cols;
  const int mid_r = (rows - 1) / 2;
  const int mid_c = (cols - 1) / 2;
  topo.gateways = {Coord{0, mid_c}, Coord{rows - 1, mid_c}, Coord{mid_r, 0},
                   Coord{mid_r, cols - 1}};
  std::sort(topo.gateways.begin(), topo.gateways.end());
  topo.gateways.erase(
      std::unique(topo.gateways.begin(), topo.gateways.end()),
      topo.gateways.end());
  return topo;
}

int manhattan(Coord a, Coord b) {
  return std::abs(a.i - b.i) + std::abs(a.j - b.j);
}

std::vector<Coord> neighbors(const GridTopology& topo, Coord c) {
  if (!topo.in_bounds(c)) {
    throw std::out_of_range("neighbors: cell " + to_string(c) +
                            " outside the grid");
  }
  std::vector<Coord> out;
  out.reserve(4);
  const Coord order[4] = {{c.i - 1, c.j},   // N
                          {c.i + 1, c.j},   // S
                          {c.i, c.j - 1},   // W
                          {c.i, c.j + 1}};  // E
  for (Coord m : order) {
    if (topo.in_bounds(m)) out.push_back(m);
  }
  return out;
}

Coord nearest_gateway(const GridTopology& topo, Coord c) {
  if (!topo.in_bounds(c)) {
    throw std::out_of_range("nearest_gateway: cell " + to_string(c) +
                            " outside the grid");
  }
  if (topo.gateways.empty()) {
    throw std::logic_error("nearest_gateway: topology has no gateways");
  }
  Coord best = topo.gateways.front();
  int best_d = manhattan(c, best);
  for (Coord g : topo.gateways) {
    const int d = manhattan(c, g);
    if (d < best_d) {
      best = g;
      best_d = d;
    }
  }
  return best;
}

EnqueueResult enqueue(NodeState& node, Packet p) {
  if (static_cast<int>(node.queue.size()) >= node.queue_capacity) {
    ++node.overflow_count;
    return EnqueueResult::overflowed;
  }
  node.queue.push_back(std::move(p));
  return EnqueueResult::accepted;
}

}  // namespace hypercp
