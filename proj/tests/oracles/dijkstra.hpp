#pragma once

// Plain Dijkstra over a 4-connected grid with unit step costs.

#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace oracle {

/// `blocked` is row-major rows×cols; returns steps from any source to goal.
inline std::optional<int> grid_dijkstra(const std::vector<unsigned char>& blocked, int rows, int cols,
                                        const std::vector<std::pair<int, int>>& sources, std::pair<int, int> goal) {
  auto id = [&](int r, int c) { return r * cols + c; };
  if (blocked[id(goal.first, goal.second)]) return std::nullopt;
  std::vector<int> dist(static_cast<std::size_t>(rows * cols), std::numeric_limits<int>::max());
  using Item = std::pair<int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto [r, c] : sources) {
    if (blocked[id(r, c)]) continue;
    dist[id(r, c)] = 0;
    pq.push({0, id(r, c)});
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    const int r = u / cols, c = u % cols;
    const int nbr[4][2] = {{r + 1, c}, {r - 1, c}, {r, c + 1}, {r, c - 1}};
    for (auto& n : nbr) {
      if (n[0] < 0 || n[0] >= rows || n[1] < 0 || n[1] >= cols) continue;
      const int v = id(n[0], n[1]);
      if (blocked[v] || d + 1 >= dist[v]) continue;
      dist[v] = d + 1;
      pq.push({d + 1, v});
    }
  }
  const int g = dist[id(goal.first, goal.second)];
  if (g == std::numeric_limits<int>::max()) return std::nullopt;
  return g;
}

}  // namespace oracle
