#include "sapenum/oracle.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sapenum {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

struct BoxCounts {
  std::map<std::pair<int, int>, std::vector<std::uint64_t>> table;
};

// Walk state: current vertex, edges used, bounding box so far.  The least
// vertex is the origin, so x >= 0 everywhere and y >= 0 on the x = 0 line;
// the closing edge is the arrival at (0,1).
struct Dfs {
  int n_max;
  int y_off;
  int y_dim;
  std::vector<char> visited;
  std::vector<std::uint64_t> counts;  // by perimeter
  BoxCounts* boxes = nullptr;

  explicit Dfs(int n, BoxCounts* b = nullptr)
      : n_max(n),
        y_off(n + 1),
        y_dim(2 * n + 3),
        visited(static_cast<std::size_t>(n + 2) * y_dim, 0),
        counts(static_cast<std::size_t>(n) + 1, 0),
        boxes(b) {}

  char& mark(int x, int y) {
    return visited[static_cast<std::size_t>(x) * y_dim + y + y_off];
  }

  void close(int len, int max_x, int min_y, int max_y) {
    int n = len + 2;
    counts[n] += 1;
    if (boxes) {
      std::pair<int, int> box{std::max(max_y, 1) - std::min(min_y, 0) + 1,
                              max_x + 1};
      auto& row = boxes->table[box];
      if (row.empty()) row.assign(static_cast<std::size_t>(n_max) + 1, 0);
      row[n] += 1;
    }
  }

  void run(int x, int y, int len, int max_x, int min_y, int max_y) {
    for (int dir = 0; dir < 4; ++dir) {
      int nx = x + kDx[dir], ny = y + kDy[dir];
      if (nx < 0 || (nx == 0 && ny < 0)) continue;
      if (nx == 0 && ny == 1) {
        if (len + 2 <= n_max) close(len, max_x, min_y, max_y);
        continue;
      }
      // Closing still needs the walk back to (0,1) plus the final edge.
      if (nx + std::abs(ny - 1) + len + 2 > n_max) continue;
      if (mark(nx, ny)) continue;
      mark(nx, ny) = 1;
      run(nx, ny, len + 1, std::max(max_x, nx), std::min(min_y, ny),
          std::max(max_y, ny));
      mark(nx, ny) = 0;
    }
  }
};

void check_budget(const char* who, int n_max, int budget) {
  if (n_max <= budget) return;
  std::ostringstream msg;
  msg << who << ": n_max=" << n_max << " exceeds the budget of " << budget
      << " (expected work ~ 2.64^" << n_max << " = " << std::scientific
      << std::pow(2.64, n_max) << " node visits); raise the budget to force";
  throw std::runtime_error(msg.str());
}

// Walks of exactly `depth` edges, recorded as step-direction strings, each
// the root of an independent subtree.  Closures hit while expanding are
// counted into `dfs` directly.
void collect_prefixes(Dfs& dfs, int x, int y, int len, int depth,
                      std::vector<signed char>& steps,
                      std::vector<std::vector<signed char>>& out) {
  if (len == depth) {
    out.push_back(steps);
    return;
  }
  for (int dir = 0; dir < 4; ++dir) {
    int nx = x + kDx[dir], ny = y + kDy[dir];
    if (nx < 0 || (nx == 0 && ny < 0)) continue;
    if (nx == 0 && ny == 1) {
      if (len + 2 <= dfs.n_max) dfs.close(len, 0, 0, 0);
      continue;
    }
    if (nx + std::abs(ny - 1) + len + 2 > dfs.n_max) continue;
    if (dfs.mark(nx, ny)) continue;
    dfs.mark(nx, ny) = 1;
    steps.push_back(static_cast<signed char>(dir));
    collect_prefixes(dfs, nx, ny, len + 1, depth, steps, out);
    steps.pop_back();
    dfs.mark(nx, ny) = 0;
  }
}

std::vector<std::uint64_t> count_series(int n_max, int threads) {
  if (threads <= 1) {
    Dfs dfs(n_max);
    dfs.mark(0, 0) = 1;
    dfs.mark(1, 0) = 1;
    dfs.run(1, 0, 1, 1, 0, 0);
    return dfs.counts;
  }

  // Deterministic parallel split: enumerate fixed-depth prefixes once,
  // hand each subtree to a worker, merge counts in worker order.
  int depth = std::min(10, std::max(1, n_max - 4));
  Dfs root(n_max);
  root.mark(0, 0) = 1;
  root.mark(1, 0) = 1;
  std::vector<std::vector<signed char>> prefixes;
  std::vector<signed char> steps;
  collect_prefixes(root, 1, 0, 1, depth, steps, prefixes);

  std::vector<std::vector<std::uint64_t>> partial(
      static_cast<std::size_t>(threads));
  std::atomic<std::size_t> next{0};
  auto worker = [&](int t) {
    Dfs dfs(n_max);
    dfs.mark(0, 0) = 1;
    dfs.mark(1, 0) = 1;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= prefixes.size()) break;
      int x = 1, y = 0, max_x = 1, min_y = 0, max_y = 0;
      for (signed char dir : prefixes[i]) {
        x += kDx[dir];
        y += kDy[dir];
        dfs.mark(x, y) = 1;
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
      dfs.run(x, y, 1 + static_cast<int>(prefixes[i].size()), max_x, min_y,
              max_y);
      x = 1;
      y = 0;
      for (signed char dir : prefixes[i]) {
        x += kDx[dir];
        y += kDy[dir];
        dfs.mark(x, y) = 0;
      }
    }
    partial[t] = std::move(dfs.counts);
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  for (std::thread& th : pool) th.join();

  std::vector<std::uint64_t> counts = std::move(root.counts);
  for (const auto& p : partial)
    for (std::size_t n = 0; n < p.size(); ++n) counts[n] += p[n];
  return counts;
}

ExactSeries to_series(const std::vector<std::uint64_t>& counts, int n_max) {
  ExactSeries series;
  for (int n = 4; n <= n_max; n += 2)
    series.terms[n] = mpz_class(counts[static_cast<std::size_t>(n)]);
  return series;
}

}  // namespace

ExactSeries brute_force_series(int n_max, int budget, int threads) {
  check_budget("brute_force_series", n_max, budget);
  if (n_max < 4) return {};
  return to_series(count_series(n_max, threads), n_max);
}

std::map<std::pair<int, int>, ExactSeries> brute_force_bbox_table(int n_max,
                                                                  int budget) {
  check_budget("brute_force_bbox_table", n_max, budget);
  std::map<std::pair<int, int>, ExactSeries> out;
  if (n_max < 4) return out;
  BoxCounts boxes;
  Dfs dfs(n_max, &boxes);
  dfs.mark(0, 0) = 1;
  dfs.mark(1, 0) = 1;
  dfs.run(1, 0, 1, 1, 0, 0);
  for (const auto& [box, row] : boxes.table) {
    ExactSeries series;
    for (int n = 4; n <= n_max; n += 2)
      if (row[static_cast<std::size_t>(n)])
        series.terms[n] = mpz_class(row[static_cast<std::size_t>(n)]);
    out[box] = std::move(series);
  }
  return out;
}

std::map<int, ExactSeries> brute_force_series_bbox(int n_max, int width,
                                                   int budget) {
  std::map<int, ExactSeries> out;
  for (auto& [box, series] : brute_force_bbox_table(n_max, budget))
    if (box.first == width) out[box.second] = std::move(series);
  return out;
}

}  // namespace sapenum
