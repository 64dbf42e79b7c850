#include "sapenum/pruning.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sapenum {

int closure_cost(const Signature& sig) {
  int cost = 0;
  for (const LoopPair& p : match_pairs(sig))
    cost += (p.upper - p.lower) + 2 * p.level;
  return cost;
}

std::pair<int, int> boundary_cost(const Signature& sig) {
  int lo = -1, hi = -1;
  for (int i = 0; i < sig.size(); ++i)
    if (sig.edges[i] != EdgeState::Empty) {
      if (lo < 0) lo = i;
      hi = i;
    }
  if (lo < 0) return {0, 0};
  int bottom = sig.touched_bottom ? 0 : 2 * lo;
  int top = sig.touched_top ? 0 : 2 * (sig.size() - 1 - hi);
  return {bottom, top};
}

int lengthwise_cost(int column, int width) {
  return 2 * std::max(0, width - column);
}

PruneBound completion_bound(const Signature& sig, int row, int column,
                            int width) {
  return completion_bound(pack(sig), sig.size(), row, column, width);
}

PruneBound completion_bound(std::uint64_t key, int n_slots, int row,
                            int column, int width) {
  // Slot idx holds, after the site at (row, column):
  //   idx <= row-1  outgoing horizontal edge of row idx+1, loose end in
  //                 column column+1            ("low" slots)
  //   idx == row    the kink's vertical edge, loose end at row+1, column
  //   idx >= row+1  incoming horizontal edge of row idx, column
  // Heights are the loose-end rows; low slots are the only ends already
  // reaching past the current column.
  //
  // One bottom-to-top pass.  For each matched pair, delta is how many
  // columns past `column` its connecting arc provably reaches: at least 1
  // when either end dangles in column+1, and one more than the deepest arc
  // nested inside it (an arc cannot thread through the one that it must
  // enclose).  The horizontal charge follows from delta and the parity of
  // the end columns.
  struct OpenPair {
    int lower;
    int max_child_delta;
  };
  OpenPair open[32];
  int sp = 0;
  int spans = 0, nest = 0;
  int h_min = std::numeric_limits<int>::max(), h_max = 0;
  bool any_low = false, any = false;

  for (int idx = 0; idx < n_slots; ++idx) {
    unsigned s = (key >> (2 * idx)) & 3u;
    if (s == 0) continue;
    int h = idx <= row ? idx + 1 : idx;
    bool low = idx <= row - 1;
    any = true;
    any_low = any_low || low;
    h_min = std::min(h_min, h);
    h_max = std::max(h_max, h);
    if (s == 1) {
      open[sp++] = {idx, -1};
      continue;
    }
    if (sp == 0)
      throw std::invalid_argument("completion_bound: unbalanced signature");
    OpenPair p = open[--sp];
    bool lower_low = p.lower <= row - 1;
    int lower_h = p.lower <= row ? p.lower + 1 : p.lower;
    int base_delta = (lower_low || low) ? 1 : 0;
    int delta = std::max(base_delta, p.max_child_delta + 1);
    spans += h - lower_h;
    if (lower_low && low)
      nest += 2 * (delta - 1);
    else if (lower_low)
      nest += 2 * delta - 1;  // ends one column apart: odd step count
    else
      nest += 2 * delta;
    if (sp > 0)
      open[sp - 1].max_child_delta =
          std::max(open[sp - 1].max_child_delta, delta);
  }
  if (sp != 0)
    throw std::invalid_argument("completion_bound: unbalanced signature");

  PruneBound bound;
  if (!any) return bound;

  bound.closure = spans + nest;
  bound.bottom = (key >> 62) & 1 ? 0 : 2 * (h_min - 1);
  bound.top = (key >> 63) & 1 ? 0 : 2 * (width - h_max);
  int crossings = any_low ? 2 * std::max(0, width - column - 1)
                          : 2 * std::max(0, width - column);
  bound.lengthwise = std::max(0, crossings - nest);
  bound.total = bound.closure + bound.bottom + bound.top + bound.lengthwise;
  return bound;
}

bool should_prune(std::uint32_t min_degree, const PruneBound& bound,
                  int n_max) {
  if (min_degree == std::numeric_limits<std::uint32_t>::max()) return true;
  return min_degree + static_cast<std::uint64_t>(bound.total) >
         static_cast<std::uint64_t>(n_max);
}

int degree_cap(const PruneBound& bound, int n_max) {
  return n_max - bound.total;
}

}  // namespace sapenum
