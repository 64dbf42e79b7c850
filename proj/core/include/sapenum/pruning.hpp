#pragma once

#include <cstdint>
#include <utility>

#include "sapenum/signature.hpp"

namespace sapenum {

// Lower bound on the steps still needed before a partial polygon can be
// counted, split into the four contributions that sum to the total.
struct PruneBound {
  int closure = 0;     // realizing every prescribed connection
  int bottom = 0;      // extra steps to reach the bottom border
  int top = 0;         // extra steps to reach the top border
  int lengthwise = 0;  // extra columns to make the polygon span the width
  int total = 0;

  friend bool operator==(const PruneBound&, const PruneBound&) = default;
};

// Diagnostic costs on raw slot positions (1-based, bottom to top).  These
// are the textbook per-signature quantities; the sweep itself applies
// completion_bound below, which additionally accounts for the kink
// geometry and never overcharges sibling nestings.

// Sum over matched pairs (i, j, nesting level l) of j - i + 2l.
int closure_cost(const Signature& sig);

// (bottom, top): 0 where the border flag is set, otherwise twice the
// distance from the nearest occupied slot to that border.  (0, 0) for a
// fully empty signature.
std::pair<int, int> boundary_cost(const Signature& sig);

// Closed polygons must span columns 1..W before they may be counted.
int lengthwise_cost(int column, int width);

// The bound applied during the sweep, for a state produced by the site at
// (row, column) in a width-wide strip.  Sound: never exceeds the exact
// minimal number of steps of any counted completion.  Slot heights are the
// rows of the loose-end vertices (the kink's vertical edge dangles at
// row+1), connection detours around nested arcs are charged as horizontal
// steps, and the lengthwise component only keeps whatever the detours have
// not already paid for.
PruneBound completion_bound(const Signature& sig, int row, int column,
                            int width);

// Same bound on a packed key (see pack in signature.hpp): allocation-free,
// the form the sweep calls once per emitted state.
PruneBound completion_bound(std::uint64_t key, int n_slots, int row,
                            int column, int width);

// Discard test: a state survives only while min_degree + bound.total stays
// within the series cutoff n_max.  Equality survives.
bool should_prune(std::uint32_t min_degree, const PruneBound& bound,
                  int n_max);

// Highest coefficient degree worth keeping under the same bound; degrees
// above n_max - bound.total can never contribute a reported term.
int degree_cap(const PruneBound& bound, int n_max);

}  // namespace sapenum
