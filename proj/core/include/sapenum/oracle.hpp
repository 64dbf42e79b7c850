#pragma once

#include <map>
#include <utility>

#include "sapenum/series.hpp"

namespace sapenum {

// Ground-truth counts by backtracking.  Each polygon is generated exactly
// once: anchored so its lexicographically least vertex (left-most, then
// bottom-most) is the origin, whose two polygon edges necessarily point
// East and North; the walk starts with the East edge and closes on
// arriving at (0,1).  Runtime grows like 2.64^n, hence the budget guard:
// n_max beyond it throws with a cost estimate instead of hanging.
ExactSeries brute_force_series(int n_max, int budget = 26, int threads = 1);

// Same counting keyed by the exact bounding box (rows x cols, in vertices).
std::map<std::pair<int, int>, ExactSeries> brute_force_bbox_table(
    int n_max, int budget = 26);

// Restriction of the table to boxes spanning `width` rows: cols -> series.
std::map<int, ExactSeries> brute_force_series_bbox(int n_max, int width,
                                                   int budget = 26);

}  // namespace sapenum
