#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sapenum/modular.hpp"
#include "sapenum/series.hpp"
#include "sapenum/truncated_poly.hpp"

namespace sapenum {

// One strip sweep: sites are visited column by column, bottom to top within
// a column.  The site at (row, column) consumes the kink's vertical edge
// (slot row-1) and the incoming horizontal edge of `row` (slot row), then
// emits the outgoing horizontal edge (slot row-1) and the next vertical
// edge (slot row, absent at row = width).
struct SweepConfig {
  int width = 0;   // W: strip rows, in vertices
  int w_max = 0;   // widest strip of the whole run
  int l_max = 0;   // columns swept: 2*w_max - width + 1
  int n_max = 0;   // series cutoff: 4*w_max - 2
  std::vector<Modulus> moduli;
  bool seed_column_only = true;  // new loops in an empty strip only at column 1
  bool kink_simplification = false;
  bool pruning = true;
  int threads = 1;

  static SweepConfig for_width(int width, int w_max,
                               std::vector<Modulus> moduli);

  // Hash of everything that determines the swept numbers, independent of
  // width (a run covers all widths) and thread count.
  std::uint64_t run_hash() const;
};

// Generating polynomial of one boundary state with all moduli fused:
// degree min_degree + t lives at coeffs[t * n_moduli + j] for modulus j.
// coeffs is never empty for a stored state.
struct StatePoly {
  std::uint32_t min_degree = 0;
  std::vector<std::uint64_t> coeffs;
};

struct KeyHash {
  std::size_t operator()(std::uint64_t key) const {
    key += 0x9e3779b97f4a7c15ULL;
    key = (key ^ (key >> 30)) * 0xbf58476d1ce4e5b9ULL;
    key = (key ^ (key >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(key ^ (key >> 31));
  }
};

using BoundaryStateMap = std::unordered_map<std::uint64_t, StatePoly, KeyHash>;

// Spanning-polygon contributions of one width, keyed by length (the column
// where the polygon closed), one polynomial per modulus.
struct RectangleResult {
  std::map<int, std::vector<TruncatedPoly>> per_length;
};

struct WidthStats {
  int width = 0;
  std::size_t peak_entries = 0;  // largest state-map size over the sweep
  std::size_t peak_terms = 0;    // largest total stored coefficient count
  double seconds = 0;
};

// The single seed entry: all-empty signature, flags unset, polynomial 1.
BoundaryStateMap initial_state(const SweepConfig& config);

// Advances the boundary past the site at (row, column), returning the new
// state map; polygons closed here are added into harvest at L = column.
BoundaryStateMap update_site(const BoundaryStateMap& state, int row,
                             int column, const SweepConfig& config,
                             RectangleResult& harvest);

// Column rollover: re-keys every state for the next column (slots shift up
// one position; the vacated bottom slot is the next column's phantom
// vertical edge).  With seed_column_only, the spent all-empty seed state is
// dropped here.
BoundaryStateMap advance_column(BoundaryStateMap state,
                                const SweepConfig& config);

// Resumable sweep position plus everything accumulated so far: the state
// map and current width's harvest, and the residue series folded from the
// widths already finished (keyed by perimeter, one residue per modulus).
struct CheckpointData {
  int width = 2;
  int next_row = 1;
  int next_column = 1;
  BoundaryStateMap state;
  RectangleResult harvest;
  std::map<int, std::vector<std::uint64_t>> accumulated;
};

// Full sweep of one width.  `resume`, when given, must carry this width.
// on_column fires after each rollover with the freshly shifted state, ready
// to be checkpointed for (next_row=1, next_column).
RectangleResult sweep_width(
    const SweepConfig& config, WidthStats* stats = nullptr,
    const CheckpointData* resume = nullptr,
    const std::function<void(int next_column, const BoundaryStateMap&,
                             const RectangleResult&)>& on_column = {});

struct EnumerateOptions {
  bool pruning = true;
  bool kink_simplification = false;
  bool seed_column_only = true;
  bool force = false;             // run even if the moduli cannot bound p_n
  std::string checkpoint_path;    // empty: no checkpointing
  int checkpoint_columns = 16;    // save every this many columns
};

struct EnumerateResult {
  std::vector<ResidueSeries> residues;  // one per modulus
  ExactSeries exact;                    // CRT-combined
  std::vector<WidthStats> stats;        // one per width
};

// Thrown when the moduli product cannot bound p_n at n = n_max (3^n is the
// a priori ceiling) and force is not set.
class ModulusCapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a checkpoint does not belong to this run configuration.
class CheckpointMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sums spanning counts over every width 2..w_max and length W..L_max
// (lengths beyond the width weighted twice: the transposed rectangles are
// never swept), reconstructs exact counts, and cross-checks redundant
// moduli.  Exact up to perimeter 4*w_max - 2.
EnumerateResult enumerate_polygons(int w_max,
                                   const std::vector<Modulus>& moduli,
                                   int threads,
                                   const EnumerateOptions& options = {});

// Versioned little-endian binary snapshot with a trailing checksum; writes
// are atomic (temp file + rename).  Loading verifies the stored run hash
// against `config` and throws CheckpointMismatch on any difference.
void checkpoint_save(const std::string& path, const SweepConfig& config,
                     const CheckpointData& data);
CheckpointData checkpoint_load(const std::string& path,
                               const SweepConfig& config);

}  // namespace sapenum
