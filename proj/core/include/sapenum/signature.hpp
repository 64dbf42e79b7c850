#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sapenum {

/// State of one boundary-crossing edge. Occupied edges are loop ends whose
/// partner is prescribed by the unique non-crossing pairing: Lower opens a
/// pair, Upper closes it, reading the boundary bottom to top.
enum class EdgeState : std::uint8_t { Empty = 0, Lower = 1, Upper = 2 };

/// Boundary state of a width-W sweep: W+1 crossed edges bottom to top (W
/// horizontal edges plus the kink's vertical edge interleaved at the current
/// row), and two monotone flags recording whether the partial polygon has
/// touched the bottom/top border of the strip.
struct Signature {
  std::vector<EdgeState> edges;
  bool touched_bottom = false;
  bool touched_top = false;

  int size() const { return static_cast<int>(edges.size()); }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// One prescribed connection: edges at 0-based positions lower < upper.
/// level counts the pairs strictly enclosing this one; depth is the longest
/// chain of pairs strictly nested inside it. Both are 0 for an innermost,
/// top-level pair.
struct LoopPair {
  int lower = 0;
  int upper = 0;
  int level = 0;
  int depth = 0;
  friend bool operator==(const LoopPair&, const LoopPair&) = default;
};

using LoopPairing = std::vector<LoopPair>;

/// Builds a signature from a digit string like "1122" (flags default unset).
Signature signature_from_string(const std::string& digits);
std::string signature_to_string(const Signature& sig);

/// True when Lower/Upper states are balanced bottom to top (every Upper has
/// an unmatched Lower below it, none left over).
bool is_balanced(const Signature& sig);

/// Packs a signature into a 64-bit key: 2 bits per edge starting at bit 0,
/// touched_bottom at bit 62, touched_top at bit 63. Requires at most 31
/// edges. The all-empty, flag-free signature packs to 0.
std::uint64_t pack(const Signature& sig);

/// Inverse of pack for a width-W signature (W+1 edges). Throws
/// std::invalid_argument if any 2-bit field holds 3, if bits beyond the
/// edge fields and flags are set, or if the states are unbalanced.
Signature unpack(std::uint64_t key, int width);

/// Matches Lower/Upper states into the unique non-crossing pairing, with
/// nesting levels and depths. Pairs are reported in order of their closing
/// (upper) position. Throws std::invalid_argument when unbalanced.
LoopPairing match_pairs(const Signature& sig);

/// Pairs a freshly inserted loop occupying edges insert_pos and insert_pos+1
/// (both currently Empty) may legally connect to: the innermost pair
/// enclosing the insertion point plus every pair nested directly below it
/// (top-level pairs when no pair encloses the insertion point). Connecting
/// anywhere else would force the prescribed connections to cross.
LoopPairing reachable_loops(const Signature& sig, int insert_pos);

}  // namespace sapenum
