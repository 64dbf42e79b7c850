#include "sapenum/signature.hpp"

#include <algorithm>
#include <stdexcept>

namespace sapenum {

Signature signature_from_string(const std::string& digits) {
  Signature sig;
  sig.edges.reserve(digits.size());
  for (char ch : digits) {
    if (ch < '0' || ch > '2')
      throw std::invalid_argument("signature_from_string: bad digit '" +
                                  std::string(1, ch) + "'");
    sig.edges.push_back(static_cast<EdgeState>(ch - '0'));
  }
  return sig;
}

std::string signature_to_string(const Signature& sig) {
  std::string out;
  out.reserve(sig.edges.size());
  for (EdgeState e : sig.edges)
    out.push_back(static_cast<char>('0' + static_cast<int>(e)));
  return out;
}

bool is_balanced(const Signature& sig) {
  int open = 0;
  for (EdgeState e : sig.edges) {
    if (e == EdgeState::Lower) ++open;
    if (e == EdgeState::Upper && open-- == 0) return false;
  }
  return open == 0;
}

std::uint64_t pack(const Signature& sig) {
  if (sig.size() > 31)
    throw std::invalid_argument("pack: signature wider than 31 edges");
  std::uint64_t key = 0;
  for (int i = 0; i < sig.size(); ++i)
    key |= static_cast<std::uint64_t>(sig.edges[i]) << (2 * i);
  if (sig.touched_bottom) key |= std::uint64_t{1} << 62;
  if (sig.touched_top) key |= std::uint64_t{1} << 63;
  return key;
}

Signature unpack(std::uint64_t key, int width) {
  int n_edges = width + 1;
  if (width < 1 || n_edges > 31)
    throw std::invalid_argument("unpack: width out of range");
  Signature sig;
  sig.touched_bottom = (key >> 62) & 1;
  sig.touched_top = (key >> 63) & 1;
  std::uint64_t body = key & ~(std::uint64_t{3} << 62);
  sig.edges.resize(n_edges);
  for (int i = 0; i < n_edges; ++i) {
    std::uint64_t field = (body >> (2 * i)) & 3;
    if (field == 3)
      throw std::invalid_argument("unpack: invalid edge field at position " +
                                  std::to_string(i));
    sig.edges[i] = static_cast<EdgeState>(field);
  }
  if (body >> (2 * n_edges))
    throw std::invalid_argument("unpack: stray bits beyond edge fields");
  if (!is_balanced(sig))
    throw std::invalid_argument("unpack: unbalanced loop ends");
  return sig;
}

LoopPairing match_pairs(const Signature& sig) {
  LoopPairing pairs;
  // Stack of open Lower positions; child_depth[d] is the deepest completed
  // chain seen so far directly inside the pair that is currently open at
  // stack depth d.
  std::vector<int> open;
  std::vector<int> child_depth(sig.edges.size() + 1, -1);
  for (int i = 0; i < sig.size(); ++i) {
    switch (sig.edges[i]) {
      case EdgeState::Empty:
        break;
      case EdgeState::Lower:
        open.push_back(i);
        child_depth[open.size()] = -1;
        break;
      case EdgeState::Upper: {
        if (open.empty())
          throw std::invalid_argument("match_pairs: unmatched upper end at " +
                                      std::to_string(i));
        int sp = static_cast<int>(open.size());
        LoopPair p;
        p.lower = open.back();
        p.upper = i;
        p.level = sp - 1;
        p.depth = child_depth[sp] + 1;
        open.pop_back();
        child_depth[sp - 1] = std::max(child_depth[sp - 1], p.depth);
        pairs.push_back(p);
        break;
      }
    }
  }
  if (!open.empty())
    throw std::invalid_argument("match_pairs: unmatched lower end at " +
                                std::to_string(open.back()));
  return pairs;
}

LoopPairing reachable_loops(const Signature& sig, int insert_pos) {
  if (insert_pos < 0 || insert_pos + 1 >= sig.size())
    throw std::invalid_argument("reachable_loops: insert position out of range");
  if (sig.edges[insert_pos] != EdgeState::Empty ||
      sig.edges[insert_pos + 1] != EdgeState::Empty)
    throw std::invalid_argument("reachable_loops: insertion edges not empty");

  LoopPairing pairs = match_pairs(sig);

  // Innermost enclosing pair of each pair, and of the insertion point.
  // Both inserted edges sit between the same pairs, so enclosure of
  // insert_pos implies enclosure of insert_pos+1.
  auto innermost_around = [&pairs](int lo, int hi) -> int {
    int best = -1;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
      if (pairs[i].lower < lo && pairs[i].upper > hi &&
          (best < 0 || pairs[i].lower > pairs[best].lower))
        best = i;
    return best;
  };
  int enclosing = innermost_around(insert_pos, insert_pos + 1);

  LoopPairing out;
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
    if (i == enclosing ||
        innermost_around(pairs[i].lower, pairs[i].upper) == enclosing)
      out.push_back(pairs[i]);
  }
  std::sort(out.begin(), out.end(),
            [](const LoopPair& a, const LoopPair& b) { return a.lower < b.lower; });
  return out;
}

}  // namespace sapenum
