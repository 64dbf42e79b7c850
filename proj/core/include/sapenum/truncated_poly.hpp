#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sapenum/modular.hpp"

namespace sapenum {

// Polynomial over Z_m with every degree above a fixed cap dropped on entry.
// Coefficients are stored densely from degree 0.  min_degree is exact
// bookkeeping carried alongside the residues: a residue can vanish mod m
// while the underlying count is nonzero, so the minimum degree can never be
// recovered from the coefficient array and must be tracked structurally.
struct TruncatedPoly {
  static constexpr std::uint32_t npos =
      std::numeric_limits<std::uint32_t>::max();

  Modulus modulus;
  int max_degree = 0;
  std::uint32_t min_degree = npos;    // npos marks the zero polynomial
  std::vector<std::uint64_t> coeffs;  // size max_degree+1, index = degree

  TruncatedPoly() = default;
  TruncatedPoly(Modulus m, int max_deg);

  // 1 at the given degree, 0 elsewhere.
  static TruncatedPoly unit(Modulus m, int max_deg, int degree);

  bool is_zero() const { return min_degree == npos; }
  std::uint64_t coeff(int degree) const;

  // value must already be reduced mod m; lowers min_degree when needed.
  void set_coeff(int degree, std::uint64_t value);

  bool operator==(const TruncatedPoly&) const = default;
};

// target += x^k * source, degrees above target.max_degree dropped.
// k is the number of steps added by one site update, so only 0, 1, 2.
TruncatedPoly& add_shifted(TruncatedPoly& target, const TruncatedPoly& source,
                           int k);

// Drop every coefficient above degree_cap.  min_degree only ever rises.
void truncate_above(TruncatedPoly& p, int degree_cap);

}  // namespace sapenum
