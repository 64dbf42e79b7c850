#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace sapenum {

/// Word-size modulus for residue arithmetic. All residues live in [0, m).
struct Modulus {
  std::uint64_t m = 0;
  friend bool operator==(const Modulus&, const Modulus&) = default;
};

inline constexpr std::uint64_t kTwo62 = std::uint64_t{1} << 62;

/// The default modulus set: 2^62, 2^62-1, 2^62-3. Pairwise coprime, so CRT
/// over all three recovers integers up to ~186 bits.
std::vector<Modulus> default_moduli();

/// Smallest prefix of default_moduli() whose product exceeds 3^n, the a
/// priori bound on the count at perimeter n. Throws if even all three are
/// too small.
std::vector<Modulus> auto_moduli(int n);

/// True if the product of the given moduli exceeds 3^n.
bool moduli_cover(const std::vector<Modulus>& mods, int n);

inline std::uint64_t mod_reduce(std::uint64_t a, Modulus mod) {
  return a >= mod.m ? a % mod.m : a;
}

inline std::uint64_t mod_add(std::uint64_t a, std::uint64_t b, Modulus mod) {
  // a, b < m <= 2^62, so the sum cannot wrap.
  std::uint64_t s = a + b;
  return s >= mod.m ? s - mod.m : s;
}

inline std::uint64_t mod_sub(std::uint64_t a, std::uint64_t b, Modulus mod) {
  return a >= b ? a - b : mod.m - b + a;
}

inline std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b, Modulus mod) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  if (mod.m == kTwo62) return static_cast<std::uint64_t>(p) & (kTwo62 - 1);
  return static_cast<std::uint64_t>(p % mod.m);
}

/// Reconstructs the unique integer in [0, prod(m_i)) with the given residues.
/// Throws std::invalid_argument on an empty list, residues out of range, or
/// moduli that are not pairwise coprime.
mpz_class crt_reconstruct(
    const std::vector<std::pair<std::uint64_t, Modulus>>& residues);

}  // namespace sapenum
