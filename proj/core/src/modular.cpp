#include "sapenum/modular.hpp"

#include <stdexcept>
#include <string>

namespace sapenum {

std::vector<Modulus> default_moduli() {
  return {Modulus{kTwo62}, Modulus{kTwo62 - 1}, Modulus{kTwo62 - 3}};
}

bool moduli_cover(const std::vector<Modulus>& mods, int n) {
  mpz_class product = 1;
  for (const Modulus& mod : mods) product *= mpz_class(mod.m);
  mpz_class bound;
  mpz_ui_pow_ui(bound.get_mpz_t(), 3, static_cast<unsigned long>(n));
  return product > bound;
}

std::vector<Modulus> auto_moduli(int n) {
  std::vector<Modulus> all = default_moduli();
  std::vector<Modulus> picked;
  for (const Modulus& mod : all) {
    picked.push_back(mod);
    if (moduli_cover(picked, n)) return picked;
  }
  throw std::invalid_argument("auto_moduli: 3^" + std::to_string(n) +
                              " exceeds the product of all available moduli");
}

mpz_class crt_reconstruct(
    const std::vector<std::pair<std::uint64_t, Modulus>>& residues) {
  if (residues.empty())
    throw std::invalid_argument("crt_reconstruct: empty residue list");

  // Incremental combination: maintain x mod prod(m_0..m_i) and extend one
  // modulus at a time.
  mpz_class x = 0;
  mpz_class prod = 1;
  for (const auto& [r, mod] : residues) {
    if (mod.m == 0) throw std::invalid_argument("crt_reconstruct: zero modulus");
    if (r >= mod.m)
      throw std::invalid_argument("crt_reconstruct: residue " +
                                  std::to_string(r) + " not reduced mod " +
                                  std::to_string(mod.m));
    mpz_class m(mod.m);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), prod.get_mpz_t(), m.get_mpz_t());
    if (g != 1)
      throw std::invalid_argument(
          "crt_reconstruct: moduli are not pairwise coprime (gcd " +
          g.get_str() + ")");
    // Solve x + prod*t == r (mod m).
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), prod.get_mpz_t(), m.get_mpz_t()) == 0)
      throw std::invalid_argument("crt_reconstruct: modulus not invertible");
    mpz_class t = ((mpz_class(r) - x) * inv) % m;
    if (t < 0) t += m;
    x += prod * t;
    prod *= m;
  }
  return x;
}

}  // namespace sapenum
