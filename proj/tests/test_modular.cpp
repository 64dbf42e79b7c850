#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "doctest.h"
#include "sapenum/modular.hpp"

using namespace sapenum;

TEST_CASE("default moduli are 2^62, 2^62-1, 2^62-3 and pairwise coprime") {
  std::vector<Modulus> mods = default_moduli();
  REQUIRE(mods.size() == 3);
  CHECK(mods[0].m == kTwo62);
  CHECK(mods[1].m == kTwo62 - 1);
  CHECK(mods[2].m == kTwo62 - 3);
  for (std::size_t i = 0; i < mods.size(); ++i)
    for (std::size_t j = i + 1; j < mods.size(); ++j) {
      mpz_class g;
      mpz_gcd_ui(g.get_mpz_t(), mpz_class(mods[i].m).get_mpz_t(), mods[j].m);
      CHECK(g == 1);
    }
}

TEST_CASE("modular ops agree with bignum arithmetic on random operands") {
  std::vector<Modulus> mods = default_moduli();
  std::mt19937_64 rng(0x5eed5eedULL);
  for (int iter = 0; iter < 100000; ++iter) {
    for (Modulus mod : mods) {
      std::uint64_t a = rng() % mod.m;
      std::uint64_t b = rng() % mod.m;
      mpz_class za(a), zb(b), zm(mod.m);
      mpz_class add = (za + zb) % zm;
      mpz_class sub = ((za - zb) % zm + zm) % zm;
      mpz_class mul = (za * zb) % zm;
      REQUIRE(mod_add(a, b, mod) == add.get_ui());
      REQUIRE(mod_sub(a, b, mod) == sub.get_ui());
      REQUIRE(mod_mul(a, b, mod) == mul.get_ui());
    }
  }
}

TEST_CASE("mod_reduce handles values at and above the modulus") {
  Modulus m{1000};
  CHECK(mod_reduce(0, m) == 0);
  CHECK(mod_reduce(999, m) == 999);
  CHECK(mod_reduce(1000, m) == 0);
  CHECK(mod_reduce(123456789, m) == 123456789 % 1000);
  Modulus p2{kTwo62};
  CHECK(mod_reduce(kTwo62 + 17, p2) == 17);
  CHECK(mod_mul(kTwo62 - 1, kTwo62 - 1, p2) == 1);
}

TEST_CASE("moduli_cover requires the product to strictly exceed 3^n") {
  CHECK(moduli_cover({Modulus{10}}, 2));
  CHECK_FALSE(moduli_cover({Modulus{9}}, 2));
  CHECK(moduli_cover({Modulus{9}, Modulus{2}}, 2));
  CHECK(moduli_cover(default_moduli(), 66));
  CHECK_FALSE(moduli_cover({Modulus{kTwo62}}, 66));
  CHECK_FALSE(moduli_cover(default_moduli(), 118));
  CHECK(moduli_cover(default_moduli(), 117));
}

TEST_CASE("auto_moduli picks the smallest covering prefix") {
  CHECK(auto_moduli(22).size() == 1);
  CHECK(auto_moduli(39).size() == 1);   // 3^39 < 2^62
  CHECK(auto_moduli(40).size() == 2);   // 3^40 > 2^62
  CHECK(auto_moduli(66).size() == 2);
  CHECK(auto_moduli(117).size() == 3);
  CHECK_THROWS_AS(auto_moduli(118), std::invalid_argument);
}

TEST_CASE("crt reconstructs a known 50-digit count from its residues") {
  const mpz_class p130("17076613429289025223970687974244417384681143572320");
  std::vector<std::pair<std::uint64_t, Modulus>> parts;
  for (Modulus mod : default_moduli()) {
    mpz_class r = p130 % mpz_class(mod.m);
    parts.emplace_back(r.get_ui(), mod);
  }
  CHECK(crt_reconstruct(parts) == p130);
}

TEST_CASE("crt round-trips random integers below the moduli product") {
  std::vector<Modulus> mods = default_moduli();
  gmp_randclass rng(gmp_randinit_default);
  rng.seed(20260816UL);
  mpz_class limit;
  mpz_ui_pow_ui(limit.get_mpz_t(), 10, 50);
  for (int iter = 0; iter < 500; ++iter) {
    mpz_class value = rng.get_z_range(limit);
    std::vector<std::pair<std::uint64_t, Modulus>> parts;
    for (Modulus mod : mods) {
      mpz_class r = value % mpz_class(mod.m);
      parts.emplace_back(r.get_ui(), mod);
    }
    REQUIRE(crt_reconstruct(parts) == value);
  }
}

TEST_CASE("crt rejects malformed input") {
  Modulus m1{kTwo62 - 1};
  CHECK_THROWS_AS(crt_reconstruct({}), std::invalid_argument);
  CHECK_THROWS_AS(crt_reconstruct({{0, Modulus{0}}}), std::invalid_argument);
  CHECK_THROWS_AS(crt_reconstruct({{m1.m, m1}}), std::invalid_argument);
  // 6 and 10 share a factor of 2.
  CHECK_THROWS_WITH_AS(crt_reconstruct({{1, Modulus{6}}, {3, Modulus{10}}}),
                       doctest::Contains("gcd"), std::invalid_argument);
}
