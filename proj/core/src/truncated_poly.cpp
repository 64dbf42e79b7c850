#include "sapenum/truncated_poly.hpp"

#include <stdexcept>

namespace sapenum {

TruncatedPoly::TruncatedPoly(Modulus m, int max_deg)
    : modulus(m), max_degree(max_deg) {
  if (max_deg < 0) throw std::invalid_argument("negative degree cap");
  coeffs.assign(static_cast<std::size_t>(max_deg) + 1, 0);
}

TruncatedPoly TruncatedPoly::unit(Modulus m, int max_deg, int degree) {
  TruncatedPoly p(m, max_deg);
  if (degree < 0 || degree > max_deg)
    throw std::invalid_argument("unit degree outside [0, max_degree]");
  p.coeffs[static_cast<std::size_t>(degree)] = mod_reduce(1, m);
  p.min_degree = static_cast<std::uint32_t>(degree);
  return p;
}

std::uint64_t TruncatedPoly::coeff(int degree) const {
  if (degree < 0 || degree > max_degree) return 0;
  return coeffs[static_cast<std::size_t>(degree)];
}

void TruncatedPoly::set_coeff(int degree, std::uint64_t value) {
  if (degree < 0 || degree > max_degree)
    throw std::invalid_argument("degree outside [0, max_degree]");
  coeffs[static_cast<std::size_t>(degree)] = value;
  if (value != 0 && static_cast<std::uint32_t>(degree) < min_degree)
    min_degree = static_cast<std::uint32_t>(degree);
}

TruncatedPoly& add_shifted(TruncatedPoly& target, const TruncatedPoly& source,
                           int k) {
  if (target.modulus != source.modulus)
    throw std::invalid_argument("add_shifted: modulus mismatch");
  if (target.max_degree != source.max_degree)
    throw std::invalid_argument("add_shifted: degree cap mismatch");
  if (k < 0 || k > 2)
    throw std::invalid_argument("add_shifted: shift must be 0, 1 or 2");
  if (source.is_zero()) return target;

  std::uint64_t shifted_min = source.min_degree + static_cast<std::uint32_t>(k);
  if (shifted_min > static_cast<std::uint64_t>(target.max_degree))
    return target;  // every term of x^k*source lands above the cap

  const Modulus m = target.modulus;
  int hi = target.max_degree - k;
  for (int d = static_cast<int>(source.min_degree); d <= hi; ++d)
    target.coeffs[static_cast<std::size_t>(d + k)] = mod_add(
        target.coeffs[static_cast<std::size_t>(d + k)], source.coeffs[static_cast<std::size_t>(d)], m);
  if (shifted_min < target.min_degree)
    target.min_degree = static_cast<std::uint32_t>(shifted_min);
  return target;
}

void truncate_above(TruncatedPoly& p, int degree_cap) {
  if (p.is_zero()) return;
  if (degree_cap < 0) degree_cap = -1;
  for (int d = degree_cap + 1; d <= p.max_degree; ++d)
    p.coeffs[static_cast<std::size_t>(d)] = 0;
  if (static_cast<int>(p.min_degree) > degree_cap) {
    p.min_degree = TruncatedPoly::npos;
    p.coeffs.assign(p.coeffs.size(), 0);
  }
}

}  // namespace sapenum
