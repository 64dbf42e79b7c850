#include "sapenum/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace sapenum {

namespace {

long double to_ld(const mpz_class& v) {
  // Round-trips through decimal: exact to the 64-bit mantissa, which a
  // direct mpz_get_d (53 bits) would not be.
  return strtold(v.get_str().c_str(), nullptr);
}

// Solves sum_j c_j x_i^j = y_i by Gaussian elimination, partial pivoting.
std::vector<long double> solve_vandermonde(const std::vector<long double>& xs,
                                           const std::vector<long double>& ys) {
  std::size_t m = xs.size();
  std::vector<std::vector<long double>> a(m,
                                          std::vector<long double>(m + 1, 0));
  for (std::size_t i = 0; i < m; ++i) {
    long double p = 1;
    for (std::size_t j = 0; j < m; ++j, p *= xs[i]) a[i][j] = p;
    a[i][m] = ys[i];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (fabsl(a[r][col]) > fabsl(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    if (a[col][col] == 0)
      throw std::runtime_error("degenerate fit window: singular system");
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      long double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= m; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<long double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = a[i][m] / a[i][i];
  return c;
}

std::vector<int> even_support(const ExactSeries& series) {
  std::vector<int> ns;
  for (const auto& [n, p] : series.terms)
    if (n % 2 == 0 && n > 0 && p > 0) ns.push_back(n);
  return ns;
}

}  // namespace

AsymptoticFit fit_amplitudes(const ExactSeries& series, long double mu, int k,
                             int n_last) {
  if (mu <= 0) throw std::invalid_argument("fit_amplitudes: mu must be > 0");
  if (k < 0) throw std::invalid_argument("fit_amplitudes: negative order");
  std::vector<int> ns = even_support(series);
  while (!ns.empty() && ns.back() > n_last) ns.pop_back();
  if (static_cast<int>(ns.size()) < k + 1)
    throw std::invalid_argument(
        "fit_amplitudes: window ending at " + std::to_string(n_last) +
        " has fewer than " + std::to_string(k + 1) + " terms");
  ns.erase(ns.begin(), ns.end() - (k + 1));

  AsymptoticFit fit;
  fit.mu = mu;
  fit.k = k;
  fit.window = ns;

  long double n_ref = ns.back();
  std::vector<long double> xs, ys;
  for (int n : ns) {
    xs.push_back(n_ref / n);
    ys.push_back(to_ld(series.terms.at(n)) * powl(mu, -n) * powl(n, 2.5L));
  }
  std::vector<long double> c = solve_vandermonde(xs, ys);

  fit.a.resize(c.size());
  long double scale = 1;
  for (std::size_t j = 0; j < c.size(); ++j, scale *= n_ref)
    fit.a[j] = c[j] * scale;

  for (std::size_t i = 0; i < xs.size(); ++i) {
    long double model = 0, p = 1;
    for (std::size_t j = 0; j < c.size(); ++j, p *= xs[i]) model += c[j] * p;
    fit.max_residual =
        std::max(fit.max_residual, fabsl(model - ys[i]) / fabsl(ys[i]));
  }
  return fit;
}

std::vector<AmplitudeRow> estimate_B_sequence(const ExactSeries& series,
                                              long double mu, int k_min,
                                              int k_max) {
  std::vector<AmplitudeRow> rows;
  std::vector<int> ns = even_support(series);
  for (int k = k_min; k <= k_max; ++k)
    for (std::size_t i = static_cast<std::size_t>(std::max(k, 0)); i < ns.size(); ++i) {
      AsymptoticFit fit = fit_amplitudes(series, mu, k, ns[i]);
      rows.push_back({ns[i], k, fit.a[0]});
    }
  return rows;
}

XcEstimate estimate_xc2(const ExactSeries& series, int max_k) {
  std::vector<int> ns = even_support(series);
  if (ns.size() < 12)
    throw std::invalid_argument("estimate_xc2: need at least 12 even terms");

  // Ratio points (n, p_n / p_{n-2}) for consecutive even perimeters.
  std::vector<long double> rn, rv;
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] - ns[i - 1] != 2) continue;
    rn.push_back(ns[i]);
    rv.push_back(to_ld(series.terms.at(ns[i])) /
                 to_ld(series.terms.at(ns[i - 1])));
  }

  XcEstimate est;
  bool all_valid = true;
  long double lo = 0, hi = 0;
  for (int k = 3; k <= max_k; ++k) {
    for (int shift = 0; shift <= 2; ++shift) {
      int m = k + 1;
      int end = static_cast<int>(rn.size()) - shift;
      if (end < m) continue;
      long double n_ref = rn[static_cast<std::size_t>(end - 1)];
      std::vector<long double> xs, ys;
      for (int i = end - m; i < end; ++i) {
        xs.push_back(n_ref / rn[static_cast<std::size_t>(i)]);
        ys.push_back(rv[static_cast<std::size_t>(i)]);
      }
      long double sample = 0;
      bool valid = false;
      try {
        std::vector<long double> c = solve_vandermonde(xs, ys);
        // c[0] is the ratio extrapolated to n = infinity, i.e. 1/x_c^2.
        if (std::isfinite(c[0]) && c[0] > 0) {
          sample = 1.0L / c[0];
          valid = true;
        }
      } catch (const std::runtime_error&) {
      }
      if (!valid) {
        all_valid = false;
        continue;
      }
      if (est.samples.empty()) {
        lo = hi = sample;
      } else {
        lo = std::min(lo, sample);
        hi = std::max(hi, sample);
      }
      est.samples.push_back(sample);
      if (k == max_k && shift == 0) est.xc2 = sample;
    }
  }
  if (est.samples.empty())
    throw std::runtime_error("estimate_xc2: no fit window converged");
  if (est.xc2 == 0) est.xc2 = est.samples.back();
  est.spread = hi - lo;
  est.converged = all_valid && est.spread < 1e-4L;
  return est;
}

long double conjectured_xc2() {
  // Positive root of 581 y^2 + 7 y - 13, Newton-polished.
  long double y = (-7.0L + sqrtl(7.0L * 7 + 4.0L * 581 * 13)) / (2.0L * 581);
  for (int i = 0; i < 3; ++i) {
    long double f = (581.0L * y + 7) * y - 13;
    long double df = 2.0L * 581 * y + 7;
    y -= f / df;
  }
  return y;
}

long double conjectured_mu() { return 1.0L / sqrtl(conjectured_xc2()); }

}  // namespace sapenum
