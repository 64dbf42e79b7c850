#pragma once

#include <vector>

#include "sapenum/series.hpp"

namespace sapenum {

// Fit of p_n = mu^n n^{-5/2} (a_0 + a_1/n + ... + a_k/n^k) on a window of
// even perimeters.  a[0] is the amplitude B.
struct AsymptoticFit {
  long double mu = 0;
  int k = 0;
  std::vector<long double> a;
  std::vector<int> window;        // the n used, ascending, k+1 of them
  long double max_residual = 0;   // worst relative defect on the window
};

// Solves the (k+1)x(k+1) linear system on the k+1 largest even n <= n_last.
// The inputs are pre-scaled by mu^{-n} n^{5/2}, and the system is solved in
// the variable n_ref/n to keep it well conditioned.  Throws when the window
// has too few terms or the system is singular.
AsymptoticFit fit_amplitudes(const ExactSeries& series, long double mu, int k,
                             int n_last);

struct AmplitudeRow {
  int n_last;
  int k;
  long double a0;
};

// The (n_last, k, a_0) table across every feasible window end, one row set
// per k in [k_min, k_max].
std::vector<AmplitudeRow> estimate_B_sequence(const ExactSeries& series,
                                              long double mu, int k_min,
                                              int k_max);

struct XcEstimate {
  long double xc2 = 0;
  long double spread = 0;  // max - min across the sample grid
  bool converged = false;
  std::vector<long double> samples;  // one entry per (k, window) combination
};

// Extrapolates the ratio sequence r_n = p_n / p_{n-2} -> 1/x_c^2 through
// fits r_n = b_0 (1 + c_1/n + ...) of several orders and window shifts; the
// scatter across the grid is the sensitivity diagnostic.
XcEstimate estimate_xc2(const ExactSeries& series, int max_k = 7);

// Positive root of 581 y^2 + 7 y - 13, to long double accuracy:
// y = 0.1436806292698685...
long double conjectured_xc2();

// Growth constant matching that root: 1/sqrt(conjectured_xc2()).
long double conjectured_mu();

}  // namespace sapenum
