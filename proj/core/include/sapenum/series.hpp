#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "sapenum/modular.hpp"

namespace sapenum {

// Exact polygon counts by perimeter.  Only even perimeters can occur, so the
// map holds even keys only; absent keys are zero.
struct ExactSeries {
  std::map<int, mpz_class> terms;

  bool operator==(const ExactSeries&) const = default;
};

// Counts reduced mod one modulus, same keying as ExactSeries.
struct ResidueSeries {
  Modulus modulus;
  std::map<int, std::uint64_t> terms;

  bool operator==(const ResidueSeries&) const = default;
};

// Text formats.  Exact series: one `n p_n` pair per line, even n, strictly
// ascending, '#' starts a comment.  Residue series: `n residue modulus`
// lines under the same rules; one file may interleave several moduli.
// Parse failures throw std::runtime_error tagged "<name>:<line>: ...".

void write_exact_series(std::ostream& out, const ExactSeries& series,
                        const std::vector<std::string>& comments = {});
ExactSeries read_exact_series(std::istream& in, const std::string& name);
void write_exact_series_file(const std::string& path, const ExactSeries& series,
                             const std::vector<std::string>& comments = {});
ExactSeries read_exact_series_file(const std::string& path);

void write_residue_series(std::ostream& out, const ResidueSeries& series,
                          const std::vector<std::string>& comments = {});
std::vector<ResidueSeries> read_residue_series(std::istream& in,
                                               const std::string& name);
void write_residue_series_file(const std::string& path,
                               const ResidueSeries& series,
                               const std::vector<std::string>& comments = {});
std::vector<ResidueSeries> read_residue_series_file(const std::string& path);

// CRT across per-modulus series sharing the same support.  Every n present in
// any input must be present in all of them; moduli must be pairwise coprime.
ExactSeries combine_residue_series(const std::vector<ResidueSeries>& parts);

// series reduced mod m.
ResidueSeries reduce_series(const ExactSeries& series, Modulus m);

}  // namespace sapenum
