#include "sapenum/series.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sapenum {

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

// Strips comments/blanks; returns false for lines with no payload.
bool payload(const std::string& raw, std::string& out) {
  std::string s = raw.substr(0, raw.find('#'));
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return false;
  out = s.substr(b);
  return true;
}

void check_index(const std::string& name, int line, int n, int prev_n) {
  if (n < 0) parse_fail(name, line, "negative perimeter");
  if (n % 2 != 0)
    parse_fail(name, line, "odd perimeter " + std::to_string(n));
  if (n == prev_n)
    parse_fail(name, line, "duplicate perimeter " + std::to_string(n));
  if (n < prev_n)
    parse_fail(name, line,
               "perimeter " + std::to_string(n) + " out of order");
}

}  // namespace

void write_exact_series(std::ostream& out, const ExactSeries& series,
                        const std::vector<std::string>& comments) {
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (const auto& [n, p] : series.terms) out << n << " " << p << "\n";
}

ExactSeries read_exact_series(std::istream& in, const std::string& name) {
  ExactSeries series;
  std::string raw, body;
  int line = 0, prev_n = -1;
  while (std::getline(in, raw)) {
    ++line;
    if (!payload(raw, body)) continue;
    std::istringstream fields(body);
    long long n;
    std::string value, extra;
    if (!(fields >> n >> value) || (fields >> extra))
      parse_fail(name, line, "expected `n p_n`");
    check_index(name, line, static_cast<int>(n), prev_n);
    mpz_class p;
    if (p.set_str(value, 10) != 0 || p < 0)
      parse_fail(name, line, "bad count `" + value + "`");
    series.terms[static_cast<int>(n)] = p;
    prev_n = static_cast<int>(n);
  }
  return series;
}

void write_exact_series_file(const std::string& path,
                             const ExactSeries& series,
                             const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_exact_series(out, series, comments);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ExactSeries read_exact_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_exact_series(in, path);
}

void write_residue_series(std::ostream& out, const ResidueSeries& series,
                          const std::vector<std::string>& comments) {
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (const auto& [n, r] : series.terms)
    out << n << " " << r << " " << series.modulus.m << "\n";
}

std::vector<ResidueSeries> read_residue_series(std::istream& in,
                                               const std::string& name) {
  std::vector<ResidueSeries> parts;
  std::string raw, body;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!payload(raw, body)) continue;
    std::istringstream fields(body);
    long long n;
    unsigned long long residue, modulus;
    std::string extra;
    if (!(fields >> n >> residue >> modulus) || (fields >> extra))
      parse_fail(name, line, "expected `n residue modulus`");
    if (modulus == 0) parse_fail(name, line, "zero modulus");
    if (residue >= modulus) parse_fail(name, line, "residue >= modulus");
    ResidueSeries* part = nullptr;
    for (ResidueSeries& p : parts)
      if (p.modulus.m == modulus) part = &p;
    if (!part) {
      parts.push_back(ResidueSeries{Modulus{modulus}, {}});
      part = &parts.back();
    }
    int prev_n = part->terms.empty() ? -1 : part->terms.rbegin()->first;
    check_index(name, line, static_cast<int>(n), prev_n);
    part->terms[static_cast<int>(n)] = residue;
  }
  return parts;
}

void write_residue_series_file(const std::string& path,
                               const ResidueSeries& series,
                               const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_residue_series(out, series, comments);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResidueSeries> read_residue_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_residue_series(in, path);
}

ExactSeries combine_residue_series(const std::vector<ResidueSeries>& parts) {
  if (parts.empty()) throw std::invalid_argument("no residue series given");
  for (const ResidueSeries& p : parts)
    if (p.terms.size() != parts.front().terms.size())
      throw std::invalid_argument("residue series support mismatch");
  ExactSeries series;
  for (const auto& [n, r0] : parts.front().terms) {
    std::vector<std::pair<std::uint64_t, Modulus>> residues;
    residues.reserve(parts.size());
    for (const ResidueSeries& p : parts) {
      auto it = p.terms.find(n);
      if (it == p.terms.end())
        throw std::invalid_argument("perimeter " + std::to_string(n) +
                                    " missing from modulus " +
                                    std::to_string(p.modulus.m));
      residues.emplace_back(it->second, p.modulus);
    }
    series.terms[n] = crt_reconstruct(residues);
  }
  return series;
}

ResidueSeries reduce_series(const ExactSeries& series, Modulus m) {
  ResidueSeries out{m, {}};
  mpz_class mm(m.m);
  for (const auto& [n, p] : series.terms) {
    mpz_class r = p % mm;
    out.terms[n] = r.get_ui();
  }
  return out;
}

}  // namespace sapenum
