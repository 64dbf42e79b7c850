#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sapenum/analysis.hpp"
#include "sapenum/modular.hpp"
#include "sapenum/oracle.hpp"
#include "sapenum/series.hpp"
#include "sapenum/tm_engine.hpp"

namespace {

using nlohmann::json;
using namespace sapenum;

std::vector<Modulus> parse_moduli(const std::string& text, int n_max) {
  if (text.empty()) return default_moduli();
  if (text == "auto") return auto_moduli(n_max);
  std::vector<Modulus> mods;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = std::stoull(item, &used);
    if (used != item.size())
      throw std::invalid_argument("bad modulus: " + item);
    mods.push_back(Modulus{v});
  }
  if (mods.empty()) throw std::invalid_argument("empty modulus list");
  return mods;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void write_manifest(const std::string& out_path, const json& manifest) {
  std::ofstream f(out_path + ".manifest.json");
  if (!f)
    throw std::runtime_error("cannot write manifest for " + out_path);
  f << manifest.dump(2) << "\n";
}

json series_json(const ExactSeries& series) {
  json terms = json::array();
  for (const auto& [n, p] : series.terms)
    terms.push_back({n, p.get_str()});
  return terms;
}

json residues_json(const std::vector<ResidueSeries>& residues) {
  json arr = json::array();
  for (const ResidueSeries& r : residues) {
    json terms = json::array();
    for (const auto& [n, v] : r.terms)
      terms.push_back({n, std::to_string(v)});
    arr.push_back({{"modulus", std::to_string(r.modulus.m)},
                   {"terms", std::move(terms)}});
  }
  return arr;
}

void write_series_output(const std::string& path, const ExactSeries& series,
                         const std::vector<std::string>& comments) {
  if (path.empty() || path == "-")
    write_exact_series(std::cout, series, comments);
  else
    write_exact_series_file(path, series, comments);
}

struct EnumerateArgs {
  int wmax = 0;
  std::string moduli;
  int threads = 1;
  bool no_prune = false;
  bool kink_simplify = false;
  std::string checkpoint_dir;
  std::string out = "series.txt";
  std::string format = "text";
  bool force = false;
};

int cmd_enumerate(const EnumerateArgs& a, const std::string& command_line) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_max = 4 * a.wmax - 2;
  std::vector<Modulus> mods = parse_moduli(a.moduli, n_max);

  EnumerateOptions opt;
  opt.pruning = !a.no_prune;
  opt.kink_simplification = a.kink_simplify;
  opt.force = a.force;
  if (!a.checkpoint_dir.empty()) {
    std::filesystem::create_directories(a.checkpoint_dir);
    opt.checkpoint_path =
        (std::filesystem::path(a.checkpoint_dir) / "enumerate.ckpt").string();
  }
  EnumerateResult result = enumerate_polygons(a.wmax, mods, a.threads, opt);
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::vector<std::string> comments = {
      "square lattice self-avoiding polygons by perimeter",
      "wmax " + std::to_string(a.wmax) + ", exact to n = " +
          std::to_string(n_max)};
  if (a.format == "json") {
    json doc = {{"w_max", a.wmax},
                {"n_max", n_max},
                {"series", series_json(result.exact)},
                {"residues", residues_json(result.residues)}};
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot open " + a.out + " for writing");
    f << doc.dump(2) << "\n";
  } else {
    write_series_output(a.out, result.exact, comments);
  }

  {
    std::ofstream rf(a.out + ".residues");
    if (!rf)
      throw std::runtime_error("cannot open " + a.out + ".residues");
    for (const ResidueSeries& r : result.residues)
      write_residue_series(rf, r, {});
  }

  json widths = json::array();
  for (const WidthStats& s : result.stats)
    widths.push_back({{"width", s.width},
                      {"peak_entries", s.peak_entries},
                      {"peak_terms", s.peak_terms},
                      {"seconds", s.seconds}});
  json moduli = json::array();
  for (const Modulus& m : mods) moduli.push_back(std::to_string(m.m));
  write_manifest(a.out,
                 {{"command_line", command_line},
                  {"config",
                   {{"threads", a.threads},
                    {"pruning", !a.no_prune},
                    {"kink_simplification", a.kink_simplify},
                    {"seed_column_only", true},
                    {"checkpoint", opt.checkpoint_path},
                    {"format", a.format},
                    {"force", a.force}}},
                  {"moduli", std::move(moduli)},
                  {"w_max", a.wmax},
                  {"n_max", n_max},
                  {"wall_time_s", wall},
                  {"per_width", std::move(widths)}});
  return 0;
}

struct OracleArgs {
  int nmax = 0;
  int budget = 26;
  int bbox = 0;
  int threads = 1;
  std::string out;
};

int cmd_oracle(const OracleArgs& a, const std::string& command_line) {
  const auto t0 = std::chrono::steady_clock::now();
  ExactSeries series;
  if (a.bbox > 0) {
    for (const auto& [len, part] : brute_force_series_bbox(a.nmax, a.bbox,
                                                           a.budget))
      for (const auto& [n, p] : part.terms) series.terms[n] += p;
  } else {
    series = brute_force_series(a.nmax, a.budget, a.threads);
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::vector<std::string> comments = {
      a.bbox > 0 ? "polygons spanning " + std::to_string(a.bbox) +
                       " rows, by perimeter"
                 : "square lattice self-avoiding polygons by perimeter",
      "direct count to n = " + std::to_string(a.nmax)};
  write_series_output(a.out, series, comments);
  if (!a.out.empty() && a.out != "-")
    write_manifest(a.out, {{"command_line", command_line},
                           {"config",
                            {{"n_max", a.nmax},
                             {"budget", a.budget},
                             {"bbox", a.bbox},
                             {"threads", a.threads}}},
                           {"wall_time_s", wall}});
  return 0;
}

long double parse_mu(const std::string& text) {
  if (text == "conjectured") return conjectured_mu();
  std::size_t used = 0;
  long double mu = std::stold(text, &used);
  if (used != text.size() || !(mu > 1.0L))
    throw std::invalid_argument("bad --mu value: " + text);
  return mu;
}

int cmd_fit_b(const std::string& file, const std::string& mu_text, int k,
              int n_last) {
  ExactSeries series = read_exact_series_file(file);
  int last = n_last;
  if (last == 0)
    for (const auto& [n, p] : series.terms)
      if (n % 2 == 0 && p > 0) last = n;
  AsymptoticFit fit = fit_amplitudes(series, parse_mu(mu_text), k, last);
  std::printf("a0 = %.12Lg\n", fit.a[0]);
  for (std::size_t i = 1; i < fit.a.size(); ++i)
    std::printf("a%zu = %.12Lg\n", i, fit.a[i]);
  return 0;
}

int cmd_estimate_xc(const std::string& file, int max_k) {
  ExactSeries series = read_exact_series_file(file);
  XcEstimate est = estimate_xc2(series, max_k);
  std::printf("xc2 = %.15Lf\n", est.xc2);
  std::printf("spread = %.3Le\n", est.spread);
  std::printf("converged = %s\n", est.converged ? "yes" : "no");
  std::printf("conjectured = %.16Lf\n", conjectured_xc2());
  std::printf("mu = %.15Lf\n", 1.0L / std::sqrt(est.xc2));
  return 0;
}

int cmd_crt(const std::vector<std::string>& files, const std::string& out) {
  std::map<std::uint64_t, ResidueSeries> by_modulus;
  for (const std::string& f : files) {
    for (ResidueSeries& part : read_residue_series_file(f)) {
      auto [it, fresh] = by_modulus.try_emplace(part.modulus.m,
                                                std::move(part));
      if (fresh) continue;
      for (const auto& [n, r] : part.terms) {
        auto [jt, added] = it->second.terms.emplace(n, r);
        if (!added && jt->second != r)
          throw std::runtime_error(
              f + ": conflicting residues at n = " + std::to_string(n) +
              " for modulus " + std::to_string(part.modulus.m));
      }
    }
  }
  std::vector<ResidueSeries> parts;
  parts.reserve(by_modulus.size());
  for (auto& [m, series] : by_modulus) parts.push_back(std::move(series));
  ExactSeries exact = combine_residue_series(parts);
  write_series_output(out, exact, {"reconstructed from residue series"});
  return 0;
}

int cmd_verify(const std::string& file_a, const std::string& file_b) {
  ExactSeries a = read_exact_series_file(file_a);
  ExactSeries b = read_exact_series_file(file_b);
  auto ia = a.terms.begin();
  auto ib = b.terms.begin();
  while (ia != a.terms.end() || ib != b.terms.end()) {
    if (ib == b.terms.end() || (ia != a.terms.end() && ia->first < ib->first)) {
      std::printf("mismatch at n = %d: only in %s\n", ia->first,
                  file_a.c_str());
      return 1;
    }
    if (ia == a.terms.end() || ib->first < ia->first) {
      std::printf("mismatch at n = %d: only in %s\n", ib->first,
                  file_b.c_str());
      return 1;
    }
    if (ia->second != ib->second) {
      std::printf("mismatch at n = %d: %s vs %s\n", ia->first,
                  ia->second.get_str().c_str(), ib->second.get_str().c_str());
      return 1;
    }
    ++ia;
    ++ib;
  }
  std::printf("ok: %zu terms match\n", a.terms.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact enumeration of square lattice self-avoiding polygons"};
  app.require_subcommand(1);

  EnumerateArgs en;
  CLI::App* enumerate = app.add_subcommand(
      "enumerate", "count polygons by perimeter via boundary-line sweeps");
  enumerate->add_option("--wmax", en.wmax, "widest strip to sweep")
      ->required()
      ->check(CLI::Range(2, 30));
  enumerate->add_option("--moduli", en.moduli,
                        "comma-separated moduli, or 'auto'");
  enumerate->add_option("--threads", en.threads, "worker threads")
      ->check(CLI::Range(1, 64));
  enumerate->add_flag("--no-prune", en.no_prune,
                      "keep states that cannot finish within the cutoff");
  enumerate->add_flag("--kink-simplify", en.kink_simplify,
                      "canonicalize the kink's lone loose end");
  enumerate->add_option("--checkpoint", en.checkpoint_dir,
                        "directory for resumable snapshots");
  enumerate->add_option("--out", en.out, "output series file");
  enumerate->add_option("--format", en.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  enumerate->add_flag("--force", en.force,
                      "run even if the moduli cannot bound the counts");

  OracleArgs ora;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "count polygons by direct backtracking search");
  oracle->add_option("--nmax", ora.nmax, "largest perimeter to count")
      ->required()
      ->check(CLI::Range(4, 64));
  oracle->add_option("--budget", ora.budget,
                     "refuse runs beyond this perimeter");
  oracle->add_option("--bbox", ora.bbox,
                     "restrict to polygons spanning this many rows");
  oracle->add_option("--threads", ora.threads, "worker threads")
      ->check(CLI::Range(1, 64));
  oracle->add_option("--out", ora.out, "output series file (default stdout)");

  CLI::App* analyze =
      app.add_subcommand("analyze", "asymptotic fits on a series file");
  analyze->require_subcommand(1);
  std::string fit_file, fit_mu = "conjectured";
  int fit_k = 6, fit_nlast = 0;
  CLI::App* fitb = analyze->add_subcommand(
      "fit-b", "amplitude fit at a fixed growth constant");
  fitb->add_option("file", fit_file, "exact series file")
      ->required()
      ->check(CLI::ExistingFile);
  fitb->add_option("--mu", fit_mu, "growth constant, or 'conjectured'");
  fitb->add_option("--k", fit_k, "correction terms in the fit")
      ->check(CLI::Range(1, 12));
  fitb->add_option("--nlast", fit_nlast, "largest perimeter used (0 = all)");
  std::string xc_file;
  int xc_maxk = 7;
  CLI::App* xc = analyze->add_subcommand(
      "estimate-xc", "squared critical point from ratio extrapolation");
  xc->add_option("file", xc_file, "exact series file")
      ->required()
      ->check(CLI::ExistingFile);
  xc->add_option("--max-k", xc_maxk, "deepest extrapolation order")
      ->check(CLI::Range(3, 10));

  std::vector<std::string> crt_files;
  std::string crt_out;
  CLI::App* crt =
      app.add_subcommand("crt", "reconstruct exact counts from residues");
  crt->add_option("files", crt_files, "residue series files")
      ->required()
      ->check(CLI::ExistingFile);
  crt->add_option("--out", crt_out, "output series file (default stdout)");

  std::vector<std::string> verify_files;
  CLI::App* verify =
      app.add_subcommand("verify", "compare two exact series files");
  verify->add_option("files", verify_files, "two series files")
      ->expected(2)
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (enumerate->parsed())
      return cmd_enumerate(en, join_args(argc, argv));
    if (oracle->parsed()) return cmd_oracle(ora, join_args(argc, argv));
    if (analyze->parsed()) {
      if (fitb->parsed()) return cmd_fit_b(fit_file, fit_mu, fit_k, fit_nlast);
      if (xc->parsed()) return cmd_estimate_xc(xc_file, xc_maxk);
    }
    if (crt->parsed()) return cmd_crt(crt_files, crt_out);
    if (verify->parsed()) return cmd_verify(verify_files[0], verify_files[1]);
  } catch (const ModulusCapacityError& e) {
    std::cerr << "error: " << e.what() << " (pass --force to override)\n";
    return 3;
  } catch (const CheckpointMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
