#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sapenum/oracle.hpp"
#include "sapenum/signature.hpp"
#include "sapenum/tm_engine.hpp"

using namespace sapenum;

namespace {

constexpr std::uint64_t FB = std::uint64_t{1} << 62;
constexpr std::uint64_t FT = std::uint64_t{1} << 63;

const std::vector<Modulus> kOne{Modulus{kTwo62 - 1}};

struct Entry {
  std::uint64_t key;
  std::uint32_t min_degree;
  std::vector<std::uint64_t> coeffs;
};

void expect_state(const BoundaryStateMap& state,
                  const std::vector<Entry>& want) {
  REQUIRE(state.size() == want.size());
  for (const Entry& e : want) {
    auto it = state.find(e.key);
    REQUIRE(it != state.end());
    REQUIRE(it->second.min_degree == e.min_degree);
    REQUIRE(it->second.coeffs == e.coeffs);
  }
}

}  // namespace

TEST_CASE("for_width fills the derived fields and validates input") {
  SweepConfig cfg = SweepConfig::for_width(3, 5, kOne);
  CHECK(cfg.width == 3);
  CHECK(cfg.w_max == 5);
  CHECK(cfg.l_max == 8);
  CHECK(cfg.n_max == 18);
  CHECK(cfg.pruning);
  CHECK(cfg.seed_column_only);
  CHECK_FALSE(cfg.kink_simplification);

  CHECK_THROWS_AS(SweepConfig::for_width(1, 5, kOne), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(6, 5, kOne), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(2, 1, kOne), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(2, 31, kOne), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(2, 5, {}), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(2, 5, {Modulus{1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::for_width(2, 5, {Modulus{kTwo62 + 1}}),
                  std::invalid_argument);
}

TEST_CASE("run_hash covers the numbers, not the execution shape") {
  SweepConfig a = SweepConfig::for_width(3, 5, kOne);
  SweepConfig b = SweepConfig::for_width(4, 5, kOne);  // width differs
  CHECK(a.run_hash() == b.run_hash());
  b.threads = 7;
  CHECK(a.run_hash() == b.run_hash());

  CHECK(a.run_hash() != SweepConfig::for_width(3, 6, kOne).run_hash());
  CHECK(a.run_hash() !=
        SweepConfig::for_width(3, 5, default_moduli()).run_hash());
  SweepConfig c = a;
  c.kink_simplification = true;
  CHECK(a.run_hash() != c.run_hash());
  SweepConfig d = a;
  d.pruning = false;
  CHECK(a.run_hash() != d.run_hash());
  SweepConfig e = a;
  e.seed_column_only = false;
  CHECK(a.run_hash() != e.run_hash());
}

TEST_CASE("width-2 sweep, site by site") {
  SweepConfig cfg = SweepConfig::for_width(2, 2, kOne);
  REQUIRE(cfg.l_max == 3);
  REQUIRE(cfg.n_max == 6);
  RectangleResult harvest;

  BoundaryStateMap state = initial_state(cfg);
  expect_state(state, {{0, 0, {1}}});

  // Column 1: the seed inserts a loop across slots 0-1 for two steps.
  state = update_site(state, 1, 1, cfg, harvest);
  expect_state(state, {{0, 0, {1}}, {9 | FB, 2, {1}}});

  // Row 2 pushes the upper end onto the outgoing edge and sets the top flag.
  state = update_site(state, 2, 1, cfg, harvest);
  expect_state(state, {{0, 0, {1}}, {9 | FB | FT, 3, {1}}});
  CHECK(harvest.per_length.empty());

  // Rollover shifts the body up a slot and retires the spent seed state.
  state = advance_column(std::move(state), cfg);
  expect_state(state, {{36 | FB | FT, 3, {1}}});

  // Column 2, row 1: the lower end either turns (horizontal) or goes
  // straight up (vertical), one step each.
  state = update_site(state, 1, 2, cfg, harvest);
  expect_state(state, {{33 | FB | FT, 4, {1}}, {36 | FB | FT, 4, {1}}});

  // Column 2, row 2: the straight state joins its two ends and closes the
  // unit square, harvested at length 2 with perimeter 4.
  state = update_site(state, 2, 2, cfg, harvest);
  expect_state(state, {{9 | FB | FT, 5, {1}}});
  REQUIRE(harvest.per_length.count(2) == 1);
  CHECK(harvest.per_length.at(2)[0].min_degree == 4);
  CHECK(harvest.per_length.at(2)[0].coeff(4) == 1);

  // Column 3 closes the 2x3 rectangle (the domino) at perimeter 6; the
  // turning state would need 8 steps and dies against the cutoff.
  state = advance_column(std::move(state), cfg);
  state = update_site(state, 1, 3, cfg, harvest);
  state = update_site(state, 2, 3, cfg, harvest);
  CHECK(state.empty());
  REQUIRE(harvest.per_length.count(3) == 1);
  CHECK(harvest.per_length.at(3)[0].min_degree == 6);
  CHECK(harvest.per_length.at(3)[0].coeff(6) == 1);
}

TEST_CASE("sweep_width matches the manual trace and reports stats") {
  SweepConfig cfg = SweepConfig::for_width(2, 2, kOne);
  WidthStats stats;
  RectangleResult harvest = sweep_width(cfg, &stats);
  REQUIRE(harvest.per_length.size() == 2);
  CHECK(harvest.per_length.at(2)[0].coeff(4) == 1);
  CHECK(harvest.per_length.at(3)[0].coeff(6) == 1);
  CHECK(stats.width == 2);
  CHECK(stats.peak_entries == 2);
  CHECK(stats.seconds >= 0);
}

TEST_CASE("update_site validates the site position") {
  SweepConfig cfg = SweepConfig::for_width(2, 2, kOne);
  BoundaryStateMap state = initial_state(cfg);
  RectangleResult harvest;
  CHECK_THROWS_AS(update_site(state, 0, 1, cfg, harvest),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_site(state, 3, 1, cfg, harvest),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_site(state, 1, 0, cfg, harvest),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_site(state, 1, 4, cfg, harvest),
                  std::invalid_argument);
}

TEST_CASE("advance_column keeps the empty state when seeding is unrestricted") {
  SweepConfig cfg = SweepConfig::for_width(2, 2, kOne);
  BoundaryStateMap state = initial_state(cfg);
  CHECK(advance_column(state, cfg).empty());
  SweepConfig open = cfg;
  open.seed_column_only = false;
  BoundaryStateMap kept = advance_column(std::move(state), open);
  REQUIRE(kept.size() == 1);
  CHECK(kept.count(0) == 1);
}

TEST_CASE("every reachable state is well-formed") {
  SweepConfig cfg = SweepConfig::for_width(4, 4, default_moduli());
  BoundaryStateMap state = initial_state(cfg);
  RectangleResult harvest;
  for (int c = 1; c <= cfg.l_max; ++c) {
    for (int r = 1; r <= cfg.width; ++r) {
      state = update_site(state, r, c, cfg, harvest);
      for (const auto& [key, poly] : state) {
        REQUIRE_NOTHROW(unpack(key, cfg.width));  // balanced, no stray bits
        REQUIRE_FALSE(poly.coeffs.empty());
        REQUIRE(poly.coeffs.size() % cfg.moduli.size() == 0);
        if (r == cfg.width)  // the top site never emits a vertical edge
          REQUIRE(((key >> (2 * cfg.width)) & 3) == 0);
      }
    }
    if (c < cfg.l_max) {
      state = advance_column(std::move(state), cfg);
      for (const auto& [key, poly] : state)
        REQUIRE((key & 3) == 0);  // the rollover vacates the bottom slot
    }
  }
}

TEST_CASE("per-length harvests equal the bounding-box ground truth") {
  auto residue = [](const ExactSeries& s, int n, Modulus m) {
    auto it = s.terms.find(n);
    if (it == s.terms.end()) return std::uint64_t{0};
    return mpz_class(it->second % mpz_class(m.m)).get_ui();
  };
  for (int width = 2; width <= 4; ++width) {
    SweepConfig cfg = SweepConfig::for_width(width, 5, kOne);
    RectangleResult harvest = sweep_width(cfg);
    std::map<int, ExactSeries> truth =
        brute_force_series_bbox(cfg.n_max, width);
    for (int len = width; len <= cfg.l_max; ++len) {
      ExactSeries want;
      if (truth.count(len)) want = truth.at(len);
      TruncatedPoly got(kOne[0], cfg.n_max);
      if (harvest.per_length.count(len)) got = harvest.per_length.at(len)[0];
      for (int n = 0; n <= cfg.n_max; ++n)
        REQUIRE(got.coeff(n) == residue(want, n, kOne[0]));
      // Nothing below the spanning minimum, everything on even degrees.
      for (int n = 0; n < 2 * (width + len) - 4; ++n)
        REQUIRE(got.coeff(n) == 0);
      for (int n = 1; n <= cfg.n_max; n += 2) REQUIRE(got.coeff(n) == 0);
    }
  }
}

TEST_CASE("enumerate reproduces the published series at w_max 6") {
  const long known[] = {1,    2,     7,     28,    124,
                        588,  2938,  15268, 81826, 449572};
  EnumerateResult r = enumerate_polygons(6, auto_moduli(22), 1);
  REQUIRE(r.exact.terms.size() == 10);
  for (int i = 0; i < 10; ++i)
    REQUIRE(r.exact.terms.at(4 + 2 * i) == known[i]);
  REQUIRE(r.residues.size() == 1);
  CHECK(r.residues[0].terms.at(22) == 449572);
  REQUIRE(r.stats.size() == 5);
  CHECK(r.stats[0].width == 2);
  CHECK(r.stats[4].width == 6);
}

TEST_CASE("pruning, kink simplification and threads do not change counts") {
  EnumerateResult base = enumerate_polygons(6, default_moduli(), 1);

  EnumerateOptions no_prune;
  no_prune.pruning = false;
  EnumerateResult loose = enumerate_polygons(6, default_moduli(), 1, no_prune);
  CHECK(loose.exact == base.exact);
  CHECK(loose.residues == base.residues);

  EnumerateOptions kink;
  kink.kink_simplification = true;
  EnumerateResult folded = enumerate_polygons(6, default_moduli(), 1, kink);
  CHECK(folded.exact == base.exact);
  CHECK(folded.residues == base.residues);

  EnumerateResult wide = enumerate_polygons(6, default_moduli(), 4);
  CHECK(wide.exact == base.exact);
  CHECK(wide.residues == base.residues);

  // The simplification merges kink states, so it can only shrink the peak.
  std::size_t peak_base = 0, peak_kink = 0;
  for (const WidthStats& s : base.stats)
    peak_base = std::max(peak_base, s.peak_entries);
  for (const WidthStats& s : folded.stats)
    peak_kink = std::max(peak_kink, s.peak_entries);
  CHECK(peak_kink <= peak_base);
  CHECK(peak_base == 161);
  CHECK(peak_kink == 143);
}

TEST_CASE("a single wide modulus suffices while the counts stay small") {
  // 3^42 overflows one 62-bit modulus, so capacity demands force; the
  // actual counts at n <= 42 still fit, so the forced run must agree with
  // the full set.
  CHECK_THROWS_AS(enumerate_polygons(11, {Modulus{kTwo62}}, 1),
                  ModulusCapacityError);
  EnumerateOptions forced;
  forced.force = true;
  EnumerateResult one = enumerate_polygons(11, {Modulus{kTwo62}}, 1, forced);
  EnumerateResult full = enumerate_polygons(11, default_moduli(), 1);
  CHECK(one.exact == full.exact);
}

TEST_CASE("threaded sweeps match serial sweeps state for state") {
  SweepConfig cfg = SweepConfig::for_width(5, 6, default_moduli());
  RectangleResult serial = sweep_width(cfg);
  SweepConfig par = cfg;
  par.threads = 4;
  RectangleResult threaded = sweep_width(par);
  CHECK(serial.per_length == threaded.per_length);

  // w_max 11 grows the state map past the parallel threshold, so this run
  // exercises the partitioned path for real.
  EnumerateResult one = enumerate_polygons(11, default_moduli(), 1);
  EnumerateResult four = enumerate_polygons(11, default_moduli(), 4);
  CHECK(one.exact == four.exact);
  CHECK(one.residues == four.residues);
  std::size_t biggest = 0;
  REQUIRE(one.stats.size() == four.stats.size());
  for (std::size_t i = 0; i < one.stats.size(); ++i) {
    CHECK(one.stats[i].peak_entries == four.stats[i].peak_entries);
    CHECK(one.stats[i].peak_terms == four.stats[i].peak_terms);
    biggest = std::max(biggest, one.stats[i].peak_entries);
  }
  CHECK(biggest > 1024);
}

TEST_CASE("checkpoints resume a sweep from every column boundary") {
  namespace fs = std::filesystem;
  fs::path dir = "engine_ckpt_tmp";
  fs::create_directories(dir);
  SweepConfig cfg = SweepConfig::for_width(3, 4, default_moduli());

  std::map<int, std::string> files;
  RectangleResult reference = sweep_width(
      cfg, nullptr, nullptr,
      [&](int next_column, const BoundaryStateMap& st,
          const RectangleResult& hv) {
        CheckpointData d;
        d.width = cfg.width;
        d.next_row = 1;
        d.next_column = next_column;
        d.state = st;
        d.harvest = hv;
        std::string path = (dir / ("col" + std::to_string(next_column) +
                                   ".ckpt")).string();
        checkpoint_save(path, cfg, d);
        files[next_column] = path;
      });
  REQUIRE(files.size() == static_cast<std::size_t>(cfg.l_max - 1));

  for (const auto& [column, path] : files) {
    CheckpointData data = checkpoint_load(path, cfg);
    CHECK(data.width == cfg.width);
    CHECK(data.next_row == 1);
    CHECK(data.next_column == column);
    RectangleResult redone = sweep_width(cfg, nullptr, &data);
    REQUIRE(redone.per_length == reference.per_length);
  }

  // Loading under any other run configuration must be refused.
  const std::string& probe = files.begin()->second;
  CHECK_THROWS_AS(
      checkpoint_load(probe, SweepConfig::for_width(3, 5, default_moduli())),
      CheckpointMismatch);
  CHECK_THROWS_AS(checkpoint_load(probe, SweepConfig::for_width(3, 4, kOne)),
                  CheckpointMismatch);
  SweepConfig kink = cfg;
  kink.kink_simplification = true;
  CHECK_THROWS_AS(checkpoint_load(probe, kink), CheckpointMismatch);

  // Same run, wrong width: the hash matches, the sweep must still refuse.
  SweepConfig other_width = SweepConfig::for_width(4, 4, default_moduli());
  CheckpointData foreign = checkpoint_load(probe, other_width);
  CHECK_THROWS_WITH_AS(sweep_width(other_width, nullptr, &foreign),
                       doctest::Contains("another width"),
                       std::invalid_argument);

  fs::remove_all(dir);
}

TEST_CASE("corrupt checkpoint files are rejected") {
  namespace fs = std::filesystem;
  fs::path dir = "engine_corrupt_tmp";
  fs::create_directories(dir);
  SweepConfig cfg = SweepConfig::for_width(2, 3, kOne);
  CheckpointData d;
  d.width = 2;
  d.state = initial_state(cfg);
  std::string path = (dir / "good.ckpt").string();
  checkpoint_save(path, cfg, d);
  REQUIRE_NOTHROW(checkpoint_load(path, cfg));

  auto bytes = [&]() {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();

  std::string truncated = (dir / "truncated.ckpt").string();
  std::ofstream(truncated, std::ios::binary)
      << bytes.substr(0, bytes.size() - 4);
  CHECK_THROWS_WITH_AS(checkpoint_load(truncated, cfg),
                       doctest::Contains("truncated"), std::runtime_error);

  std::string padded = (dir / "padded.ckpt").string();
  std::ofstream(padded, std::ios::binary) << bytes << '\0';
  CHECK_THROWS_WITH_AS(checkpoint_load(padded, cfg),
                       doctest::Contains("trailing garbage"),
                       std::runtime_error);

  std::string flipped = (dir / "flipped.ckpt").string();
  std::string mutated = bytes;
  mutated[mutated.size() / 2] ^= 0x40;
  std::ofstream(flipped, std::ios::binary) << mutated;
  CHECK_THROWS_AS(checkpoint_load(flipped, cfg), std::runtime_error);

  std::string alien = (dir / "alien.ckpt").string();
  std::ofstream(alien, std::ios::binary) << "definitely not a checkpoint";
  CHECK_THROWS_AS(checkpoint_load(alien, cfg), std::runtime_error);

  fs::remove_all(dir);
}

TEST_CASE("enumerate resumes from its own checkpoints") {
  namespace fs = std::filesystem;
  fs::path dir = "engine_resume_tmp";
  fs::create_directories(dir);
  std::vector<Modulus> mods = default_moduli();

  EnumerateResult fresh = enumerate_polygons(4, mods, 1);

  // A finished run leaves a completion marker; rerunning from it returns
  // the same numbers without sweeping anything.
  EnumerateOptions with_ck;
  with_ck.checkpoint_path = (dir / "full.ckpt").string();
  with_ck.checkpoint_columns = 1;
  EnumerateResult first = enumerate_polygons(4, mods, 1, with_ck);
  CHECK(first.exact == fresh.exact);
  REQUIRE(fs::exists(with_ck.checkpoint_path));
  EnumerateResult again = enumerate_polygons(4, mods, 1, with_ck);
  CHECK(again.exact == fresh.exact);
  CHECK(again.residues == fresh.residues);

  // A checkpoint parked in the middle of the first width resumes cleanly.
  SweepConfig cfg2 = SweepConfig::for_width(2, 4, mods);
  std::string partial = (dir / "partial.ckpt").string();
  sweep_width(cfg2, nullptr, nullptr,
              [&](int next_column, const BoundaryStateMap& st,
                  const RectangleResult& hv) {
                if (next_column != 4) return;
                CheckpointData d;
                d.width = 2;
                d.next_row = 1;
                d.next_column = 4;
                d.state = st;
                d.harvest = hv;
                checkpoint_save(partial, cfg2, d);
              });
  EnumerateOptions from_partial;
  from_partial.checkpoint_path = partial;
  EnumerateResult resumed = enumerate_polygons(4, mods, 1, from_partial);
  CHECK(resumed.exact == fresh.exact);
  CHECK(resumed.residues == fresh.residues);

  // The marker belongs to w_max 4; a w_max 5 run must refuse it.
  EnumerateOptions stale;
  stale.checkpoint_path = with_ck.checkpoint_path;
  CHECK_THROWS_AS(enumerate_polygons(5, mods, 1, stale), CheckpointMismatch);

  fs::remove_all(dir);
}

TEST_CASE("harvests start at the spanning minimum") {
  for (int width = 2; width <= 5; ++width) {
    SweepConfig cfg = SweepConfig::for_width(width, 5, kOne);
    RectangleResult harvest = sweep_width(cfg);
    for (const auto& [len, polys] : harvest.per_length) {
      REQUIRE(len >= width);
      REQUIRE(len <= cfg.l_max);
      for (const TruncatedPoly& p : polys) {
        REQUIRE_FALSE(p.is_zero());
        REQUIRE(p.min_degree >= static_cast<std::uint32_t>(
                                    2 * (width + len) - 4));
      }
    }
  }
}
