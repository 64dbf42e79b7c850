#include "sapenum/tm_engine.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <thread>
#include <utility>

#include "sapenum/pruning.hpp"

namespace sapenum {
namespace {

constexpr std::uint64_t kBottomFlag = 1ULL << 62;
constexpr std::uint64_t kTopFlag = 1ULL << 63;
constexpr std::uint64_t kBodyMask = kBottomFlag - 1;

inline unsigned slot(std::uint64_t key, int i) {
  return (key >> (2 * i)) & 3u;
}

inline std::uint64_t with_slot(std::uint64_t key, int i, unsigned s) {
  return (key & ~(3ULL << (2 * i))) | (std::uint64_t(s) << (2 * i));
}

// Adds source * x^k into dst, keeping degrees at most cap.  The caller has
// already checked that at least one shifted degree fits.
void accumulate(StatePoly& dst, const StatePoly& src, int k, int cap,
                const std::vector<Modulus>& mods) {
  const int nm = static_cast<int>(mods.size());
  const int src_lo = static_cast<int>(src.min_degree);
  const int src_cnt = static_cast<int>(src.coeffs.size()) / nm;
  const int t_lo = src_lo + k;
  const int t_hi = std::min(src_lo + src_cnt - 1 + k, cap);
  if (t_hi < t_lo) return;

  if (dst.coeffs.empty()) {
    dst.min_degree = static_cast<std::uint32_t>(t_lo);
    dst.coeffs.assign(static_cast<std::size_t>(t_hi - t_lo + 1) * nm, 0);
  } else {
    int d_lo = static_cast<int>(dst.min_degree);
    int d_hi = d_lo + static_cast<int>(dst.coeffs.size()) / nm - 1;
    int n_lo = std::min(d_lo, t_lo), n_hi = std::max(d_hi, t_hi);
    if (n_lo != d_lo || n_hi != d_hi) {
      std::vector<std::uint64_t> grown(
          static_cast<std::size_t>(n_hi - n_lo + 1) * nm, 0);
      std::copy(dst.coeffs.begin(), dst.coeffs.end(),
                grown.begin() + static_cast<std::size_t>(d_lo - n_lo) * nm);
      dst.coeffs.swap(grown);
      dst.min_degree = static_cast<std::uint32_t>(n_lo);
    }
  }
  const int base = static_cast<int>(dst.min_degree);
  for (int d = t_lo; d <= t_hi; ++d) {
    const std::uint64_t* from =
        &src.coeffs[static_cast<std::size_t>(d - k - src_lo) * nm];
    std::uint64_t* to = &dst.coeffs[static_cast<std::size_t>(d - base) * nm];
    for (int j = 0; j < nm; ++j) to[j] = mod_add(to[j], from[j], mods[j]);
  }
}

struct Sink {
  BoundaryStateMap& out;
  RectangleResult& harvest;
  const SweepConfig& cfg;
  int row;
  int column;
  int n_mod;
  std::uint64_t flag_or;  // border flags this site's occupied targets gain
};

void harvest_add(Sink& s, const StatePoly& src) {
  auto& polys = s.harvest.per_length[s.column];
  if (polys.empty()) {
    polys.reserve(s.n_mod);
    for (int j = 0; j < s.n_mod; ++j)
      polys.emplace_back(s.cfg.moduli[j], s.cfg.n_max);
  }
  const int cnt = static_cast<int>(src.coeffs.size()) / s.n_mod;
  for (int t = 0; t < cnt; ++t) {
    int d = static_cast<int>(src.min_degree) + t;
    if (d > s.cfg.n_max) break;
    for (int j = 0; j < s.n_mod; ++j) {
      std::uint64_t v = src.coeffs[static_cast<std::size_t>(t) * s.n_mod + j];
      if (!v) continue;
      TruncatedPoly& p = polys[j];
      p.set_coeff(d, mod_add(p.coeff(d), v, s.cfg.moduli[j]));
    }
  }
}

void emit(Sink& s, std::uint64_t key, int k, const StatePoly& src,
          bool incident) {
  if (incident) key |= s.flag_or;
  const SweepConfig& cfg = s.cfg;
  if (s.row < cfg.width) {
    if (cfg.kink_simplification) {
      unsigned a = slot(key, s.row), b = slot(key, s.row + 1);
      if (a == 0 && b != 0)
        key = with_slot(with_slot(key, s.row + 1, 0), s.row, b);
    }
    unsigned a = slot(key, s.row), b = slot(key, s.row + 1);
    if (a != 0 && b != 0 && !(a == 1 && b == 2)) return;  // next site is stuck
  }
  std::uint32_t min_d = src.min_degree + static_cast<std::uint32_t>(k);
  int cap = cfg.n_max;
  if (cfg.pruning) {
    PruneBound bound =
        completion_bound(key, cfg.width + 1, s.row, s.column, cfg.width);
    if (should_prune(min_d, bound, cfg.n_max)) return;
    cap = degree_cap(bound, cfg.n_max);
  }
  if (static_cast<int>(min_d) > cap) return;
  accumulate(s.out[key], src, k, cap, cfg.moduli);
}

void process_entry(Sink& s, std::uint64_t key, const StatePoly& src) {
  const int r = s.row;
  const int g1 = r - 1, g2 = r;
  assert(r > 1 || slot(key, 0) == 0);
  unsigned v = slot(key, g1), h = slot(key, g2);

  if (v == 0 && h == 0) {
    emit(s, key, 0, src, false);
    if (r >= s.cfg.width) return;
    std::uint64_t body = key & kBodyMask;
    if (body == 0) {
      assert(key == 0);
      if (!s.cfg.seed_column_only || s.column == 1)
        emit(s, key | (1ULL << (2 * g1)) | (2ULL << (2 * g2)), 2, src, true);
      return;
    }
    // Hook a new loop into an existing one.  Only the innermost pair around
    // the kink and the pairs directly inside it can connect to this site
    // without crossing another arc.
    int lo[16], hi[16], np = 0;
    {
      int st[16], sp = 0;
      for (int i = 0; i <= s.cfg.width; ++i) {
        unsigned e = slot(key, i);
        if (e == 1) {
          st[sp++] = i;
        } else if (e == 2) {
          lo[np] = st[--sp];
          hi[np] = i;
          ++np;
        }
      }
    }
    auto innermost = [&](int a, int b) {
      int best = -1;
      for (int i = 0; i < np; ++i)
        if (lo[i] < a && hi[i] > b && (best < 0 || lo[i] > lo[best]))
          best = i;
      return best;
    };
    int enc = innermost(g1, g2);
    for (int i = 0; i < np; ++i) {
      if (i != enc && innermost(lo[i], hi[i]) != enc) continue;
      std::uint64_t t;
      if (lo[i] < g1 && hi[i] > g2) {
        t = key | (2ULL << (2 * g1)) | (1ULL << (2 * g2));
      } else if (hi[i] < g1) {
        t = with_slot(key | (2ULL << (2 * g1)) | (2ULL << (2 * g2)), hi[i], 1);
      } else {
        t = with_slot(key | (1ULL << (2 * g1)) | (1ULL << (2 * g2)), lo[i], 2);
      }
      emit(s, t, 2, src, true);
    }
    return;
  }

  if (v == 0 || h == 0) {
    unsigned e = v | h;
    emit(s, with_slot(with_slot(key, g2, 0), g1, e), 1, src, true);
    if (r < s.cfg.width)
      emit(s, with_slot(with_slot(key, g1, 0), g2, e), 1, src, true);
    return;
  }

  if (v == 1 && h == 2) {
    std::uint64_t t =
        (with_slot(with_slot(key, g1, 0), g2, 0)) | s.flag_or;
    if ((t & kBodyMask) == 0) {
      if ((t & kBottomFlag) && (t & kTopFlag) && s.column >= s.cfg.width)
        harvest_add(s, src);
      return;
    }
    emit(s, t, 0, src, false);
  }
  // v == h or (v, h) == (Upper, Lower): joining would close a loop early or
  // cross arcs, so the state dies here.
}

// Occupancy of the slots this site cannot touch.  Two sources that differ
// here can never emit the same target, so partitioning by this key keeps
// every target collision within one thread.
inline std::uint64_t occupancy_key(std::uint64_t key, int row, int n_slots) {
  std::uint64_t occ = 0;
  for (int i = 0; i < n_slots; ++i) {
    if (i >= row - 1 && i <= row + 1) continue;
    if (slot(key, i)) occ |= 1ULL << i;
  }
  return occ;
}

void add_poly(TruncatedPoly& dst, const TruncatedPoly& src, Modulus m) {
  if (src.is_zero()) return;
  for (int d = static_cast<int>(src.min_degree); d <= src.max_degree; ++d) {
    std::uint64_t c = src.coeff(d);
    if (c) dst.set_coeff(d, mod_add(dst.coeff(d), c, m));
  }
}

void merge_harvest(RectangleResult& dst, RectangleResult&& part,
                   const std::vector<Modulus>& mods) {
  for (auto& [len, polys] : part.per_length) {
    auto it = dst.per_length.find(len);
    if (it == dst.per_length.end()) {
      dst.per_length.emplace(len, std::move(polys));
    } else {
      for (std::size_t j = 0; j < mods.size(); ++j)
        add_poly(it->second[j], polys[j], mods[j]);
    }
  }
}

}  // namespace

SweepConfig SweepConfig::for_width(int width, int w_max,
                                   std::vector<Modulus> moduli) {
  if (w_max < 2 || w_max > 30)
    throw std::invalid_argument("for_width: w_max out of range [2, 30]");
  if (width < 2 || width > w_max)
    throw std::invalid_argument("for_width: width out of range [2, w_max]");
  if (moduli.empty())
    throw std::invalid_argument("for_width: no moduli");
  for (const Modulus& m : moduli)
    if (m.m < 2 || m.m > kTwo62)
      throw std::invalid_argument("for_width: modulus out of range [2, 2^62]");
  SweepConfig cfg;
  cfg.width = width;
  cfg.w_max = w_max;
  cfg.l_max = 2 * w_max - width + 1;
  cfg.n_max = 4 * w_max - 2;
  cfg.moduli = std::move(moduli);
  return cfg;
}

std::uint64_t SweepConfig::run_hash() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (v >> (8 * i)) & 0xffu;
      hash *= 1099511628211ULL;
    }
  };
  mix(0x53415043'4b763031ULL);  // format tag
  mix(static_cast<std::uint64_t>(w_max));
  mix(static_cast<std::uint64_t>(n_max));
  mix((seed_column_only ? 1u : 0u) | (kink_simplification ? 2u : 0u) |
      (pruning ? 4u : 0u));
  mix(moduli.size());
  for (const Modulus& m : moduli) mix(m.m);
  return hash;
}

BoundaryStateMap initial_state(const SweepConfig& config) {
  BoundaryStateMap state;
  StatePoly one;
  one.min_degree = 0;
  one.coeffs.assign(config.moduli.size(), 1);
  state.emplace(0, std::move(one));
  return state;
}

BoundaryStateMap update_site(const BoundaryStateMap& state, int row,
                             int column, const SweepConfig& config,
                             RectangleResult& harvest) {
  if (row < 1 || row > config.width)
    throw std::invalid_argument("update_site: row out of range");
  if (column < 1 || column > config.l_max)
    throw std::invalid_argument("update_site: column out of range");
  const int nm = static_cast<int>(config.moduli.size());
  std::uint64_t flag_or = (row == 1 ? kBottomFlag : 0) |
                          (row == config.width ? kTopFlag : 0);

  const bool parallel = config.threads > 1 && state.size() >= 1024;
  if (!parallel) {
    BoundaryStateMap out;
    out.max_load_factor(0.7f);
    out.reserve(state.size() + state.size() / 2 + 16);
    Sink sink{out, harvest, config, row, column, nm, flag_or};
    for (const auto& [key, poly] : state) process_entry(sink, key, poly);
    return out;
  }

  const int nt = std::min<int>(config.threads, 64);
  std::vector<std::vector<std::pair<std::uint64_t, const StatePoly*>>> work(
      nt);
  for (auto& bucket : work) bucket.reserve(state.size() / nt + 16);
  for (const auto& [key, poly] : state) {
    std::uint64_t occ = occupancy_key(key, row, config.width + 1);
    work[KeyHash{}(occ) % nt].emplace_back(key, &poly);
  }

  std::vector<BoundaryStateMap> outs(nt);
  std::vector<RectangleResult> harvests(nt);
  std::vector<std::exception_ptr> errors(nt);
  std::vector<std::thread> threads;
  threads.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    threads.emplace_back([&, t] {
      try {
        outs[t].max_load_factor(0.7f);
        outs[t].reserve(work[t].size() + work[t].size() / 2 + 16);
        Sink sink{outs[t], harvests[t], config, row, column, nm, flag_or};
        for (const auto& [key, poly] : work[t])
          process_entry(sink, key, *poly);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : threads) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t total = 0;
  for (const BoundaryStateMap& part : outs) total += part.size();
  BoundaryStateMap out;
  out.max_load_factor(0.7f);
  out.reserve(total + 16);
  for (BoundaryStateMap& part : outs) {
    for (auto& kv : part) {
      bool fresh = out.emplace(kv.first, std::move(kv.second)).second;
      assert(fresh);
      (void)fresh;
    }
    BoundaryStateMap().swap(part);
  }
  for (RectangleResult& part : harvests)
    merge_harvest(harvest, std::move(part), config.moduli);
  return out;
}

BoundaryStateMap advance_column(BoundaryStateMap state,
                                const SweepConfig& config) {
  BoundaryStateMap out;
  out.max_load_factor(0.7f);
  out.reserve(state.size());
  while (!state.empty()) {
    auto node = state.extract(state.begin());
    std::uint64_t key = node.key();
    assert(slot(key, config.width) == 0);
    std::uint64_t body = key & kBodyMask;
    if (body == 0 && config.seed_column_only) continue;
    node.key() = (key & ~kBodyMask) | (body << 2);
    out.insert(std::move(node));
  }
  return out;
}

RectangleResult sweep_width(
    const SweepConfig& config, WidthStats* stats,
    const CheckpointData* resume,
    const std::function<void(int, const BoundaryStateMap&,
                             const RectangleResult&)>& on_column) {
  if (resume && resume->width != config.width)
    throw std::invalid_argument("sweep_width: resume data is another width");
  const auto t0 = std::chrono::steady_clock::now();
  const int nm = static_cast<int>(config.moduli.size());

  BoundaryStateMap state =
      resume ? resume->state : initial_state(config);
  RectangleResult harvest = resume ? resume->harvest : RectangleResult{};
  int c0 = resume ? resume->next_column : 1;
  int r0 = resume ? resume->next_row : 1;
  if (c0 < 1 || c0 > config.l_max || r0 < 1 || r0 > config.width)
    throw std::invalid_argument("sweep_width: resume position out of range");

  if (stats) {
    stats->width = config.width;
    stats->peak_entries = state.size();
    stats->peak_terms = 0;
    stats->seconds = 0;
  }
  for (int c = c0; c <= config.l_max; ++c) {
    for (int r = (c == c0 ? r0 : 1); r <= config.width; ++r) {
      state = update_site(state, r, c, config, harvest);
      if (stats) {
        stats->peak_entries = std::max(stats->peak_entries, state.size());
        std::size_t terms = 0;
        for (const auto& kv : state) terms += kv.second.coeffs.size() / nm;
        stats->peak_terms = std::max(stats->peak_terms, terms);
      }
    }
    if (c == config.l_max) break;
    state = advance_column(std::move(state), config);
    if (on_column) on_column(c + 1, state, harvest);
    if (state.empty()) break;
  }
  if (stats)
    stats->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  return harvest;
}

namespace {

// ---- checkpoint serialization ----

constexpr char kCkMagic[8] = {'S', 'A', 'P', 'C', 'K', 'v', '0', '1'};

struct Fnv {
  std::uint64_t hash = 1469598103934665603ULL;
  void feed(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= b[i];
      hash *= 1099511628211ULL;
    }
  }
};

struct CkWriter {
  std::ofstream file;
  Fnv fnv;
  explicit CkWriter(const std::string& path)
      : file(path, std::ios::binary | std::ios::trunc) {}
  void bytes(const void* p, std::size_t n) {
    fnv.feed(p, n);
    file.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xffu;
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xffu;
    bytes(b, 8);
  }
  void trailer(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xffu;
    file.write(reinterpret_cast<const char*>(b), 8);
  }
};

// Parses a whole checkpoint image from memory.  Every count read from the
// file is bounded by the bytes actually left, so a corrupted size field can
// never drive an allocation: it reports "truncated file" instead.
struct CkReader {
  std::string blob;
  std::size_t pos = 0;
  Fnv fnv;
  explicit CkReader(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("checkpoint: cannot open " + path);
    blob.assign(std::istreambuf_iterator<char>(file), {});
  }
  std::size_t remaining() const { return blob.size() - pos; }
  void bytes(void* p, std::size_t n) {
    if (n > remaining())
      throw std::runtime_error("checkpoint: truncated file");
    std::memcpy(p, blob.data() + pos, n);
    fnv.feed(blob.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  }
  // The stored hash, read without feeding the running hash.
  std::uint64_t trailer() {
    if (remaining() < 8)
      throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= std::uint64_t(static_cast<unsigned char>(blob[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
};

bool key_well_formed(std::uint64_t key, int n_slots) {
  std::uint64_t body = key & kBodyMask;
  if (n_slots < 31 && (body >> (2 * n_slots)) != 0) return false;
  int depth = 0;
  for (int i = 0; i < n_slots; ++i) {
    unsigned s = slot(key, i);
    if (s == 3) return false;
    if (s == 1) ++depth;
    if (s == 2 && --depth < 0) return false;
  }
  return depth == 0;
}

void save_checkpoint_impl(const std::string& path, const SweepConfig& config,
                          int width, int next_row, int next_column,
                          const BoundaryStateMap& state,
                          const RectangleResult& harvest,
                          const std::map<int, std::vector<std::uint64_t>>&
                              accumulated) {
  const int nm = static_cast<int>(config.moduli.size());
  const std::string tmp = path + ".tmp";
  {
    CkWriter w(tmp);
    if (!w.file)
      throw std::runtime_error("checkpoint: cannot write " + tmp);
    w.bytes(kCkMagic, 8);
    w.u64(config.run_hash());
    w.u32(static_cast<std::uint32_t>(width));
    w.u32(static_cast<std::uint32_t>(next_row));
    w.u32(static_cast<std::uint32_t>(next_column));
    w.u32(static_cast<std::uint32_t>(nm));
    for (const Modulus& m : config.moduli) w.u64(m.m);

    std::vector<std::uint64_t> keys;
    keys.reserve(state.size());
    for (const auto& kv : state) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    w.u64(keys.size());
    for (std::uint64_t key : keys) {
      const StatePoly& poly = state.at(key);
      w.u64(key);
      w.u32(poly.min_degree);
      w.u32(static_cast<std::uint32_t>(poly.coeffs.size() / nm));
      for (std::uint64_t c : poly.coeffs) w.u64(c);
    }

    w.u32(static_cast<std::uint32_t>(harvest.per_length.size()));
    for (const auto& [len, polys] : harvest.per_length) {
      w.u32(static_cast<std::uint32_t>(len));
      for (int j = 0; j < nm; ++j) {
        const TruncatedPoly& p = polys[j];
        w.u32(p.min_degree);
        if (p.is_zero()) {
          w.u32(0);
          continue;
        }
        std::uint32_t cnt = static_cast<std::uint32_t>(
            p.max_degree - static_cast<int>(p.min_degree) + 1);
        w.u32(cnt);
        for (int d = static_cast<int>(p.min_degree); d <= p.max_degree; ++d)
          w.u64(p.coeff(d));
      }
    }

    w.u32(static_cast<std::uint32_t>(accumulated.size()));
    for (const auto& [n, res] : accumulated) {
      w.u32(static_cast<std::uint32_t>(n));
      for (std::uint64_t r : res) w.u64(r);
    }
    w.trailer(w.fnv.hash);
    w.file.flush();
    if (!w.file)
      throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void checkpoint_save(const std::string& path, const SweepConfig& config,
                     const CheckpointData& data) {
  save_checkpoint_impl(path, config, data.width, data.next_row,
                       data.next_column, data.state, data.harvest,
                       data.accumulated);
}

CheckpointData checkpoint_load(const std::string& path,
                               const SweepConfig& config) {
  CkReader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (!std::equal(magic, magic + 8, kCkMagic))
    throw std::runtime_error("checkpoint: not a checkpoint file");
  if (r.u64() != config.run_hash())
    throw CheckpointMismatch(
        "checkpoint: saved run configuration differs from this run");

  const int nm = static_cast<int>(config.moduli.size());
  CheckpointData data;
  data.width = static_cast<int>(r.u32());
  data.next_row = static_cast<int>(r.u32());
  data.next_column = static_cast<int>(r.u32());
  if (data.width < 2 || data.width > config.w_max + 1 || data.next_row < 1 ||
      data.next_column < 1)
    throw std::runtime_error("checkpoint: position out of range");
  if (static_cast<int>(r.u32()) != nm)
    throw CheckpointMismatch("checkpoint: modulus count differs");
  for (const Modulus& m : config.moduli)
    if (r.u64() != m.m)
      throw CheckpointMismatch("checkpoint: moduli differ");

  const int n_slots = std::min(data.width, config.w_max) + 1;
  std::uint64_t n_entries = r.u64();
  // Each entry takes at least key + min_degree + count + one residue row.
  if (n_entries > r.remaining() / (16 + 8 * std::size_t(nm)))
    throw std::runtime_error("checkpoint: truncated file");
  data.state.reserve(n_entries + 16);
  for (std::uint64_t i = 0; i < n_entries; ++i) {
    std::uint64_t key = r.u64();
    if (!key_well_formed(key, n_slots))
      throw std::runtime_error("checkpoint: corrupt state key");
    StatePoly poly;
    poly.min_degree = r.u32();
    std::uint32_t cnt = r.u32();
    if (cnt == 0 ||
        std::uint64_t(poly.min_degree) + cnt - 1 > std::uint64_t(config.n_max))
      throw std::runtime_error("checkpoint: corrupt state polynomial");
    poly.coeffs.resize(static_cast<std::size_t>(cnt) * nm);
    for (std::uint64_t& c : poly.coeffs) {
      c = r.u64();
    }
    for (std::size_t t = 0; t < cnt; ++t)
      for (int j = 0; j < nm; ++j)
        if (poly.coeffs[t * nm + j] >= config.moduli[j].m)
          throw std::runtime_error("checkpoint: residue not reduced");
    data.state.emplace(key, std::move(poly));
  }

  std::uint32_t n_lengths = r.u32();
  for (std::uint32_t i = 0; i < n_lengths; ++i) {
    int len = static_cast<int>(r.u32());
    if (len < 1 || len > 2 * config.w_max)
      throw std::runtime_error("checkpoint: corrupt harvest length");
    std::vector<TruncatedPoly> polys;
    polys.reserve(nm);
    for (int j = 0; j < nm; ++j) {
      TruncatedPoly p(config.moduli[j], config.n_max);
      std::uint32_t min_deg = r.u32();
      std::uint32_t cnt = r.u32();
      if (cnt != 0) {
        if (std::uint64_t(min_deg) + cnt - 1 > std::uint64_t(config.n_max))
          throw std::runtime_error("checkpoint: corrupt harvest polynomial");
        for (std::uint32_t t = 0; t < cnt; ++t) {
          std::uint64_t c = r.u64();
          if (c >= config.moduli[j].m)
            throw std::runtime_error("checkpoint: residue not reduced");
          if (c) p.set_coeff(static_cast<int>(min_deg + t), c);
        }
      }
      polys.push_back(std::move(p));
    }
    data.harvest.per_length.emplace(len, std::move(polys));
  }

  std::uint32_t n_acc = r.u32();
  for (std::uint32_t i = 0; i < n_acc; ++i) {
    int n = static_cast<int>(r.u32());
    if (n < 4 || n > config.n_max || n % 2 != 0)
      throw std::runtime_error("checkpoint: corrupt accumulated perimeter");
    std::vector<std::uint64_t> res(nm);
    for (int j = 0; j < nm; ++j) {
      res[j] = r.u64();
      if (res[j] >= config.moduli[j].m)
        throw std::runtime_error("checkpoint: residue not reduced");
    }
    data.accumulated.emplace(n, std::move(res));
  }

  std::uint64_t expect = r.fnv.hash;
  if (r.trailer() != expect)
    throw std::runtime_error("checkpoint: checksum mismatch");
  if (r.remaining() != 0)
    throw std::runtime_error("checkpoint: trailing garbage");
  return data;
}

EnumerateResult enumerate_polygons(int w_max,
                                   const std::vector<Modulus>& moduli,
                                   int threads,
                                   const EnumerateOptions& options) {
  const int n_max = 4 * w_max - 2;
  const int nm = static_cast<int>(moduli.size());
  auto make_config = [&](int width) {
    SweepConfig cfg = SweepConfig::for_width(width, w_max, moduli);
    cfg.seed_column_only = options.seed_column_only;
    cfg.kink_simplification = options.kink_simplification;
    cfg.pruning = options.pruning;
    cfg.threads = std::max(1, threads);
    return cfg;
  };
  make_config(2);  // validate the parameters up front

  if (!moduli_cover(moduli, n_max) && !options.force)
    throw ModulusCapacityError(
        "moduli product cannot bound the count at perimeter " +
        std::to_string(n_max));

  std::map<int, std::vector<std::uint64_t>> accumulated;
  for (int n = 4; n <= n_max; n += 2)
    accumulated.emplace(n, std::vector<std::uint64_t>(nm, 0));

  int start_width = 2;
  CheckpointData resume_data;
  bool have_resume = false;
  const std::string& ck = options.checkpoint_path;
  if (!ck.empty() && std::filesystem::exists(ck)) {
    resume_data = checkpoint_load(ck, make_config(2));
    for (const auto& [n, res] : resume_data.accumulated)
      accumulated.at(n) = res;
    start_width = resume_data.width;
    have_resume = true;
  }

  EnumerateResult result;
  for (int width = start_width; width <= w_max; ++width) {
    SweepConfig cfg = make_config(width);
    const CheckpointData* resume =
        (have_resume && resume_data.width == width) ? &resume_data : nullptr;
    std::function<void(int, const BoundaryStateMap&, const RectangleResult&)>
        on_column;
    if (!ck.empty()) {
      int every = std::max(1, options.checkpoint_columns);
      on_column = [&, every](int next_column, const BoundaryStateMap& st,
                             const RectangleResult& hv) {
        if ((next_column - 1) % every != 0) return;
        save_checkpoint_impl(ck, cfg, cfg.width, 1, next_column, st, hv,
                             accumulated);
      };
    }
    WidthStats stats;
    RectangleResult harvest = sweep_width(cfg, &stats, resume, on_column);
    result.stats.push_back(stats);

    for (const auto& [len, polys] : harvest.per_length) {
      const bool doubled = len > width;  // stands in for the transpose too
      for (int j = 0; j < nm; ++j) {
        const TruncatedPoly& p = polys[j];
        if (p.is_zero()) continue;
        for (int d = static_cast<int>(p.min_degree); d <= p.max_degree; ++d) {
          std::uint64_t c = p.coeff(d);
          if (!c) continue;
          if (d % 2 != 0)
            throw std::logic_error("enumerate: odd-perimeter count appeared");
          if (d < 2 * (width + len) - 4)
            throw std::logic_error("enumerate: impossible short perimeter");
          std::uint64_t add = doubled ? mod_add(c, c, moduli[j]) : c;
          auto& row = accumulated.at(d);
          row[j] = mod_add(row[j], add, moduli[j]);
        }
      }
    }
    if (!ck.empty()) {
      if (width + 1 <= w_max) {
        SweepConfig next_cfg = make_config(width + 1);
        save_checkpoint_impl(ck, next_cfg, width + 1, 1, 1,
                             initial_state(next_cfg), RectangleResult{},
                             accumulated);
      } else {
        save_checkpoint_impl(ck, cfg, width + 1, 1, 1, BoundaryStateMap{},
                             RectangleResult{}, accumulated);
      }
    }
  }

  result.residues.reserve(nm);
  for (int j = 0; j < nm; ++j) {
    ResidueSeries series;
    series.modulus = moduli[j];
    for (const auto& [n, res] : accumulated) series.terms[n] = res[j];
    result.residues.push_back(std::move(series));
  }

  // Reconstruct from the smallest covering prefix; the rest cross-check it.
  std::size_t need = moduli.size();
  for (std::size_t k = 1; k <= moduli.size(); ++k) {
    std::vector<Modulus> prefix(moduli.begin(), moduli.begin() + k);
    if (moduli_cover(prefix, n_max)) {
      need = k;
      break;
    }
  }
  for (const auto& [n, res] : accumulated) {
    std::vector<std::pair<std::uint64_t, Modulus>> parts;
    parts.reserve(need);
    for (std::size_t j = 0; j < need; ++j)
      parts.emplace_back(res[j], moduli[j]);
    mpz_class value = crt_reconstruct(parts);
    for (std::size_t j = need; j < moduli.size(); ++j) {
      mpz_class got = value % mpz_class(moduli[j].m);
      if (got.get_ui() != res[j])
        throw std::runtime_error(
            "residue cross-check failed at perimeter " + std::to_string(n) +
            " for modulus " + std::to_string(moduli[j].m));
    }
    result.exact.terms[n] = value;
  }
  if (result.exact.terms.at(4) != 1)
    throw std::logic_error("enumerate: the unit square was not counted once");
  return result;
}

}  // namespace sapenum
