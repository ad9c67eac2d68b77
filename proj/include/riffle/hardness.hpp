#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "riffle/deck.hpp"
#include "riffle/error.hpp"

namespace riffle {

// ---------------------------------------------------------------------------
// Instances

// Three dimensional matching over X = Y = Z = {1..m}; triples are 1-based.
struct ThreeDMInstance {
  std::size_t m = 0;
  std::vector<std::array<std::uint32_t, 3>> triples;

  void validate() const {
    for (const auto& t : triples)
      for (auto v : t)
        if (v < 1 || v > m) throw Error("3DM triple index out of range 1..m");
  }
  friend bool operator==(const ThreeDMInstance&, const ThreeDMInstance&) = default;
};

// Can the packets be riffled (interleaved as subsequences) into `deck`?
struct RiffleInstance {
  std::vector<Deck> packets;
  Deck deck;
  friend bool operator==(const RiffleInstance&, const RiffleInstance&) = default;
};

// Is there a member of Pi(d1; d2) with at most `d` descents?
struct MinCutsInstance {
  Deck d1, d2;
  std::size_t d = 0;
  friend bool operator==(const MinCutsInstance&, const MinCutsInstance&) = default;
};

// ---------------------------------------------------------------------------
// Text records
//
//   3DM m=<m> T=<x>,<y>,<z>;<x>,<y>,<z>;...
//   RIFFLE packets=<deck>|<deck>|... deck=<deck>
//   MINCUTS d1=<deck> d2=<deck> d=<int>

inline std::string format_instance(const ThreeDMInstance& t) {
  std::ostringstream out;
  out << "3DM m=" << t.m << " T=";
  for (std::size_t i = 0; i < t.triples.size(); ++i) {
    if (i) out << ';';
    out << t.triples[i][0] << ',' << t.triples[i][1] << ',' << t.triples[i][2];
  }
  return out.str();
}

inline std::string format_instance(const RiffleInstance& r) {
  std::string out = "RIFFLE packets=";
  for (std::size_t i = 0; i < r.packets.size(); ++i) out += (i ? "|" : "") + to_expression(r.packets[i]);
  return out + " deck=" + to_expression(r.deck);
}

inline std::string format_instance(const MinCutsInstance& mc) {
  return "MINCUTS d1=" + to_expression(mc.d1) + " d2=" + to_expression(mc.d2) + " d=" + std::to_string(mc.d);
}

namespace detail {

inline std::map<std::string, std::string> record_fields(const std::string& text, const std::string& tag) {
  std::istringstream in(text);
  std::string word;
  if (!(in >> word) || word != tag) throw ParseError("expected record tag " + tag, 0);
  std::map<std::string, std::string> fields;
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value field", static_cast<std::size_t>(in.tellg()));
    fields[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return fields;
}

inline const std::string& required(const std::map<std::string, std::string>& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw ParseError("missing field " + key, 0);
  return it->second;
}

}  // namespace detail

inline ThreeDMInstance parse_3dm(const std::string& text) {
  const auto f = detail::record_fields(text, "3DM");
  ThreeDMInstance t;
  t.m = std::stoul(detail::required(f, "m"));
  std::istringstream triples(f.count("T") ? f.at("T") : "");
  std::string item;
  while (std::getline(triples, item, ';')) {
    if (item.empty()) continue;
    std::array<std::uint32_t, 3> tr{};
    char c1 = 0, c2 = 0;
    std::istringstream one(item);
    if (!(one >> tr[0] >> c1 >> tr[1] >> c2 >> tr[2]) || c1 != ',' || c2 != ',')
      throw ParseError("malformed triple '" + item + "'", 0);
    t.triples.push_back(tr);
  }
  t.validate();
  return t;
}

inline RiffleInstance parse_riffle(const std::string& text) {
  const auto f = detail::record_fields(text, "RIFFLE");
  RiffleInstance r;
  std::istringstream packets(detail::required(f, "packets"));
  std::string item;
  while (std::getline(packets, item, '|')) r.packets.push_back(parse_deck(item));
  r.deck = parse_deck(detail::required(f, "deck"));
  return r;
}

inline MinCutsInstance parse_mincuts(const std::string& text) {
  const auto f = detail::record_fields(text, "MINCUTS");
  return MinCutsInstance{parse_deck(detail::required(f, "d1")), parse_deck(detail::required(f, "d2")),
                         std::stoul(detail::required(f, "d"))};
}

// ---------------------------------------------------------------------------
// Reductions

namespace detail {

inline std::vector<std::size_t> occurrences(const ThreeDMInstance& t, std::size_t coord) {
  std::vector<std::size_t> occ(t.m + 1, 0);
  for (const auto& tr : t.triples) ++occ[tr[coord]];
  return occ;
}

// Builds the RIFFLE instance with a caller-supplied encoding of each element.
// `element(kind, i)` appends the cards for x_i (kind 0), y_i (1) or z_i (2);
// `separator` is the card closing every packet.
template <typename Encode>
RiffleInstance build_3dm_riffle(const ThreeDMInstance& t, Encode&& element, Label separator) {
  t.validate();
  if (t.triples.empty()) throw Error("3DM instance needs at least one triple");
  RiffleInstance r;
  for (const auto& tr : t.triples) {
    std::vector<Label> packet;
    for (std::size_t k = 0; k < 3; ++k) element(packet, k, tr[k]);
    packet.push_back(separator);
    r.packets.emplace_back(std::move(packet));
  }
  std::vector<Label> deck;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::uint32_t i = 1; i <= t.m; ++i) element(deck, k, i);
  deck.insert(deck.end(), t.m, separator);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto occ = occurrences(t, k);
    for (std::uint32_t i = 1; i <= t.m; ++i) {
      const std::size_t extra = occ[i] == 0 ? 0 : occ[i] - 1;
      for (std::size_t e = 0; e < extra; ++e) element(deck, k, i);
    }
  }
  const std::size_t tcount = t.triples.size();
  deck.insert(deck.end(), tcount > t.m ? tcount - t.m : 0, separator);
  r.deck = Deck(std::move(deck));
  return r;
}

}  // namespace detail

// Labels x_i, y_i, z_i and L; one packet x_i,y_j,z_k,L per triple.
inline RiffleInstance reduce_3dm_to_riffle(const ThreeDMInstance& t) {
  const Label L = label("L");
  const char* prefix[3] = {"x", "y", "z"};
  return detail::build_3dm_riffle(
      t, [&](std::vector<Label>& out, std::size_t kind, std::uint32_t i) {
        out.push_back(label(prefix[kind] + std::to_string(i)));
      },
      L);
}

// Three labels only: x_i -> [ c^i ], y_i -> [ c^{m+i} ], z_i -> [ c^{2m+i} ], L -> c.
inline RiffleInstance reduce_3dm_to_riffle_3labels(const ThreeDMInstance& t) {
  const Label open = label("["), close = label("]"), c = label("c");
  return detail::build_3dm_riffle(
      t, [&](std::vector<Label>& out, std::size_t kind, std::uint32_t i) {
        out.push_back(open);
        out.insert(out.end(), kind * t.m + i, c);
        out.push_back(close);
      },
      c);
}

// Same encoding under the name of the four-label variant it starts from; the
// L cards become c, leaving three labels.
inline RiffleInstance reduce_3dm_to_riffle_4labels(const ThreeDMInstance& t) {
  return reduce_3dm_to_riffle_3labels(t);
}

// A label token not used by any of the decks: "L", "L'", "L''", ...
inline Label fresh_label(const std::vector<const Deck*>& decks) {
  std::string tok = "L";
  for (;;) {
    const Label l = label(tok);
    bool used = false;
    for (const Deck* d : decks)
      used = used || std::find(d->begin(), d->end(), l) != d->end();
    if (!used) return l;
    tok += '\'';
  }
}

// D1 = P_1 L P_2 L ... P_p, D2 = D L^{p-1}, d = p - 1.
inline MinCutsInstance reduce_riffle_to_mincuts(const RiffleInstance& r) {
  if (r.packets.empty()) throw Error("RIFFLE instance needs at least one packet");
  std::vector<const Deck*> all{&r.deck};
  for (const auto& p : r.packets) all.push_back(&p);
  const Label L = fresh_label(all);
  std::vector<Label> d1, d2(r.deck.begin(), r.deck.end());
  for (std::size_t i = 0; i < r.packets.size(); ++i) {
    if (i) d1.push_back(L);
    d1.insert(d1.end(), r.packets[i].begin(), r.packets[i].end());
  }
  d2.insert(d2.end(), r.packets.size() - 1, L);
  return MinCutsInstance{Deck(std::move(d1)), Deck(std::move(d2)), r.packets.size() - 1};
}

// ---------------------------------------------------------------------------
// Brute-force solvers. Each returns a witness when the answer is YES.

struct SolverCaps {
  std::size_t max_3dm_m = 5;
  std::uint64_t max_states = 20'000'000;
};

// Indices into t.triples forming a perfect matching.
inline std::optional<std::vector<std::size_t>> solve_3dm_bruteforce(const ThreeDMInstance& t,
                                                                    const SolverCaps& caps = {}) {
  t.validate();
  if (t.m > caps.max_3dm_m) throw CapExceeded("3DM instance larger than m cap");
  std::vector<bool> used_y(t.m + 1, false), used_z(t.m + 1, false);
  std::vector<std::size_t> chosen;
  std::function<bool(std::uint32_t)> cover = [&](std::uint32_t x) {
    if (x > t.m) return true;
    for (std::size_t i = 0; i < t.triples.size(); ++i) {
      const auto& tr = t.triples[i];
      if (tr[0] != x || used_y[tr[1]] || used_z[tr[2]]) continue;
      used_y[tr[1]] = used_z[tr[2]] = true;
      chosen.push_back(i);
      if (cover(x + 1)) return true;
      chosen.pop_back();
      used_y[tr[1]] = used_z[tr[2]] = false;
    }
    return false;
  };
  if (t.m == 0) return std::vector<std::size_t>{};
  if (cover(1)) return chosen;
  return std::nullopt;
}

inline bool check_3dm_witness(const ThreeDMInstance& t, const std::vector<std::size_t>& matching) {
  if (matching.size() != t.m) return false;
  std::set<std::uint32_t> xs, ys, zs;
  for (auto i : matching) {
    if (i >= t.triples.size()) return false;
    xs.insert(t.triples[i][0]);
    ys.insert(t.triples[i][1]);
    zs.insert(t.triples[i][2]);
  }
  return xs.size() == t.m && ys.size() == t.m && zs.size() == t.m;
}

namespace detail {

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : v) h = (h ^ x) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

// Drop schedule: entry i is the packet whose next card becomes deck card i.
// Memoized search over packet pointer tuples; identical packets are
// interchangeable, so their pointers are sorted in the memo key.
inline std::optional<std::vector<std::size_t>> solve_riffle_bruteforce(const RiffleInstance& r,
                                                                       const SolverCaps& caps = {}) {
  std::size_t total = 0;
  for (const auto& p : r.packets) total += p.size();
  if (total != r.deck.size()) return std::nullopt;
  std::vector<Label> all;
  for (const auto& p : r.packets) all.insert(all.end(), p.begin(), p.end());
  if (Deck(all).signature() != r.deck.signature()) return std::nullopt;

  const std::size_t p = r.packets.size();
  std::vector<std::size_t> group(p);
  for (std::size_t i = 0; i < p; ++i) {
    group[i] = i;
    for (std::size_t j = 0; j < i; ++j)
      if (r.packets[j] == r.packets[i]) {
        group[i] = group[j];
        break;
      }
  }
  std::vector<std::uint32_t> ptr(p, 0);
  std::vector<std::size_t> schedule;
  std::unordered_map<std::vector<std::uint32_t>, bool, detail::VectorHash> failed;
  auto key = [&] {
    std::vector<std::uint32_t> k(ptr);
    for (std::size_t g = 0; g < p; ++g) {
      std::vector<std::uint32_t> members;
      for (std::size_t i = 0; i < p; ++i)
        if (group[i] == g) members.push_back(ptr[i]);
      std::sort(members.begin(), members.end());
      std::size_t m = 0;
      for (std::size_t i = 0; i < p; ++i)
        if (group[i] == g) k[i] = members[m++];
    }
    return k;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t pos) {
    if (pos == r.deck.size()) return true;
    auto k = key();
    if (failed.count(k)) return false;
    for (std::size_t i = 0; i < p; ++i) {
      if (ptr[i] >= r.packets[i].size() || r.packets[i][ptr[i]] != r.deck[pos]) continue;
      ++ptr[i];
      schedule.push_back(i);
      if (search(pos + 1)) return true;
      schedule.pop_back();
      --ptr[i];
    }
    if (failed.size() >= caps.max_states) throw CapExceeded("RIFFLE search exceeds state cap");
    failed.emplace(std::move(k), true);
    return false;
  };
  if (search(0)) return schedule;
  return std::nullopt;
}

inline bool check_riffle_witness(const RiffleInstance& r, const std::vector<std::size_t>& schedule) {
  if (schedule.size() != r.deck.size()) return false;
  std::vector<std::size_t> ptr(r.packets.size(), 0);
  for (std::size_t pos = 0; pos < schedule.size(); ++pos) {
    const auto i = schedule[pos];
    if (i >= r.packets.size() || ptr[i] >= r.packets[i].size()) return false;
    if (r.packets[i][ptr[i]++] != r.deck[pos]) return false;
  }
  for (std::size_t i = 0; i < r.packets.size(); ++i)
    if (ptr[i] != r.packets[i].size()) return false;
  return true;
}

// A member of Pi(d1; d2) with at most d descents. Such a permutation cuts d1
// into at most d+1 consecutive blocks whose cards land in increasing target
// positions, so d2 is an interleaving of those blocks. The search fills d2
// left to right; a state is the list of started blocks, each an interval
// [start, next) of consumed source positions. A new block may start anywhere
// in the unconsumed part. Failed states are memoized, and a state is pruned
// when the remaining segments need more blocks than the budget allows (each
// segment is split greedily into subsequences of the rest of d2).
inline std::optional<Permutation> solve_mincuts_bruteforce(const MinCutsInstance& mc, const SolverCaps& caps = {}) {
  const std::size_t n = mc.d1.size();
  if (mc.d2.size() != n || mc.d1.signature() != mc.d2.signature()) return std::nullopt;
  if (n == 0) return Permutation{};
  const std::size_t budget = std::min(mc.d, n - 1) + 1;
  const auto& D1 = mc.d1;
  const auto& D2 = mc.d2;

  // next_in_d2[j][c]: first position >= j of label c in d2 (n if none)
  std::vector<Label> labels;
  for (const auto& [l, cnt] : D1.signature()) labels.push_back(l);
  auto label_index = [&](Label l) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
  };
  const std::size_t h = labels.size();
  std::vector<std::uint32_t> next_in_d2((n + 1) * h, static_cast<std::uint32_t>(n));
  for (std::size_t j = n; j-- > 0;) {
    for (std::size_t c = 0; c < h; ++c) next_in_d2[j * h + c] = next_in_d2[(j + 1) * h + c];
    next_in_d2[j * h + label_index(D2[j])] = static_cast<std::uint32_t>(j);
  }
  std::vector<std::size_t> cls1(n);
  for (std::size_t i = 0; i < n; ++i) cls1[i] = label_index(D1[i]);

  using Interval = std::pair<std::uint32_t, std::uint32_t>;  // [start, next)
  std::vector<Interval> blocks;
  std::vector<std::uint32_t> source_of(n);

  // pieces needed to cover d1[lo, hi) by subsequences of d2[j, n)
  auto pieces = [&](std::size_t lo, std::size_t hi, std::size_t j) {
    std::size_t count = 0;
    std::size_t at = n;  // forces a fresh piece at the first card
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t nx = at < n ? next_in_d2[(at + 1) * h + cls1[i]] : n;
      if (nx >= n) {
        ++count;
        nx = next_in_d2[j * h + cls1[i]];
        if (nx >= n) return n + 1;  // cannot happen with equal multisets
      }
      at = nx;
    }
    return count;
  };
  auto needed = [&](std::size_t j) {
    std::size_t total = blocks.size();
    const std::size_t first = blocks.empty() ? n : blocks.front().first;
    total += pieces(0, first, j);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const std::size_t limit = k + 1 < blocks.size() ? blocks[k + 1].first : n;
      const std::size_t p = pieces(blocks[k].second, limit, j);
      // the tail continues block k; only extra pieces cost new blocks
      total += p == 0 ? 0 : p - 1;
    }
    return total;
  };

  struct KeyHash {
    std::size_t operator()(const std::vector<Interval>& v) const {
      std::uint64_t x = 0xcbf29ce484222325ULL;
      for (const auto& [a, b] : v) x = (x ^ (std::uint64_t{a} << 32 | b)) * 0x100000001b3ULL;
      return static_cast<std::size_t>(x ^ (x >> 31));
    }
  };
  std::unordered_set<std::vector<Interval>, KeyHash> failed;

  std::function<bool(std::size_t)> search = [&](std::size_t j) {
    if (j == n) return true;
    if (needed(j) > budget) return false;
    if (failed.count(blocks)) return false;
    const Label want = D2[j];
    // extend a started block
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const std::uint32_t limit = k + 1 < blocks.size() ? blocks[k + 1].first : static_cast<std::uint32_t>(n);
      const std::uint32_t q = blocks[k].second;
      if (q < limit && D1[q] == want) {
        source_of[j] = q;
        ++blocks[k].second;
        const bool ok = search(j + 1);
        --blocks[k].second;
        if (ok) return true;
      }
    }
    // start a new block at an unconsumed position (not at a block's own head)
    for (std::size_t k = 0; k <= blocks.size(); ++k) {
      const std::uint32_t lo = k == 0 ? 0 : blocks[k - 1].second + 1;
      const std::uint32_t hi = k < blocks.size() ? blocks[k].first : static_cast<std::uint32_t>(n);
      for (std::uint32_t s = lo; s < hi; ++s) {
        if (D1[s] != want) continue;
        const auto at = blocks.begin() + static_cast<std::ptrdiff_t>(k);
        blocks.insert(at, Interval{s, s + 1});
        source_of[j] = s;
        const bool ok = search(j + 1);
        blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(k));
        if (ok) return true;
      }
    }
    if (failed.size() >= caps.max_states) throw CapExceeded("MIN CUTS search exceeds state cap");
    failed.insert(blocks);
    return false;
  };
  if (!search(0)) return std::nullopt;
  std::vector<std::uint32_t> images(n);
  for (std::size_t j = 0; j < n; ++j) images[source_of[j]] = static_cast<std::uint32_t>(j);
  return Permutation(images);
}

inline bool check_mincuts_witness(const MinCutsInstance& mc, const Permutation& p) {
  return is_transition(p, mc.d1, mc.d2) && descents(p) <= mc.d;
}

// ---------------------------------------------------------------------------
// Random instances and the equivalence battery

// Random 3DM instance with m in 1..max_m and up to max_t distinct triples; half
// of the instances contain a planted perfect matching.
template <typename Rng>
ThreeDMInstance random_3dm(Rng& rng, std::size_t max_m = 4, std::size_t max_t = 6) {
  ThreeDMInstance t;
  t.m = std::uniform_int_distribution<std::size_t>(1, max_m)(rng);
  const std::size_t cube = t.m * t.m * t.m;
  const std::size_t count = std::min(cube, std::uniform_int_distribution<std::size_t>(1, max_t)(rng));
  std::set<std::array<std::uint32_t, 3>> chosen;
  if (std::bernoulli_distribution(0.5)(rng) && t.m <= count) {
    std::vector<std::uint32_t> ys(t.m), zs(t.m);
    std::iota(ys.begin(), ys.end(), 1u);
    std::iota(zs.begin(), zs.end(), 1u);
    std::shuffle(ys.begin(), ys.end(), rng);
    std::shuffle(zs.begin(), zs.end(), rng);
    for (std::uint32_t x = 1; x <= t.m; ++x) chosen.insert({x, ys[x - 1], zs[x - 1]});
  }
  std::uniform_int_distribution<std::uint32_t> coord(1, static_cast<std::uint32_t>(t.m));
  while (chosen.size() < count) chosen.insert({coord(rng), coord(rng), coord(rng)});
  t.triples.assign(chosen.begin(), chosen.end());
  std::shuffle(t.triples.begin(), t.triples.end(), rng);
  return t;
}

struct BatteryEntry {
  ThreeDMInstance instance;
  bool matching = false;
  bool riffle = false, riffle_3labels = false;
  bool mincuts = false, mincuts_3labels = false;
  bool witnesses_ok = true;

  bool agree() const {
    return matching == riffle && riffle == riffle_3labels && riffle == mincuts && mincuts == mincuts_3labels &&
           witnesses_ok;
  }
};

inline BatteryEntry run_battery_instance(const ThreeDMInstance& t, const SolverCaps& caps = {}) {
  BatteryEntry e;
  e.instance = t;
  const auto m = solve_3dm_bruteforce(t, caps);
  e.matching = m.has_value();
  if (m) e.witnesses_ok = e.witnesses_ok && check_3dm_witness(t, *m);

  auto run = [&](const RiffleInstance& r, bool& riffle_yes, bool& mincuts_yes) {
    const auto s = solve_riffle_bruteforce(r, caps);
    riffle_yes = s.has_value();
    if (s) e.witnesses_ok = e.witnesses_ok && check_riffle_witness(r, *s);
    const auto mc = reduce_riffle_to_mincuts(r);
    const auto w = solve_mincuts_bruteforce(mc, caps);
    mincuts_yes = w.has_value();
    if (w) e.witnesses_ok = e.witnesses_ok && check_mincuts_witness(mc, *w);
  };
  run(reduce_3dm_to_riffle(t), e.riffle, e.mincuts);
  run(reduce_3dm_to_riffle_3labels(t), e.riffle_3labels, e.mincuts_3labels);
  return e;
}

struct BatterySummary {
  std::size_t count = 0, agreeing = 0, yes = 0;
  std::vector<BatteryEntry> disagreements;
};

inline BatterySummary run_battery(std::size_t count, std::uint64_t seed, std::size_t max_m = 4,
                                  std::size_t max_t = 6, const SolverCaps& caps = {}) {
  std::mt19937_64 rng(seed);
  BatterySummary s;
  for (std::size_t i = 0; i < count; ++i) {
    const auto e = run_battery_instance(random_3dm(rng, max_m, max_t), caps);
    ++s.count;
    if (e.agree())
      ++s.agreeing;
    else
      s.disagreements.push_back(e);
    s.yes += e.matching;
  }
  return s;
}

}  // namespace riffle
