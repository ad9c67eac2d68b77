#include <gtest/gtest.h>

#include "oracles.hpp"
#include "riffle/riffle.hpp"

using namespace riffle;
using oracle::digits_deck;

namespace {

ThreeDMInstance tdm(std::size_t m, std::vector<std::array<std::uint32_t, 3>> t) { return ThreeDMInstance{m, t}; }

std::string str(const Deck& d) {
  std::string s;
  for (auto c : d) s += token(c);
  return s;
}

// Smallest descent count over Pi(d1; d2), by enumeration.
std::size_t min_descents(const Deck& d1, const Deck& d2) {
  std::size_t best = d1.size();
  for_each_transition(d1, d2, [&](std::span<const std::uint32_t> p) {
    best = std::min(best, descents(p));
    return true;
  });
  return best;
}

// Is `deck` an interleaving of the packets? Plain recursion without memo.
bool interleaves(const std::vector<Deck>& packets, std::vector<std::size_t>& at, const Deck& deck, std::size_t j) {
  if (j == deck.size()) return true;
  for (std::size_t p = 0; p < packets.size(); ++p) {
    if (at[p] < packets[p].size() && packets[p][at[p]] == deck[j]) {
      ++at[p];
      const bool ok = interleaves(packets, at, deck, j + 1);
      --at[p];
      if (ok) return true;
    }
  }
  return false;
}

bool riffle_oracle(const RiffleInstance& r) {
  std::size_t total = 0;
  for (const auto& p : r.packets) total += p.size();
  if (total != r.deck.size()) return false;
  std::vector<std::size_t> at(r.packets.size(), 0);
  return interleaves(r.packets, at, r.deck, 0);
}

// Brackets are balanced and never nested.
bool flat_brackets(const Deck& d) {
  int depth = 0;
  for (auto c : d) {
    const auto t = token(c);
    if (t == "[") {
      if (depth != 0) return false;
      ++depth;
    } else if (t == "]") {
      if (depth != 1) return false;
      --depth;
    }
  }
  return depth == 0;
}

}  // namespace

TEST(Records, RoundTrip) {
  const auto t = tdm(3, {{1, 2, 3}, {3, 1, 2}, {2, 3, 1}});
  EXPECT_EQ(parse_3dm(format_instance(t)), t);
  const auto r = reduce_3dm_to_riffle(t);
  EXPECT_EQ(parse_riffle(format_instance(r)), r);
  const auto mc = reduce_riffle_to_mincuts(r);
  EXPECT_EQ(parse_mincuts(format_instance(mc)), mc);
  const auto r3 = reduce_3dm_to_riffle_3labels(t);
  EXPECT_EQ(parse_riffle(format_instance(r3)), r3);
  EXPECT_THROW(parse_3dm("3DM m=2 T=1,2,3"), Error);
  EXPECT_THROW(parse_3dm("RIFFLE m=2"), ParseError);
  EXPECT_THROW(parse_mincuts("MINCUTS d1=1,2 d=1"), ParseError);
}

TEST(Reduce3dm, SingleTriple) {
  const auto r = reduce_3dm_to_riffle(tdm(1, {{1, 1, 1}}));
  ASSERT_EQ(r.packets.size(), 1u);
  EXPECT_EQ(to_expression(r.packets[0]), "x1,y1,z1,L");
  EXPECT_EQ(to_expression(r.deck), "x1,y1,z1,L");
  EXPECT_TRUE(solve_3dm_bruteforce(tdm(1, {{1, 1, 1}})).has_value());
  EXPECT_TRUE(solve_riffle_bruteforce(r).has_value());
}

TEST(Reduce3dm, DeckLayout) {
  // x2 occurs twice, y1 twice, z1 once, z2 once; t = 3 > m = 2
  const auto t = tdm(2, {{2, 1, 1}, {2, 1, 2}, {1, 2, 1}});
  const auto r = reduce_3dm_to_riffle(t);
  EXPECT_EQ(to_expression(r.deck), "x1,x2,y1,y2,z1,z2,L^2,x2,y1,z1,L");
  EXPECT_EQ(r.packets.size(), 3u);
  const Deck all = [&] {
    std::vector<Label> v;
    for (const auto& p : r.packets) v.insert(v.end(), p.begin(), p.end());
    return Deck(v);
  }();
  EXPECT_TRUE(same_multiset(all, r.deck));
}

TEST(Reduce3dm, Decisions) {
  const auto yes = tdm(2, {{1, 1, 1}, {2, 2, 2}});
  const auto no = tdm(2, {{1, 1, 1}, {1, 1, 2}});
  EXPECT_TRUE(solve_3dm_bruteforce(yes));
  EXPECT_TRUE(solve_riffle_bruteforce(reduce_3dm_to_riffle(yes)));
  EXPECT_FALSE(solve_3dm_bruteforce(no));
  EXPECT_FALSE(solve_riffle_bruteforce(reduce_3dm_to_riffle(no)));
  std::vector<std::array<std::uint32_t, 3>> cube;
  for (std::uint32_t x = 1; x <= 2; ++x)
    for (std::uint32_t y = 1; y <= 2; ++y)
      for (std::uint32_t z = 1; z <= 2; ++z) cube.push_back({x, y, z});
  const auto w = solve_3dm_bruteforce(tdm(2, cube));
  ASSERT_TRUE(w);
  EXPECT_TRUE(check_3dm_witness(tdm(2, cube), *w));
}

TEST(Reduce3dm, ThreeLabelEncoding) {
  const auto r = reduce_3dm_to_riffle_3labels(tdm(1, {{1, 1, 1}}));
  ASSERT_EQ(r.packets.size(), 1u);
  EXPECT_EQ(str(r.packets[0]), "[c][cc][ccc]c");
  EXPECT_EQ(r.deck.signature().size(), 3u);
  EXPECT_EQ(reduce_3dm_to_riffle_4labels(tdm(1, {{1, 1, 1}})), r);

  std::mt19937_64 rng(19);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_3dm(rng, 3, 5);
    const auto plain = reduce_3dm_to_riffle(t);
    const auto enc = reduce_3dm_to_riffle_3labels(t);
    EXPECT_LE(enc.deck.signature().size(), 3u);
    EXPECT_TRUE(flat_brackets(enc.deck));
    for (const auto& p : enc.packets) EXPECT_TRUE(flat_brackets(p));
    EXPECT_EQ(solve_riffle_bruteforce(plain).has_value(), solve_riffle_bruteforce(enc).has_value())
        << format_instance(t);
  }
}

TEST(RiffleToMinCuts, Examples) {
  const RiffleInstance single{{digits_deck("123")}, digits_deck("123")};
  const auto mc = reduce_riffle_to_mincuts(single);
  EXPECT_EQ(mc.d, 0u);
  EXPECT_EQ(mc.d1, mc.d2);
  EXPECT_TRUE(solve_mincuts_bruteforce(mc));

  const RiffleInstance two{{digits_deck("1"), digits_deck("2")}, digits_deck("12")};
  const auto mc2 = reduce_riffle_to_mincuts(two);
  EXPECT_EQ(str(mc2.d1), "1L2");
  EXPECT_EQ(str(mc2.d2), "12L");
  EXPECT_EQ(mc2.d, 1u);
  EXPECT_TRUE(solve_mincuts_bruteforce(mc2));
  EXPECT_TRUE(solve_riffle_bruteforce(two));

  const RiffleInstance inverted{{digits_deck("21")}, digits_deck("12")};
  EXPECT_FALSE(solve_riffle_bruteforce(inverted));
  EXPECT_FALSE(solve_mincuts_bruteforce(reduce_riffle_to_mincuts(inverted)));
}

TEST(RiffleToMinCuts, FreshLabelAvoidsCollisions) {
  const RiffleInstance r{{parse_deck("L,a"), parse_deck("b")}, parse_deck("L,b,a")};
  const auto mc = reduce_riffle_to_mincuts(r);
  EXPECT_EQ(to_expression(mc.d1), "L,a,L',b");
  EXPECT_TRUE(solve_mincuts_bruteforce(mc));
}

TEST(RiffleToMinCuts, ForcedCuts) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    const std::size_t p = 1 + i % 3;
    std::vector<Deck> packets;
    std::string all;
    for (std::size_t k = 0; k < p; ++k) {
      auto [a, b] = oracle::random_pair(rng, 1 + (i + k) % 3, 2);
      packets.push_back(a);
      for (auto c : a) all += token(c);
    }
    std::shuffle(all.begin(), all.end(), rng);
    const RiffleInstance r{packets, digits_deck(all)};
    const auto mc = reduce_riffle_to_mincuts(r);
    EXPECT_GE(min_descents(mc.d1, mc.d2), p - 1);
  }
}

TEST(Solvers, Examples) {
  const RiffleInstance r{{digits_deck("11"), digits_deck("2")}, digits_deck("121")};
  const auto s = solve_riffle_bruteforce(r);
  ASSERT_TRUE(s);
  EXPECT_TRUE(check_riffle_witness(r, *s));
  EXPECT_EQ(*s, (std::vector<std::size_t>{0, 1, 0}));

  const MinCutsInstance zero{digits_deck("1122"), digits_deck("1221"), 0};
  const MinCutsInstance one{digits_deck("1122"), digits_deck("1221"), 1};
  EXPECT_FALSE(solve_mincuts_bruteforce(zero));
  const auto w = solve_mincuts_bruteforce(one);
  ASSERT_TRUE(w);
  EXPECT_TRUE(check_mincuts_witness(one, *w));
  EXPECT_FALSE(solve_mincuts_bruteforce(MinCutsInstance{digits_deck("12"), digits_deck("11"), 1}));
  EXPECT_THROW(solve_3dm_bruteforce(tdm(6, {{1, 1, 1}})), CapExceeded);
}

TEST(Solvers, MinCutsMatchesEnumeration) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + i % 8;
    auto [d1, d2] = oracle::random_pair(rng, n, 1 + i % 4);
    const std::size_t best = min_descents(d1, d2);
    for (std::size_t d = 0; d < n; ++d) {
      const auto w = solve_mincuts_bruteforce(MinCutsInstance{d1, d2, d});
      EXPECT_EQ(w.has_value(), d >= best) << to_expression(d1) << " " << to_expression(d2) << " d=" << d;
      if (w) {
        EXPECT_TRUE(is_transition(*w, d1, d2));
        EXPECT_LE(descents(*w), d);
      }
    }
  }
}

TEST(Solvers, RiffleMatchesPlainRecursion) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 300; ++i) {
    const std::size_t p = 1 + i % 3;
    std::vector<Deck> packets;
    std::string all;
    for (std::size_t k = 0; k < p; ++k) {
      auto [a, b] = oracle::random_pair(rng, 1 + (i + k) % 4, 2 + i % 2);
      packets.push_back(a);
      for (auto c : a) all += token(c);
    }
    if (i % 2) std::shuffle(all.begin(), all.end(), rng);
    const RiffleInstance r{packets, digits_deck(all)};
    const auto s = solve_riffle_bruteforce(r);
    EXPECT_EQ(s.has_value(), riffle_oracle(r)) << format_instance(r);
    if (s) {
      EXPECT_TRUE(check_riffle_witness(r, *s));
    }
  }
}

TEST(Battery, SmallRunAgrees) {
  const auto s = run_battery(60, 3);
  EXPECT_EQ(s.count, 60u);
  EXPECT_EQ(s.agreeing, 60u);
  EXPECT_GT(s.yes, 0u);
  EXPECT_LT(s.yes, 60u);
}

TEST(Battery, DegenerateInstancesStayFaithful) {
  // an element of Y never occurs, and t < m
  for (const auto& t : {tdm(2, {{1, 1, 1}, {2, 1, 2}}), tdm(3, {{1, 2, 3}})}) {
    const auto e = run_battery_instance(t);
    EXPECT_FALSE(e.matching);
    EXPECT_TRUE(e.agree());
  }
}
