// Acceptance run: one PASS/FAIL line per criterion, with timings.
// The desk-scale Blackjack1 check runs only with --long or RIFFLE_ACCEPT_LONG=1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "riffle/riffle.hpp"
#include "riffle_cli.hpp"

using namespace riffle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.2fs, limit %.0fs%s]\n", pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              secs, limit_seconds, in_time ? "" : ", too slow");
  std::fflush(stdout);
}

// Brute-force first and second moments of des over Pi(D1; D2) by backtracking.
struct Sums {
  std::uint64_t count = 0, s1 = 0, s2 = 0;
};

struct Backtrack {
  std::vector<std::vector<std::uint32_t>> candidates;  // targets carrying each source card's label
  Sums sums;

  void run(std::size_t i, std::uint32_t last, std::uint64_t des, std::uint32_t used) {
    if (i == candidates.size()) {
      ++sums.count;
      sums.s1 += des;
      sums.s2 += des * des;
      return;
    }
    for (auto t : candidates[i])
      if (!((used >> t) & 1u)) run(i + 1, t, des + (i > 0 && last > t ? 1 : 0), used | (1u << t));
  }
};

oracle::Moments brute_moments(const Deck& d1, const Deck& d2) {
  Backtrack bt;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    bt.candidates.emplace_back();
    for (std::size_t t = 0; t < d2.size(); ++t)
      if (d2[t] == d1[i]) bt.candidates.back().push_back(static_cast<std::uint32_t>(t));
  }
  bt.run(0, 0, 0, 0);
  const Rational total(from_u64(bt.sums.count));
  oracle::Moments m;
  m.mean = Rational(from_u64(bt.sums.s1)) / total;
  m.variance = Rational(from_u64(bt.sums.s2)) / total - m.mean * m.mean;
  return m;
}

Integer label_factorials(const Deck& d) {
  Integer r = 1;
  for (const auto& [l, c] : d.signature()) r *= factorial(c);
  return r;
}

// Decks of the oracle battery grouped by source: every 2-label deck with
// n <= 10 against every rearrangement, then 100 random 3-label pairs.
struct BatteryStats {
  std::size_t pairs = 0, bad_sum = 0, bad_prob = 0, bad_moments = 0;
};

void check_pair(const Deck& d1, const Deck& d2, std::uint64_t outcome_count, BatteryStats& st) {
  ++st.pairs;
  const auto poly = exact_descent_polynomial(d1, d2);
  if (poly.total() != label_factorials(d1)) ++st.bad_sum;
  if (transition_probability(poly, 2) != make_rational(from_u64(outcome_count), oracle::ipow(2, d1.size())))
    ++st.bad_prob;
}

// Moments against brute-force enumeration of Pi(D1; D2); the n = 10 layer
// (10! * 1024 members in total) is compared with the moments of the exact
// polynomial instead, which the previous criterion checks against the
// digit-sequence enumeration.
void check_moments(const Deck& d1, const Deck& d2, BatteryStats& st) {
  ++st.pairs;
  const auto got = descent_moments(d1, d2);
  const auto ref = d1.size() <= 9 ? brute_moments(d1, d2)
                                  : oracle::moments_of(exact_descent_polynomial(d1, d2).coefficients);
  if (got.mu != ref.mean || got.sigma2 != ref.variance) ++st.bad_moments;
}

BatteryStats run_oracle_battery(bool moments) {
  BatteryStats st;
  auto visit = [&](const Deck& d1, const Deck& d2, const std::map<std::vector<Label>, std::uint64_t>* outcomes) {
    if (moments) return check_moments(d1, d2, st);
    const auto it = outcomes->find(std::vector<Label>(d2.begin(), d2.end()));
    check_pair(d1, d2, it == outcomes->end() ? 0 : it->second, st);
  };
  for (std::size_t n = 1; n <= 10; ++n)
    for (std::size_t k = 0; k <= n; ++k) {
      const auto decks = oracle::two_label_decks(n, k);
      for (const auto& d1 : decks) {
        std::map<std::vector<Label>, std::uint64_t> outcomes;
        if (!moments) outcomes = oracle::riffle_outcomes(d1, 2);
        for (const auto& d2 : decks) visit(d1, d2, &outcomes);
      }
    }
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    auto [d1, d2] = oracle::random_pair(rng, 1 + i % 9, 3);
    std::map<std::vector<Label>, std::uint64_t> outcomes;
    if (!moments) outcomes = oracle::riffle_outcomes(d1, 2);
    visit(d1, d2, &outcomes);
  }
  return st;
}

std::string str(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  bool long_run = false;
  for (int i = 1; i < argc; ++i) long_run |= std::string(argv[i]) == "--long";
  if (const char* env = std::getenv("RIFFLE_ACCEPT_LONG")) long_run |= std::string(env) == "1";
  const unsigned threads = default_thread_count();

  criterion(1, "Bayer-Diaconis row n=52, k=1..10 within 0.0005", 1, [] {
    const char* args[] = {"riffle", "bd", "--n", "52", "--shuffles", "1..10"};
    std::ostringstream out, err;
    if (cli::run(6, args, out, err) != 0) return Outcome{false, err.str()};
    const double table[] = {1, 1, 1, 1, .924, .614, .334, .167, .085, .043};
    const auto rows = parse_csv(out.str());
    double worst = 0;
    std::string values;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      worst = std::max(worst, std::abs(rows[i].value - table[i]));
      values += (i ? "," : "") + detail::fixed6(rows[i].value);
    }
    return Outcome{rows.size() == 10 && worst <= 0.0005, values + " max dev " + str(worst)};
  });

  criterion(2, "polynomial -> probabilities -> polynomial round trip, 500 pairs n<=8", 10, [] {
    std::mt19937_64 rng(11);
    int bad = 0;
    for (int i = 0; i < 500; ++i) {
      const std::size_t n = 1 + rng() % 8;
      auto [d1, d2] = oracle::random_pair(rng, n, 1 + static_cast<unsigned>(rng() % 4));
      const auto poly = exact_descent_polynomial(d1, d2);
      std::vector<Rational> p;
      for (std::size_t a = 1; a <= n; ++a) p.push_back(transition_probability(poly, from_u64(a)));
      if (!(probabilities_to_polynomial(p, n) == poly)) ++bad;
    }
    return Outcome{bad == 0, std::to_string(500 - bad) + "/500 exact"};
  });

  criterion(3, "oracle battery: coefficient sums and a=2 probabilities vs digit enumeration", 120, [] {
    const auto st = run_oracle_battery(false);
    return Outcome{st.bad_sum == 0 && st.bad_prob == 0,
                   std::to_string(st.pairs) + " pairs, " + std::to_string(st.bad_sum) + " sum mismatches, " +
                       std::to_string(st.bad_prob) + " probability mismatches"};
  });

  criterion(4, "descent mean/variance vs brute force on the oracle battery", 120, [] {
    const auto st = run_oracle_battery(true);
    std::size_t degenerate_bad = 0;
    for (std::size_t n0 = 1; n0 <= 5; ++n0) {
      const Deck d1 = parse_deck("(1,2)^" + std::to_string(n0));
      const Deck d2 = parse_deck("1^" + std::to_string(n0) + ",2^" + std::to_string(n0));
      const auto m = descent_moments(d1, d2);
      const auto ref = brute_moments(d1, d2);
      if (m.mu != ref.mean || m.sigma2 != ref.variance || m.sigma2 != 0) ++degenerate_bad;
    }
    return Outcome{st.bad_moments == 0 && degenerate_bad == 0,
                   std::to_string(st.pairs) + " pairs, " + std::to_string(st.bad_moments) + " mismatches; degenerate " +
                       std::to_string(5 - degenerate_bad) + "/5 with sigma^2=0"};
  });

  criterion(5, "Monte Carlo calibration R^6,B^6 at a=4, k=1e4", 300, [threads] {
    const Scenario s("R6B6", ScenarioKind::FixedSource, parse_deck("R^6,B^6"));
    const double exact = exact_tvd_small(s, 4).get_d();
    const std::uint64_t k = 10'000;
    const double bound = std::sqrt(10.0) / std::sqrt(static_cast<double>(k));
    int inside = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
      const auto est = mc_tvd(s, 4, k, 1000 + run, ExactBackend{}, McTvdOptions{threads, kDefaultStreamCount});
      inside += std::abs(est.value - exact) <= bound;
    }
    return Outcome{inside >= 90, std::to_string(inside) + "/100 within " + str(bound) + " of exact " + str(exact)};
  });

  criterion(6, "histogram convergence 1^5,2^5 -> (1,2)^5", 60, [threads] {
    const Deck d1 = parse_deck("1^5,2^5"), d2 = parse_deck("(1,2)^5");
    const auto poly = exact_descent_polynomial(d1, d2);
    const double total = poly.total().get_d();
    std::vector<double> tv;
    std::string detail;
    for (std::uint64_t l = 1000; l <= 1'000'000; l *= 10) {
      const auto h = mc_descent_histogram(d1, d2, l, 5, threads);
      double dist = 0;
      for (std::size_t d = 0; d < h.counts.size(); ++d)
        dist += std::abs(static_cast<double>(h.counts[d]) / static_cast<double>(l) - poly[d].get_d() / total);
      tv.push_back(dist / 2);
      detail += (detail.empty() ? "" : ", ") + str(tv.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < tv.size(); ++i) decreasing &= tv[i] < tv[i - 1];
    return Outcome{decreasing && tv.back() < 0.005, "TV " + detail};
  });

  criterion(7, "degree-4 tail fit on R^8,B^8 -> (R,B)^8 predicts two below window", 60, [threads] {
    const Deck d1 = parse_deck("R^8,B^8"), d2 = parse_deck("(R,B)^8");
    const auto poly = exact_descent_polynomial(d1, d2);
    const auto h = mc_descent_histogram(d1, d2, 1'000'000, 7, threads);
    TailFitConfig cfg;
    cfg.degree = 4;
    const auto ex = tail_extrapolate(h, cfg);
    if (ex.fit.window_lo < 2) return Outcome{false, "window starts at degree " + std::to_string(ex.fit.window_lo)};
    const std::size_t d = ex.fit.window_lo - 2;
    const double want = poly[d].get_d(), got = ex.fit.value(static_cast<double>(d));
    const double rel = std::abs(got - want) / want;
    return Outcome{rel <= 0.25, "window [" + std::to_string(ex.fit.window_lo) + "," + std::to_string(ex.fit.window_hi) +
                                    "], c_" + std::to_string(d) + " predicted " + str(got) + " exact " + str(want) +
                                    " rel err " + str(rel)};
  });

  criterion(8, "hardness battery: 200 instances, m<=4, |T|<=6, seed 7", 300, [] {
    const auto s = run_battery(200, 7, 4, 6);
    return Outcome{s.agreeing == s.count && s.count == 200,
                   std::to_string(s.agreeing) + "/" + std::to_string(s.count) + " agree (" + std::to_string(s.yes) +
                       " YES)"};
  });

  if (long_run) {
    criterion(9, "Blackjack1, 5 shuffles, histogram backend l=1e7, k=1e3 in [0.185, 0.26]", 6 * 3600.0,
              [threads] {
                const auto s = *find_scenario("Blackjack1");
                auto cache = HistogramCache::from_environment();
                HistogramBackend backend;
                backend.samples = 10'000'000;
                backend.streams = kDefaultStreamCount;
                backend.cache = cache ? &*cache : nullptr;
                const auto est = mc_tvd(s, base_for_riffles(5), 1000, 1, backend, McTvdOptions{threads, kDefaultStreamCount});
                return Outcome{est.value >= 0.185 && est.value <= 0.26, "TVD " + detail::fixed6(est.value)};
              });
  } else {
    std::printf("SKIP  9 Blackjack1 desk-scale check (run with --long or RIFFLE_ACCEPT_LONG=1)\n");
  }

  criterion(10, "explorers: mod-h totals and Eulerian rows, class partitions n<=6", 60, [] {
    std::string detail;
    bool ok = true;
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t h = 1; h <= 3; ++h) {
        const auto c = mod_h_descent_counts(n, h);
        std::uint64_t total = 0;
        for (auto x : c) total += x;
        ok &= from_u64(total) == power(static_cast<unsigned long>(factorial(n).get_ui()), h);
        if (h == 1) {
          const auto row = eulerian_row(n);
          for (std::size_t d = 0; d < n; ++d) ok &= from_u64(c[d]) == row.values[d];
          for (std::size_t d = n; d < c.size(); ++d) ok &= c[d] == 0;
        }
      }
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto cc = r_equivalence_classes(n);
      ok &= from_u64(cc.sequences) == binomial(2 * n, n) && cc.class_of.size() == cc.sequences;
      std::vector<std::uint64_t> sizes(cc.classes, 0);
      for (auto id : cc.class_of) ok &= id < cc.classes && ++sizes[id] > 0;
      for (auto s : sizes) ok &= s > 0;
      detail += (detail.empty() ? "classes " : ",") + std::to_string(cc.classes);
    }
    return Outcome{ok, detail};
  });

  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
