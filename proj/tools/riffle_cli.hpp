#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riffle/riffle.hpp"

namespace riffle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

struct Range {
  unsigned lo = 0, hi = 0;
};

// "7" or "1..10"
inline Range parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = static_cast<unsigned>(std::stoul(s));
      return {v, v};
    }
    Range r{static_cast<unsigned>(std::stoul(s.substr(0, dots))),
            static_cast<unsigned>(std::stoul(s.substr(dots + 2)))};
    if (r.hi < r.lo) throw Error("empty range '" + s + "'");
    return r;
  } catch (const std::logic_error&) {
    throw Error("malformed range '" + s + "'");
  }
}

// CLI deck arguments also accept a bare digit string such as "1122", read as
// one single-digit label per character.
inline Deck parse_deck_arg(const std::string& text) {
  if (text.size() > 1 && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::string expr;
    for (char c : text) {
      if (!expr.empty()) expr += ',';
      expr += c;
    }
    return parse_deck(expr);
  }
  return parse_deck(text);
}

inline void print_rows(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& format) {
  out << (format == "csv" ? format_csv(rows) : format_text(rows));
}

struct Options {
  // bd
  std::size_t n = 52;
  std::string shuffles = "1..10";
  std::string format = "csv";
  // tvd
  std::string scenario, deck, kind = "fixed-source", method = "mc", backend = "histogram", window;
  std::uint64_t k = 1000, hist_samples = 100'000, seed = 1, threshold = kDefaultReliableCount;
  std::size_t fit_degree = 0;
  unsigned threads = 1;
  std::uint32_t streams = kDefaultStreamCount;
  std::uint32_t checkpoint_streams = 0;
  std::string cache_dir;
  bool cache_only = false;
  // poly
  std::string source, target, poly_method = "exact";
  // hardness
  std::string record_3dm, record_riffle, record_mincuts;
  std::vector<std::string> mincuts_args;
  bool three_labels = false;
  std::size_t m = 3, t = 4, count = 200, max_m = 4, max_t = 6;
  // explore
  std::size_t h = 1;
};

inline std::unique_ptr<HistogramCache> open_cache(const Options& o) {
  if (!o.cache_dir.empty()) return std::make_unique<HistogramCache>(o.cache_dir);
  if (auto env = HistogramCache::from_environment()) return std::make_unique<HistogramCache>(std::move(*env));
  return nullptr;
}

inline Scenario resolve_scenario(const Options& o) {
  if (!o.scenario.empty()) {
    if (auto s = find_scenario(o.scenario)) return *s;
    throw Error("unknown scenario '" + o.scenario + "'");
  }
  if (o.deck.empty()) throw Error("tvd needs --scenario or --deck");
  return Scenario("custom", parse_scenario_kind(o.kind), parse_deck_arg(o.deck));
}

inline int cmd_bd(const Options& o, std::ostream& out) {
  const auto r = parse_range(o.shuffles);
  std::vector<ResultRow> rows;
  for (unsigned k = r.lo; k <= r.hi; ++k)
    rows.push_back(ResultRow{"BayerDiaconis", k, "exact", bayer_diaconis_tvd(o.n, k), {}, {}, {}, {}});
  print_rows(out, rows, o.format);
  return kExitOk;
}

inline int cmd_tvd(const Options& o, std::ostream& out) {
  const Scenario s = resolve_scenario(o);
  const auto r = parse_range(o.shuffles);
  const auto cache = open_cache(o);
  std::vector<ResultRow> rows;
  for (unsigned k = r.lo; k <= r.hi; ++k) {
    const Integer a = base_for_riffles(k);
    if (o.method == "exact") {
      double v;
      if (s.name == "BayerDiaconis" || (s.anchor.signature().size() == s.anchor.size()))
        v = bayer_diaconis_tvd(s.anchor.size(), k);
      else
        v = exact_tvd_small(s, a).get_d();
      rows.push_back(ResultRow{s.name, k, "exact", v, {}, {}, {}, {}});
      continue;
    }
    if (o.method != "mc") throw Error("unknown method '" + o.method + "'");
    ProbabilityBackend backend;
    std::optional<std::uint64_t> l;
    if (o.backend == "exact") {
      backend = ExactBackend{};
    } else if (o.backend == "normal") {
      backend = NormalBackend{};
    } else if (o.backend == "histogram") {
      HistogramBackend hb;
      hb.samples = o.hist_samples;
      hb.cache = cache.get();
      hb.cache_only = o.cache_only;
      hb.streams = o.streams;
      if (o.fit_degree > 0) {
        TailFitConfig fit;
        fit.degree = o.fit_degree;
        fit.reliable_count = o.threshold;
        if (!o.window.empty()) {
          const auto w = parse_range(o.window);
          fit.window = std::make_pair<std::size_t, std::size_t>(w.lo, w.hi);
        }
        hb.fit = fit;
      }
      backend = hb;
      l = o.hist_samples;
    } else {
      throw Error("unknown backend '" + o.backend + "'");
    }
    McTvdOptions mo;
    mo.threads = o.threads;
    mo.streams = o.streams;
    const auto est = mc_tvd(s, a, o.k, o.seed, backend, mo);
    rows.push_back(ResultRow{s.name, k, method_tag(backend), est.value, o.k, l, o.seed, est.alpha});
  }
  print_rows(out, rows, o.format);
  return kExitOk;
}

inline int cmd_poly(const Options& o, std::ostream& out) {
  const Deck d1 = parse_deck_arg(o.source), d2 = parse_deck_arg(o.target);
  require_same_signature(d1, d2);
  const std::size_t n = d1.size();
  out << "degree,coefficient,provenance\n";
  if (o.poly_method == "exact") {
    const auto p = exact_descent_polynomial(d1, d2);
    for (std::size_t d = 0; d < n; ++d) out << d << ',' << p[d] << ",exact\n";
  } else if (o.poly_method == "mc") {
    const auto cache = open_cache(o);
    HistogramRunOptions run;
    run.threads = o.threads;
    run.streams = o.streams;
    run.checkpoint_streams = o.checkpoint_streams;
    run.cache_only = o.cache_only;
    const auto h = cached_histogram(cache.get(), d1, d2, o.hist_samples, o.seed, run);
    const auto est = histogram_to_polynomial(h);
    for (std::size_t d = 0; d < n; ++d) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", est.values[d].get_d());
      out << d << ',' << buf << ",estimated+-";
      if (h.counts[d] == 0)
        out << "inf";
      else
        out << detail::general6(est.gauges[d]);
      out << " (gamma=" << h.counts[d] << ")\n";
    }
  } else if (o.poly_method == "normal") {
    const auto m = descent_moments(d1, d2);
    const auto M = transition_cardinality(d1, d2);
    out << "# mu=" << m.mu << " sigma2=" << m.sigma2
        << " normal-bound-hypothesis=" << (m.normal_bound_applies ? "holds" : "fails") << '\n';
    if (m.sigma2 == 0) {
      out << "# degenerate descent distribution: sigma^2 = 0, every transition has " << m.mu << " descents\n";
      for (std::size_t d = 0; d < n; ++d)
        out << d << ',' << (Rational(static_cast<unsigned long>(d)) == m.mu ? M : Integer(0)) << ",point-mass\n";
    } else {
      const auto c = normal_coefficient_estimates(n, m, M);
      for (std::size_t d = 0; d < n; ++d) out << d << ',' << detail::general6(c[d]) << ",gaussian\n";
    }
  } else {
    throw Error("unknown poly method '" + o.poly_method + "'");
  }
  return kExitOk;
}

inline int cmd_gen3dm(const Options& o, std::ostream& out) {
  std::mt19937_64 rng(o.seed);
  for (std::size_t i = 0; i < o.count; ++i) out << format_instance(random_3dm(rng, o.max_m, o.max_t)) << '\n';
  return kExitOk;
}

inline int cmd_reduce(const Options& o, std::ostream& out) {
  if (!o.record_3dm.empty()) {
    const auto t = parse_3dm(o.record_3dm);
    const auto r = o.three_labels ? reduce_3dm_to_riffle_3labels(t) : reduce_3dm_to_riffle(t);
    out << format_instance(r) << '\n' << format_instance(reduce_riffle_to_mincuts(r)) << '\n';
    return kExitOk;
  }
  if (!o.record_riffle.empty()) {
    out << format_instance(reduce_riffle_to_mincuts(parse_riffle(o.record_riffle))) << '\n';
    return kExitOk;
  }
  throw Error("reduce needs --3dm or --riffle");
}

inline std::string join(const std::vector<std::uint32_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline int cmd_solve(const Options& o, std::ostream& out) {
  if (!o.record_3dm.empty()) {
    const auto t = parse_3dm(o.record_3dm);
    const auto w = solve_3dm_bruteforce(t);
    out << (w ? "YES" : "NO");
    if (w) {
      out << " matching";
      for (auto i : *w) out << ' ' << t.triples[i][0] << ',' << t.triples[i][1] << ',' << t.triples[i][2];
    }
    out << '\n';
    return kExitOk;
  }
  if (!o.record_riffle.empty()) {
    const auto r = parse_riffle(o.record_riffle);
    const auto w = solve_riffle_bruteforce(r);
    out << (w ? "YES" : "NO");
    if (w) {
      out << " schedule";
      for (auto i : *w) out << ' ' << i + 1;
    }
    out << '\n';
    return kExitOk;
  }
  if (!o.mincuts_args.empty() || !o.record_mincuts.empty()) {
    MinCutsInstance mc;
    if (!o.record_mincuts.empty()) {
      mc = parse_mincuts(o.record_mincuts);
    } else {
      if (o.mincuts_args.size() != 3) throw Error("--mincuts expects D1 D2 d");
      mc = MinCutsInstance{parse_deck_arg(o.mincuts_args[0]), parse_deck_arg(o.mincuts_args[1]),
                           std::stoul(o.mincuts_args[2])};
    }
    const auto w = solve_mincuts_bruteforce(mc);
    out << (w ? "YES" : "NO");
    if (w) out << " permutation " << join(w->one_based()) << " descents " << descents(*w);
    out << '\n';
    return kExitOk;
  }
  throw Error("solve needs --3dm, --riffle or --mincuts");
}

inline int cmd_battery(const Options& o, std::ostream& out) {
  const auto s = run_battery(o.count, o.seed, o.max_m, o.max_t);
  out << s.agreeing << '/' << s.count << " agree (" << s.yes << " YES instances)\n";
  for (const auto& e : s.disagreements)
    out << "disagree: " << format_instance(e.instance) << " 3dm=" << e.matching << " riffle=" << e.riffle
        << " riffle3=" << e.riffle_3labels << " mincuts=" << e.mincuts << " mincuts3=" << e.mincuts_3labels
        << " witnesses=" << e.witnesses_ok << '\n';
  return s.agreeing == s.count ? kExitOk : 1;
}

inline int cmd_classes(const Options& o, std::ostream& out) {
  const auto c = r_equivalence_classes(o.n);
  out << "n=" << c.n << " sequences=" << c.sequences << " classes=" << c.classes << " conjectured=" << c.conjectured
      << '\n';
  return kExitOk;
}

inline int cmd_modh(const Options& o, std::ostream& out) {
  const auto counts = mod_h_descent_counts(o.n, o.h);
  std::uint64_t total = 0;
  std::string line;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    // trailing zero counts past the largest attainable descent are omitted
    total += counts[d];
  }
  std::size_t last = counts.size();
  while (last > 1 && counts[last - 1] == 0) --last;
  for (std::size_t d = 0; d < last; ++d) line += (d ? "," : "") + std::to_string(counts[d]);
  out << "n=" << o.n << " h=" << o.h << " total=" << total << '\n' << line << '\n';
  return kExitOk;
}

// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Riffle shuffle mixing for decks with repeated cards"};
  app.require_subcommand(1);
  Options o;
  int code = kExitOk;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  };

  auto* bd = app.add_subcommand("bd", "Total variation distance for distinct cards (closed form)");
  bd->add_option("--n", o.n, "number of cards")->check(CLI::PositiveNumber);
  bd->add_option("--shuffles", o.shuffles, "riffle count or range lo..hi");
  add_format(bd);

  auto* tvd = app.add_subcommand("tvd", "Total variation distance for a scenario");
  tvd->add_option("--scenario", o.scenario, "built-in scenario name");
  tvd->add_option("--deck", o.deck, "anchor deck expression for a custom scenario");
  tvd->add_option("--kind", o.kind, "fixed-source or fixed-target");
  tvd->add_option("--shuffles", o.shuffles, "riffle count or range lo..hi");
  tvd->add_option("--method", o.method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  tvd->add_option("--backend", o.backend, "probability backend for mc: exact, histogram or normal")
      ->check(CLI::IsMember({"exact", "histogram", "normal"}));
  tvd->add_option("--k", o.k, "number of sampled counterpart decks");
  tvd->add_option("--hist-samples,--l", o.hist_samples, "histogram samples per deck");
  tvd->add_option("--fit-degree", o.fit_degree, "tail extrapolation degree (0: none)");
  tvd->add_option("--window", o.window, "tail fit window lo..hi");
  tvd->add_option("--threshold", o.threshold, "reliable count for automatic fit windows");
  tvd->add_option("--seed", o.seed);
  tvd->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  tvd->add_option("--streams", o.streams, "virtual stream count")->check(CLI::PositiveNumber);
  tvd->add_option("--cache-dir", o.cache_dir, "histogram cache directory (default $RIFFLE_CACHE_DIR)");
  tvd->add_flag("--cache-only", o.cache_only, "fail instead of sampling missing histograms");
  add_format(tvd);

  auto* poly = app.add_subcommand("poly", "Descent polynomial of Pi(source; target)");
  poly->add_option("--source", o.source)->required();
  poly->add_option("--target", o.target)->required();
  poly->add_option("--method", o.poly_method, "exact, mc or normal")->check(CLI::IsMember({"exact", "mc", "normal"}));
  poly->add_option("--l", o.hist_samples, "samples for the mc method");
  poly->add_option("--seed", o.seed);
  poly->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  poly->add_option("--streams", o.streams)->check(CLI::PositiveNumber);
  poly->add_option("--checkpoint-streams", o.checkpoint_streams, "streams between cache checkpoints");
  poly->add_option("--cache-dir", o.cache_dir);
  poly->add_flag("--cache-only", o.cache_only);

  auto* hard = app.add_subcommand("hardness", "3DM / RIFFLE / MIN CUTS reductions and solvers");
  hard->require_subcommand(1);
  auto* gen = hard->add_subcommand("gen3dm", "random 3DM instances");
  gen->add_option("--count", o.count);
  gen->add_option("--max-m", o.max_m);
  gen->add_option("--max-t", o.max_t);
  gen->add_option("--seed", o.seed);
  auto* reduce = hard->add_subcommand("reduce", "reduce an instance");
  reduce->add_option("--3dm", o.record_3dm, "3DM record");
  reduce->add_option("--riffle", o.record_riffle, "RIFFLE record");
  reduce->add_flag("--three-labels", o.three_labels, "bracket encoding over [, ], c");
  auto* solve = hard->add_subcommand("solve", "decide an instance by exhaustive search");
  solve->add_option("--3dm", o.record_3dm);
  solve->add_option("--riffle", o.record_riffle);
  solve->add_option("--mincuts", o.mincuts_args, "D1 D2 d")->expected(3);
  solve->add_option("--mincuts-record", o.record_mincuts);
  auto* battery = hard->add_subcommand("battery", "check reductions on random instances");
  battery->add_option("--count", o.count);
  battery->add_option("--seed", o.seed);
  battery->add_option("--max-m", o.max_m);
  battery->add_option("--max-t", o.max_t);

  auto* explore = app.add_subcommand("explore", "combinatorial explorers");
  explore->require_subcommand(1);
  auto* classes = explore->add_subcommand("classes", "equivalence classes of balanced 1/2 sequences");
  classes->add_option("--n", o.n)->required();
  auto* modh = explore->add_subcommand("modh", "descents of permutations with pi(i) = i mod h");
  modh->set_help_flag("--help", "Print this help message and exit");
  modh->add_option("--n", o.n)->required();
  modh->add_option("--h", o.h)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (bd->parsed()) code = cmd_bd(o, out);
    else if (tvd->parsed()) code = cmd_tvd(o, out);
    else if (poly->parsed()) code = cmd_poly(o, out);
    else if (gen->parsed()) code = cmd_gen3dm(o, out);
    else if (reduce->parsed()) code = cmd_reduce(o, out);
    else if (solve->parsed()) code = cmd_solve(o, out);
    else if (battery->parsed()) code = cmd_battery(o, out);
    else if (classes->parsed()) code = cmd_classes(o, out);
    else if (modh->parsed()) code = cmd_modh(o, out);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return code;
}

}  // namespace riffle::cli
