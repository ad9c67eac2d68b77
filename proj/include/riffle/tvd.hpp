#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riffle/approx.hpp"
#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/descent_poly.hpp"
#include "riffle/histogram_cache.hpp"
#include "riffle/parallel.hpp"
#include "riffle/rng.hpp"
#include "riffle/scenario.hpp"
#include "riffle/shuffle.hpp"

namespace riffle {

// Total variation distance between k riffle shuffles of n distinct cards and
// uniform, grouped by descents: sum_d A(n,d) (1/n! - C(2^k+n-d-1,n)/2^{kn})^+.
inline Rational bayer_diaconis_tvd_exact(std::size_t n, unsigned k_shuffles) {
  if (n == 0) throw Error("deck must have at least one card");
  const auto row = eulerian_row(n);
  const Rational uniform(Integer(1), factorial(n));
  const auto w = shuffle_weights(n, base_for_riffles(k_shuffles));
  Rational tvd = 0;
  for (std::size_t d = 0; d < n; ++d) {
    const Rational gap = uniform - w[d];
    if (gap > 0) tvd += row.values[d] * gap;
  }
  return tvd;
}

inline double bayer_diaconis_tvd(std::size_t n, unsigned k_shuffles) {
  return bayer_diaconis_tvd_exact(n, k_shuffles).get_d();
}

struct ExactTvdOptions {
  std::uint64_t counterpart_cap = 1'000'000;
  ExactOptions oracle;
};

// Calls visit(deck) for each distinct arrangement of the anchor's multiset.
template <typename Visitor>
void for_each_arrangement(const Deck& anchor, Visitor&& visit) {
  std::vector<Label> cards(anchor.begin(), anchor.end());
  std::sort(cards.begin(), cards.end());
  do {
    visit(Deck(cards));
  } while (std::next_permutation(cards.begin(), cards.end()));
}

// sum_i (1/N - p_i)^+ over every counterpart deck, p_i from exact descent polynomials.
inline Rational exact_tvd_small(const Scenario& s, const Integer& a, const ExactTvdOptions& opt = {}) {
  const Integer N = s.counterpart_count();
  if (N > from_u64(opt.counterpart_cap))
    throw CapExceeded("scenario has " + N.get_str() + " counterpart decks, cap is " +
                      std::to_string(opt.counterpart_cap));
  const Rational uniform(Integer(1), N);
  Rational tvd = 0;
  for_each_arrangement(s.anchor, [&](const Deck& other) {
    const auto poly = exact_descent_polynomial(s.source_for(other), s.target_for(other), opt.oracle);
    const Rational gap = uniform - transition_probability(poly, a);
    if (gap > 0) tvd += gap;
  });
  return tvd;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation

struct ExactBackend {
  ExactOptions oracle;
};

struct HistogramBackend {
  std::uint64_t samples = 100'000;
  // When set, coefficients below the fit window are replaced by the tail extrapolation.
  std::optional<TailFitConfig> fit;
  const HistogramCache* cache = nullptr;
  bool cache_only = false;
  std::uint32_t streams = 64;
};

struct NormalBackend {};

using ProbabilityBackend = std::variant<ExactBackend, HistogramBackend, NormalBackend>;

inline std::string method_tag(const ProbabilityBackend& b) {
  if (std::holds_alternative<ExactBackend>(b)) return "mc-exact-backend";
  if (std::holds_alternative<HistogramBackend>(b)) return "mc-histogram";
  return "normal";
}

// P(|Y_k - S| >= alpha / sqrt(k)) < 4 / alpha^4
struct AlphaBound {
  double alpha = 0;
  double error = 0;
  double failure_bound = 0;
};

inline std::vector<AlphaBound> alpha_table(std::uint64_t k) {
  std::vector<AlphaBound> t;
  for (double alpha : {std::sqrt(10.0), 10.0 * std::sqrt(10.0)})
    t.push_back({alpha, alpha / std::sqrt(static_cast<double>(k)), 4.0 / std::pow(alpha, 4)});
  return t;
}

struct TvdEstimate {
  double value = 0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
  std::vector<AlphaBound> alpha;
};

struct McTvdOptions {
  unsigned threads = 1;
  std::uint32_t streams = kDefaultStreamCount;
};

namespace detail {

inline constexpr std::uint64_t kDeckDomain = 0x6465636b;  // "deck"

// Evaluates (1 - N p)^+ for counterpart decks of one scenario and base.
class TermEvaluator {
 public:
  TermEvaluator(const Scenario& s, const Integer& a, const ProbabilityBackend& backend)
      : scenario_(s), backend_(backend), n_(s.anchor.size()) {
    N_ = s.counterpart_count();
    cardinality_ = transition_cardinality(s.anchor, s.anchor);
    const auto w = shuffle_weights(n_, a);
    for (std::size_t d = 0; d < n_; ++d) {
      Rational nw = w[d] * N_;
      scaled_weights_.push_back(nw);
      scaled_weights_d_.push_back(nw.get_d());
      Rational mnw = nw * cardinality_;
      histogram_weights_.push_back(mnw);
    }
  }

  double term(const Deck& counterpart, std::uint64_t sample_index, std::uint64_t seed) {
    const Deck& src = scenario_.source_for(counterpart);
    const Deck& tgt = scenario_.target_for(counterpart);
    if (const auto* ex = std::get_if<ExactBackend>(&backend_)) return exact_term(src, tgt, *ex);
    if (const auto* hb = std::get_if<HistogramBackend>(&backend_))
      return histogram_term(src, tgt, *hb, mix_seed(seed, sample_index));
    return normal_term(src, tgt);
  }

 private:
  static double positive_part(const Rational& np) {
    const Rational t = 1 - np;
    return t > 0 ? t.get_d() : 0.0;
  }
  static double positive_part(double np) { return np < 1 ? 1 - np : 0.0; }

  Rational scaled_probability(const DescentPolynomial& poly) const {
    Rational np = 0;
    for (std::size_t d = 0; d < n_; ++d)
      if (poly[d] != 0) np += poly[d] * scaled_weights_[d];
    return np;
  }

  double exact_term(const Deck& src, const Deck& tgt, const ExactBackend& ex) {
    const Deck& key = scenario_.kind == ScenarioKind::FixedSource ? tgt : src;
    {
      std::lock_guard lock(memo_mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const double t = positive_part(scaled_probability(exact_descent_polynomial(src, tgt, ex.oracle)));
    std::lock_guard lock(memo_mutex_);
    memo_.emplace(key, t);
    return t;
  }

  double histogram_term(const Deck& src, const Deck& tgt, const HistogramBackend& hb, std::uint64_t seed) {
    HistogramRunOptions run;
    run.streams = hb.streams;
    run.cache_only = hb.cache_only;
    const auto h = cached_histogram(hb.cache, src, tgt, hb.samples, seed, run);
    if (hb.fit) {
      const auto c = extrapolated_coefficients(h, *hb.fit);
      double np = 0;
      for (std::size_t d = 0; d < n_; ++d) np += c[d] * scaled_weights_d_[d];
      return positive_part(np);
    }
    Rational np = 0;
    for (std::size_t d = 0; d < n_; ++d)
      if (h.counts[d] != 0) np += from_u64(h.counts[d]) * histogram_weights_[d];
    np /= from_u64(h.samples);
    return positive_part(np);
  }

  double normal_term(const Deck& src, const Deck& tgt) const {
    const auto m = descent_moments(src, tgt);
    if (m.sigma2 == 0) {
      DescentPolynomial point(n_);
      const Rational mu = m.mu;
      point.coefficients[mu.get_num().get_ui()] = cardinality_;
      return positive_part(scaled_probability(point));
    }
    const auto c = normal_coefficient_estimates(n_, m, cardinality_);
    double np = 0;
    for (std::size_t d = 0; d < n_; ++d) np += c[d] * scaled_weights_d_[d];
    return positive_part(np);
  }

  const Scenario& scenario_;
  const ProbabilityBackend& backend_;
  std::size_t n_;
  Integer N_, cardinality_;
  std::vector<Rational> scaled_weights_;     // N w_d
  std::vector<double> scaled_weights_d_;
  std::vector<Rational> histogram_weights_;  // |Pi| N w_d
  std::mutex memo_mutex_;
  std::map<Deck, double> memo_;
};

}  // namespace detail

// Y_k = (N/k) sum_j (1/N - p_{i_j})^+ over k uniformly drawn counterpart decks.
inline TvdEstimate mc_tvd(const Scenario& s, const Integer& a, std::uint64_t k, std::uint64_t seed,
                          const ProbabilityBackend& backend, const McTvdOptions& opt = {}) {
  if (k <= 2) throw Error("Monte Carlo estimate needs k > 2 samples");
  detail::TermEvaluator eval(s, a, backend);
  auto partial = map_streams<CompensatedSum>(opt.streams, opt.threads, [&](std::uint32_t stream) {
    CompensatedSum sum;
    auto rng = make_stream_rng(seed, stream, detail::kDeckDomain);
    const std::uint64_t first = stream_offset(k, opt.streams, stream);
    const std::uint64_t share = stream_share(k, opt.streams, stream);
    for (std::uint64_t j = 0; j < share; ++j) {
      const Deck other = sample_uniform_rearrangement(s.anchor, rng);
      sum.add(eval.term(other, first + j, seed));
    }
    return sum;
  });
  CompensatedSum total;
  for (const auto& p : partial) total.add(p);
  TvdEstimate est;
  est.value = std::clamp(total.value() / static_cast<double>(k), 0.0, 1.0);
  est.k = k;
  est.seed = seed;
  est.alpha = alpha_table(k);
  return est;
}

}  // namespace riffle
