#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/error.hpp"
#include "riffle/parallel.hpp"
#include "riffle/rng.hpp"
#include "riffle/shuffle.hpp"

namespace riffle {

// Coefficients c_0..c_{n-1}: c_d counts members of Pi(D1; D2) with d descents.
struct DescentPolynomial {
  std::vector<Integer> coefficients;

  DescentPolynomial() = default;
  explicit DescentPolynomial(std::size_t n) : coefficients(n, 0) {}
  explicit DescentPolynomial(std::vector<Integer> c) : coefficients(std::move(c)) {}

  std::size_t size() const { return coefficients.size(); }
  const Integer& operator[](std::size_t d) const { return coefficients[d]; }

  Integer total() const {
    Integer s = 0;
    for (const auto& c : coefficients) s += c;
    return s;
  }

  friend bool operator==(const DescentPolynomial&, const DescentPolynomial&) = default;
};

// Sampled descent counts: counts[d] of `samples` uniform draws from Pi(D1; D2) had d descents.
struct DescentHistogram {
  Deck source;
  Deck target;
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint32_t streams = kDefaultStreamCount;

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

// Component-wise merge of histograms over the same pair.
inline DescentHistogram& merge_into(DescentHistogram& into, const DescentHistogram& from) {
  if (into.counts.size() != from.counts.size()) throw Error("histograms of different deck sizes");
  for (std::size_t d = 0; d < into.counts.size(); ++d) into.counts[d] += from.counts[d];
  into.samples += from.samples;
  return into;
}

struct EulerianRow {
  std::size_t n = 0;
  std::vector<Integer> values;  // A(n,0..n-1)
};

// A(n,d) = (d+1) A(n-1,d) + (n-d) A(n-1,d-1)
inline EulerianRow eulerian_row(std::size_t n) {
  if (n == 0) throw Error("eulerian_row requires n >= 1");
  std::vector<Integer> row{1};
  for (std::size_t m = 2; m <= n; ++m) {
    std::vector<Integer> next(m, 0);
    for (std::size_t d = 0; d < m; ++d) {
      if (d < row.size()) next[d] += static_cast<unsigned long>(d + 1) * row[d];
      if (d >= 1) next[d] += static_cast<unsigned long>(m - d) * row[d - 1];
    }
    row = std::move(next);
  }
  return EulerianRow{n, std::move(row)};
}

// w_d = C(a + n - d - 1, n) / a^n for d = 0..n-1.
inline std::vector<Rational> shuffle_weights(std::size_t n, const Integer& a) {
  std::vector<Rational> w;
  w.reserve(n);
  for (std::size_t d = 0; d < n; ++d) w.push_back(shuffle_probability(n, a, d));
  return w;
}

// Probability that an a-shuffle yields a permutation with d descents.
inline std::vector<Rational> descent_distribution_under_a_shuffle(std::size_t n, const Integer& a) {
  const auto row = eulerian_row(n);
  auto w = shuffle_weights(n, a);
  for (std::size_t d = 0; d < n; ++d) w[d] *= row.values[d];
  return w;
}

// Probability that an a-shuffle carries D1 to D2, given the descent polynomial of Pi(D1; D2).
inline Rational transition_probability(const DescentPolynomial& poly, const Integer& a) {
  const std::size_t n = poly.size();
  Rational p = 0;
  for (std::size_t d = 0; d < n; ++d) {
    if (poly[d] == 0) continue;
    p += poly[d] * shuffle_probability(n, a, d);
  }
  return p;
}

// Inverts p_a = sum_d c_d C(a+n-d-1, n)/a^n for a = 1..n by forward
// substitution: row a involves c_0..c_{a-1}, with unit weight on c_{a-1}.
inline DescentPolynomial probabilities_to_polynomial(const std::vector<Rational>& p, std::size_t n) {
  if (p.size() < n) throw Error("need transition probabilities for a = 1..n");
  std::vector<Integer> c(n, 0);
  for (std::size_t a = 1; a <= n; ++a) {
    Rational rhs = p[a - 1] * Rational(power(a, n));
    for (std::size_t d = 0; d + 1 < a; ++d) rhs -= Rational(c[d] * binomial(a + n - d - 1, n));
    rhs.canonicalize();
    if (rhs.get_den() != 1) throw Error("inconsistent probabilities: non-integer coefficient c_" + std::to_string(a - 1));
    if (rhs < 0) throw Error("inconsistent probabilities: negative coefficient c_" + std::to_string(a - 1));
    c[a - 1] = rhs.get_num();
  }
  return DescentPolynomial(std::move(c));
}

// Brute-force descent polynomial: enumerate Pi(D1; D2) member by member.
inline DescentPolynomial descent_polynomial_by_enumeration(const Deck& d1, const Deck& d2,
                                                           std::uint64_t cap = kDefaultEnumerationCap) {
  std::vector<std::uint64_t> counts(d1.size(), 0);
  for_each_transition(
      d1, d2,
      [&](std::span<const std::uint32_t> images) {
        ++counts[descents(images)];
        return true;
      },
      cap);
  DescentPolynomial poly(d1.size());
  for (std::size_t d = 0; d < counts.size(); ++d) poly.coefficients[d] = from_u64(counts[d]);
  return poly;
}

struct ExactOptions {
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  // Upper bound on (used-target set, last target) states kept by the memoized search.
  std::uint64_t state_cap = 20'000'000;
};

namespace detail {

// Memoized enumeration: assign targets to source positions left to right.
// The state after i assignments is (set of used targets, target of card i);
// each state carries the descent-count polynomial of all partial assignments
// reaching it. Counts are exact; Count is uint64_t when |Pi| < 2^63.
template <typename Count>
std::vector<Count> descent_counts_by_layers(const Deck& d1, const Deck& d2, std::uint64_t state_cap) {
  const std::size_t n = d1.size();
  LabelClasses classes(d1, d2);
  std::vector<std::vector<std::uint32_t>> targets_of_source(n);
  for (std::size_t c = 0; c < classes.labels.size(); ++c)
    for (auto s : classes.source[c]) targets_of_source[s] = classes.target[c];

  // key = mask * 64 + last; value = counts indexed by descents so far
  std::unordered_map<std::uint64_t, std::vector<Count>> layer, next;
  for (auto t : targets_of_source[0]) layer[(std::uint64_t{1} << t) * 64 + t] = std::vector<Count>{Count(1)};
  for (std::size_t i = 1; i < n; ++i) {
    next.clear();
    for (const auto& [key, poly] : layer) {
      const std::uint64_t mask = key / 64;
      const std::uint32_t last = static_cast<std::uint32_t>(key % 64);
      for (auto t : targets_of_source[i]) {
        if (mask & (std::uint64_t{1} << t)) continue;
        const std::size_t shift = t < last ? 1 : 0;
        auto& dst = next[(mask | (std::uint64_t{1} << t)) * 64 + t];
        if (dst.size() < poly.size() + shift) dst.resize(poly.size() + shift, Count(0));
        for (std::size_t d = 0; d < poly.size(); ++d) dst[d + shift] += poly[d];
      }
    }
    if (next.size() > state_cap) throw CapExceeded("descent polynomial search exceeds state cap");
    layer.swap(next);
  }
  std::vector<Count> total(n, Count(0));
  for (const auto& [key, poly] : layer)
    for (std::size_t d = 0; d < poly.size(); ++d) total[d] += poly[d];
  return total;
}

}  // namespace detail

// Exact descent polynomial of Pi(D1; D2). Decks with n <= 57 (so that the
// packed state key fits in 64 bits) use the memoized layer search; larger
// ones fall back to plain enumeration under the cap.
inline DescentPolynomial exact_descent_polynomial(const Deck& d1, const Deck& d2, const ExactOptions& opt = {}) {
  const Integer card = transition_cardinality(d1, d2);
  const std::size_t n = d1.size();
  if (n <= 57) {
    try {
      DescentPolynomial poly(n);
      if (card < Integer("9223372036854775807")) {
        auto counts = detail::descent_counts_by_layers<std::uint64_t>(d1, d2, opt.state_cap);
        for (std::size_t d = 0; d < n; ++d) poly.coefficients[d] = from_u64(counts[d]);
      } else {
        poly.coefficients = detail::descent_counts_by_layers<Integer>(d1, d2, opt.state_cap);
      }
      return poly;
    } catch (const CapExceeded&) {
      if (card > from_u64(opt.enumeration_cap)) throw;
    }
  }
  return descent_polynomial_by_enumeration(d1, d2, opt.enumeration_cap);
}

// Monte Carlo histogram over streams [first, last) of the run; streams are
// independent so partial histograms can be resumed and merged exactly.
inline void accumulate_histogram_streams(DescentHistogram& h, std::uint32_t first, std::uint32_t last,
                                         std::uint64_t total_samples, unsigned threads = 1) {
  const std::size_t n = h.source.size();
  const TransitionSampler prototype(h.source, h.target);
  auto partial = map_streams<std::vector<std::uint64_t>>(last - first, threads, [&](std::uint32_t k) {
    const std::uint32_t s = first + k;
    std::vector<std::uint64_t> counts(n, 0);
    TransitionSampler sampler = prototype;
    auto rng = make_stream_rng(h.seed, s, /*domain=*/0x68697374);  // "hist"
    const std::uint64_t share = stream_share(total_samples, h.streams, s);
    for (std::uint64_t j = 0; j < share; ++j) ++counts[sampler.sample_descents(rng)];
    return counts;
  });
  for (std::uint32_t k = 0; k < last - first; ++k) {
    for (std::size_t d = 0; d < n; ++d) h.counts[d] += partial[k][d];
    h.samples += stream_share(total_samples, h.streams, first + k);
  }
}

inline DescentHistogram mc_descent_histogram(const Deck& d1, const Deck& d2, std::uint64_t samples,
                                             std::uint64_t seed, unsigned threads = 1,
                                             std::uint32_t streams = kDefaultStreamCount) {
  require_same_signature(d1, d2);
  if (samples == 0) throw Error("histogram needs at least one sample");
  if (streams == 0) throw Error("stream count must be positive");
  DescentHistogram h{d1, d2, std::vector<std::uint64_t>(d1.size(), 0), 0, seed, streams};
  accumulate_histogram_streams(h, 0, streams, samples, threads);
  return h;
}

// Normalised histogram: c~_d = |Pi| gamma_d / l (exact), with relative-error
// gauge 1/sqrt(gamma_d) (infinite when gamma_d = 0).
struct CoefficientEstimates {
  std::vector<Rational> values;
  std::vector<double> gauges;
};

inline CoefficientEstimates histogram_to_polynomial(const DescentHistogram& h) {
  if (h.samples == 0) throw Error("empty histogram");
  const Integer card = transition_cardinality(h.source, h.target);
  CoefficientEstimates est;
  const Integer l = from_u64(h.samples);
  for (auto g : h.counts) {
    est.values.push_back(make_rational(card * from_u64(g), l));
    est.gauges.push_back(g == 0 ? std::numeric_limits<double>::infinity() : 1.0 / std::sqrt(static_cast<double>(g)));
  }
  return est;
}

}  // namespace riffle
