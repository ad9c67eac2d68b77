#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/descent_poly.hpp"
#include "riffle/error.hpp"

namespace riffle {

// Order statistics of the target deck used by the descent moments. Labels
// are indexed densely in first-appearance order of the source deck; all
// counts refer to positions y in the target deck.
//
//   pair(a,b)         #{y1 > y2 : D2(y1)=a, D2(y2)=b}
//   chain(a,b,c)      #{y1 > y2 > y3 with labels a,b,c}
//   down_fan(a,b,c)   sum over y labelled a of (#b below y)(#c below y)
//   up_fan(a,b,c)     sum over y labelled a of (#b above y)(#c above y)
class PairStats {
 public:
  PairStats(const Deck& source, const Deck& target) {
    require_same_signature(source, target);
    labels_ = source.labels_by_appearance();
    h_ = labels_.size();
    index_.resize(source.size());
    auto idx = [&](Label l) {
      for (std::size_t k = 0; k < h_; ++k)
        if (labels_[k] == l) return k;
      return h_;
    };
    for (std::size_t i = 0; i < source.size(); ++i) index_[i] = idx(source[i]);
    std::vector<std::size_t> t(target.size());
    for (std::size_t y = 0; y < target.size(); ++y) t[y] = idx(target[y]);

    count_.assign(h_, 0);
    for (auto c : t) ++count_[c];
    pair_.assign(h_ * h_, 0);
    chain_.assign(h_ * h_ * h_, 0);
    down_fan_.assign(h_ * h_ * h_, 0);
    up_fan_.assign(h_ * h_ * h_, 0);

    std::vector<std::int64_t> below(h_, 0), above(count_.begin(), count_.end());
    for (std::size_t y = 0; y < t.size(); ++y) {
      const std::size_t a = t[y];
      --above[a];
      for (std::size_t b = 0; b < h_; ++b) {
        pair_[a * h_ + b] += below[b];
        for (std::size_t c = 0; c < h_; ++c) {
          chain_[(b * h_ + a) * h_ + c] += above[b] * below[c];
          down_fan_[(a * h_ + b) * h_ + c] += below[b] * below[c];
          up_fan_[(a * h_ + b) * h_ + c] += above[b] * above[c];
        }
      }
      ++below[a];
    }
  }

  std::size_t label_count() const { return h_; }
  const std::vector<Label>& labels() const { return labels_; }
  // Dense label index of the card at source position i.
  std::size_t source_index(std::size_t i) const { return index_[i]; }

  std::int64_t count(std::size_t a) const { return count_[a]; }
  std::int64_t pair(std::size_t a, std::size_t b) const { return pair_[a * h_ + b]; }
  std::int64_t chain(std::size_t a, std::size_t b, std::size_t c) const { return chain_[(a * h_ + b) * h_ + c]; }
  std::int64_t down_fan(std::size_t a, std::size_t b, std::size_t c) const {
    return down_fan_[(a * h_ + b) * h_ + c];
  }
  std::int64_t up_fan(std::size_t a, std::size_t b, std::size_t c) const { return up_fan_[(a * h_ + b) * h_ + c]; }

  // Number of injective label-respecting placements of the given label multiset.
  Integer placements(std::initializer_list<std::size_t> ls) const {
    std::vector<std::pair<std::size_t, unsigned long>> mult;
    for (auto l : ls) {
      auto it = std::find_if(mult.begin(), mult.end(), [&](auto& m) { return m.first == l; });
      if (it == mult.end())
        mult.emplace_back(l, 1);
      else
        ++it->second;
    }
    Integer r = 1;
    for (auto [l, k] : mult) r *= falling_factorial(static_cast<unsigned long>(count_[l]), k);
    return r;
  }

 private:
  std::vector<Label> labels_;
  std::size_t h_ = 0;
  std::vector<std::size_t> index_;
  std::vector<std::int64_t> count_, pair_, chain_, down_fan_, up_fan_;
};

struct DescentMoments {
  Rational mu;
  Rational sigma2;
  // sigma > 7^{2/3} (6 mu)^{1/3}; the Berry-Esseen type bound for the
  // Gaussian approximation is only stated under this condition.
  bool normal_bound_applies = false;
};

namespace detail {

inline Rational ratio(std::int64_t num, const Integer& den) {
  if (den == 0) return 0;
  return make_rational(Integer(static_cast<long>(num)), den);
}

// P(X_i = 1) for a source pair with labels (a, b).
inline Rational descent_probability(const PairStats& s, std::size_t a, std::size_t b) {
  return ratio(s.pair(a, b), s.placements({a, b}));
}

// P(X_i X_j = 1) for j >= i + 2, source labels (a,b) at i,i+1 and (c,d) at
// j,j+1. Injective placements counted by inclusion-exclusion over the
// possible coincidences y1=y3, y1=y4, y2=y3, y2=y4 of the two pairs.
inline Rational separated_joint(const PairStats& s, std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  std::int64_t count = s.pair(a, b) * s.pair(c, d);
  if (a == c) count -= s.down_fan(a, b, d);  // y1 = y3 above both y2, y4
  if (a == d) count -= s.chain(c, a, b);     // y3 > y1 = y4 > y2
  if (b == c) count -= s.chain(a, b, d);     // y1 > y2 = y3 > y4
  if (b == d) count -= s.up_fan(b, a, c);    // y2 = y4 below both y1, y3
  if (a == c && b == d) count += s.pair(a, b);
  return ratio(count, s.placements({a, b, c, d}));
}

// P(X_i X_{i+1} = 1) with labels (a,b,c) at i, i+1, i+2.
inline Rational adjacent_joint(const PairStats& s, std::size_t a, std::size_t b, std::size_t c) {
  return ratio(s.chain(a, b, c), s.placements({a, b, c}));
}

}  // namespace detail

// E W = sum_i P(pi(i) > pi(i+1)) for pi uniform in Pi(D1; D2).
inline Rational descent_mean(const Deck& d1, const Deck& d2) {
  PairStats s(d1, d2);
  Rational mu = 0;
  for (std::size_t i = 0; i + 1 < d1.size(); ++i)
    mu += detail::descent_probability(s, s.source_index(i), s.source_index(i + 1));
  return mu;
}

// Var W = sum_i E X_i + 2 sum_{i<j} E(X_i X_j) - (E W)^2, all exact.
inline DescentMoments descent_moments(const Deck& d1, const Deck& d2) {
  PairStats s(d1, d2);
  const std::size_t n = d1.size();
  std::vector<std::size_t> lab(n);
  for (std::size_t i = 0; i < n; ++i) lab[i] = s.source_index(i);
  Rational mu = 0, cross = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mu += detail::descent_probability(s, lab[i], lab[i + 1]);
    if (i + 2 < n) cross += detail::adjacent_joint(s, lab[i], lab[i + 1], lab[i + 2]);
    for (std::size_t j = i + 2; j + 1 < n; ++j)
      cross += detail::separated_joint(s, lab[i], lab[i + 1], lab[j], lab[j + 1]);
  }
  DescentMoments m;
  m.mu = mu;
  m.sigma2 = mu + 2 * cross - mu * mu;
  m.sigma2.canonicalize();
  const double sigma = std::sqrt(m.sigma2.get_d());
  m.normal_bound_applies = sigma > std::pow(7.0, 2.0 / 3.0) * std::cbrt(6.0 * m.mu.get_d());
  return m;
}

inline Rational descent_variance(const Deck& d1, const Deck& d2) { return descent_moments(d1, d2).sigma2; }

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(lo < Z <= hi) without cancellation in either tail.
inline double normal_interval(double lo, double hi) {
  if (lo + hi > 0) return 0.5 * (std::erfc(lo / std::sqrt(2.0)) - std::erfc(hi / std::sqrt(2.0)));
  return normal_cdf(hi) - normal_cdf(lo);
}

inline double log_of(const Integer& z) {
  if (z <= 0) throw Error("log of non-positive integer");
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

inline double to_double(const Integer& z) {
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::ldexp(mant, static_cast<int>(exp2));
}

// Gaussian estimate of c_d: M (Phi((d+1/2-mu)/sigma) - Phi((d-1/2-mu)/sigma)).
inline double normal_coefficient_estimate(std::size_t d, const DescentMoments& m, const Integer& cardinality) {
  if (m.sigma2 <= 0) throw Infeasible("descent count is deterministic (sigma^2 = 0); use the point mass");
  const double mu = m.mu.get_d(), sigma = std::sqrt(m.sigma2.get_d());
  const double x = static_cast<double>(d);
  return to_double(cardinality) * normal_interval((x - 0.5 - mu) / sigma, (x + 0.5 - mu) / sigma);
}

inline std::vector<double> normal_coefficient_estimates(std::size_t n, const DescentMoments& m,
                                                        const Integer& cardinality) {
  std::vector<double> out(n);
  for (std::size_t d = 0; d < n; ++d) out[d] = normal_coefficient_estimate(d, m, cardinality);
  return out;
}

// ---------------------------------------------------------------------------
// Tail extrapolation of sampled coefficients

inline constexpr std::uint64_t kDefaultReliableCount = 400;

struct TailFitConfig {
  std::size_t degree = 4;
  // Inclusive degree window; chosen automatically when empty.
  std::optional<std::pair<std::size_t, std::size_t>> window;
  // Automatic windows span this many degrees (0: twice the fit degree).
  std::size_t window_length = 0;
  std::uint64_t reliable_count = kDefaultReliableCount;
};

struct TailFit {
  std::size_t window_lo = 0, window_hi = 0;
  std::size_t degree = 0;
  double center = 0;                  // fit variable is (d - center)
  std::vector<double> coefficients;   // ascending powers, in log space
  double rms_residual = 0;
  double max_residual = 0;

  double log_value(double d) const {
    double x = d - center, acc = 0;
    for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * x + coefficients[k];
    return acc;
  }
  double value(double d) const { return std::exp(log_value(d)); }
};

// First window of `length` consecutive degrees, starting at the lowest
// degree whose count reaches the reliability threshold.
inline std::pair<std::size_t, std::size_t> automatic_window(const DescentHistogram& h, const TailFitConfig& cfg) {
  const std::size_t length = cfg.window_length ? cfg.window_length : 2 * cfg.degree;
  std::size_t lo = 0;
  while (lo < h.counts.size() && h.counts[lo] < cfg.reliable_count) ++lo;
  if (lo == h.counts.size()) throw Infeasible("no degree reaches the reliability threshold");
  std::size_t hi = lo;
  while (hi + 1 < h.counts.size() && hi + 1 < lo + length && h.counts[hi + 1] >= cfg.reliable_count) ++hi;
  return {lo, hi};
}

// Least-squares polynomial fit to log c~_d over the window.
inline TailFit fit_log_coefficients(const DescentHistogram& h, const TailFitConfig& cfg) {
  const auto [lo, hi] = cfg.window ? *cfg.window : automatic_window(h, cfg);
  if (hi < lo || hi >= h.counts.size()) throw Infeasible("fit window outside the histogram");
  const std::size_t points = hi - lo + 1;
  if (points < cfg.degree + 2) throw Infeasible("fit window too short for the requested degree");
  for (std::size_t d = lo; d <= hi; ++d) {
    if (h.counts[d] == 0) throw Infeasible("fit window contains a zero count at degree " + std::to_string(d));
    if (h.counts[d] < cfg.reliable_count)
      throw Infeasible("fit window count below reliability threshold at degree " + std::to_string(d));
  }
  const double offset = log_of(transition_cardinality(h.source, h.target)) - std::log(static_cast<double>(h.samples));
  TailFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.degree = cfg.degree;
  fit.center = 0.5 * static_cast<double>(lo + hi);
  Eigen::MatrixXd A(points, cfg.degree + 1);
  Eigen::VectorXd y(points);
  for (std::size_t r = 0; r < points; ++r) {
    const double x = static_cast<double>(lo + r) - fit.center;
    double p = 1;
    for (std::size_t k = 0; k <= cfg.degree; ++k, p *= x) A(r, k) = p;
    y(r) = std::log(static_cast<double>(h.counts[lo + r])) + offset;
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  fit.coefficients.assign(coef.data(), coef.data() + coef.size());
  const Eigen::VectorXd resid = A * coef - y;
  fit.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(points));
  fit.max_residual = resid.cwiseAbs().maxCoeff();
  return fit;
}

struct TailExtrapolation {
  TailFit fit;
  std::vector<std::pair<std::size_t, double>> estimates;  // (degree, estimated c_d)
};

// Estimates c_d for every degree below the fit window.
inline TailExtrapolation tail_extrapolate(const DescentHistogram& h, const TailFitConfig& cfg = {}) {
  TailExtrapolation out;
  out.fit = fit_log_coefficients(h, cfg);
  for (std::size_t d = 0; d < out.fit.window_lo; ++d)
    out.estimates.emplace_back(d, out.fit.value(static_cast<double>(d)));
  return out;
}

// Full coefficient vector: sampled values from the window upwards,
// extrapolated values below it.
inline std::vector<double> extrapolated_coefficients(const DescentHistogram& h, const TailFitConfig& cfg) {
  const auto ext = tail_extrapolate(h, cfg);
  const auto sampled = histogram_to_polynomial(h);
  std::vector<double> c(h.counts.size());
  for (std::size_t d = 0; d < c.size(); ++d) c[d] = sampled.values[d].get_d();
  for (const auto& [d, v] : ext.estimates) c[d] = v;
  return c;
}

}  // namespace riffle
