#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/error.hpp"

namespace riffle {

// Digit sequence driving an a-shuffle: digit i (1..base) names the packet the
// card landing at position i is dropped from. Packets may be empty.
class ShuffleSequence {
 public:
  ShuffleSequence(std::vector<std::uint32_t> digits, std::uint32_t base)
      : digits_(std::move(digits)), base_(base) {
    if (base_ == 0) throw Error("shuffle base must be at least 1");
    for (auto d : digits_)
      if (d < 1 || d > base_) throw Error("shuffle digit out of range 1..base");
  }

  std::size_t size() const { return digits_.size(); }
  std::uint32_t base() const { return base_; }
  const std::vector<std::uint32_t>& digits() const { return digits_; }

 private:
  std::vector<std::uint32_t> digits_;
  std::uint32_t base_;
};

// Cut the deck into packets sized by the digit counts, then fill target
// position i from the top of packet digits[i].
inline Permutation sequence_to_permutation(const ShuffleSequence& s) {
  std::vector<std::uint32_t> next(s.base() + 1, 0);
  for (auto d : s.digits()) ++next[d];
  std::uint32_t start = 0;
  for (std::uint32_t p = 1; p <= s.base(); ++p) {
    const auto count = next[p];
    next[p] = start;
    start += count;
  }
  std::vector<std::uint32_t> images(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) images[next[s.digits()[i]]++] = static_cast<std::uint32_t>(i);
  return Permutation(std::move(images));
}

template <typename Rng>
ShuffleSequence sample_shuffle_sequence(std::size_t n, std::uint32_t a, Rng& rng) {
  if (a == 0) throw Error("shuffle base must be at least 1");
  std::uniform_int_distribution<std::uint32_t> digit(1, a);
  std::vector<std::uint32_t> digits(n);
  for (auto& d : digits) d = digit(rng);
  return ShuffleSequence(std::move(digits), a);
}

template <typename Rng>
Permutation sample_a_shuffle(std::size_t n, std::uint32_t a, Rng& rng) {
  return sequence_to_permutation(sample_shuffle_sequence(n, a, rng));
}

// Probability that an a-shuffle of n cards realises a fixed permutation with
// d descents: C(a + n - d - 1, n) / a^n. Zero once d >= a.
inline Rational shuffle_probability(std::size_t n, const Integer& a, std::size_t d) {
  if (a < 1) throw Error("shuffle base must be at least 1");
  if (Integer(static_cast<unsigned long>(d)) >= a) return 0;
  const Integer top = a + static_cast<unsigned long>(n) - static_cast<unsigned long>(d) - 1;
  if (!top.fits_ulong_p()) throw Error("shuffle base too large");
  Integer den;
  mpz_pow_ui(den.get_mpz_t(), a.get_mpz_t(), n);
  return make_rational(binomial(top.get_ui(), n), den);
}

inline Rational permutation_probability(const Permutation& p, const Integer& a) {
  return shuffle_probability(p.size(), a, descents(p));
}

// Minimum number of cuts for an a-shuffle to realise p; the smallest such a is min_cuts + 1.
inline std::size_t min_cuts(const Permutation& p) { return descents(p); }

// k riffle shuffles act as one 2^k-shuffle.
inline Integer base_for_riffles(unsigned k) { return power(2, k); }

}  // namespace riffle
