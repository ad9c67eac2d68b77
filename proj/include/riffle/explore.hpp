#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/error.hpp"

namespace riffle {

struct ClassCount {
  std::size_t n = 0;
  std::uint64_t sequences = 0;  // C(2n, n)
  std::uint64_t classes = 0;    // components of the closure
  Rational conjectured;         // (n + 3) 2^{n-2}
  std::vector<std::uint64_t> class_of;  // component id per sequence, in enumeration order
};

// Sequences of n 1s and n 2s, encoded as 2n-bit masks (bit i set: a 2 at
// position i). Two sequences are related when one is obtained from the other
// by swapping 1s and 2s inside a contiguous balanced block; classes are the
// connected components of that relation.
inline ClassCount r_equivalence_classes(std::size_t n) {
  if (n == 0 || n > 10) throw CapExceeded("classes explorer supports 1 <= n <= 10");
  const std::size_t len = 2 * n;
  std::vector<std::uint32_t> seqs;
  for (std::uint32_t m = 0; m < (1u << len); ++m)
    if (static_cast<std::size_t>(__builtin_popcount(m)) == n) seqs.push_back(m);
  std::unordered_map<std::uint32_t, std::uint32_t> index;
  for (std::uint32_t i = 0; i < seqs.size(); ++i) index[seqs[i]] = i;

  std::vector<std::uint32_t> parent(seqs.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::uint32_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t a = 0; a < len; ++a) {
      int balance = 0;
      std::uint32_t block = 0;
      for (std::size_t b = a; b < len; ++b) {
        balance += (seqs[i] >> b) & 1 ? 1 : -1;
        block |= 1u << b;
        if (balance != 0) continue;
        const std::uint32_t j = index.at(seqs[i] ^ block);
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[ri] = rj;
      }
    }
  }
  ClassCount out;
  out.n = n;
  out.sequences = seqs.size();
  std::unordered_map<std::uint32_t, std::uint64_t> ids;
  for (std::uint32_t i = 0; i < seqs.size(); ++i) {
    auto [it, inserted] = ids.emplace(find(i), ids.size());
    out.class_of.push_back(it->second);
  }
  out.classes = ids.size();
  out.conjectured = Rational(static_cast<unsigned long>(n + 3)) *
                    (n >= 2 ? Rational(power(2, n - 2)) : Rational(1, 2));
  return out;
}

// Descent counts of permutations of 1..nh with pi(i) = i (mod h).
inline std::vector<std::uint64_t> mod_h_descent_counts(std::size_t n, std::size_t h,
                                                       std::uint64_t cap = 500'000'000) {
  if (n == 0 || h == 0) throw Error("mod-h explorer needs n, h >= 1");
  if (n * h > 12) throw CapExceeded("mod-h explorer supports n*h <= 12");
  if (power(static_cast<unsigned long>(factorial(n).get_ui()), h) > from_u64(cap))
    throw CapExceeded("mod-h explorer: (n!)^h exceeds cap");
  const std::size_t total = n * h;
  // residue class r (0-based) holds positions r, r+h, r+2h, ...
  std::vector<std::vector<std::uint32_t>> values(h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t j = 0; j < n; ++j) values[r].push_back(static_cast<std::uint32_t>(r + j * h));
  std::vector<std::uint32_t> images(total);
  std::vector<std::uint64_t> counts(total, 0);
  for (;;) {
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t j = 0; j < n; ++j) images[r + j * h] = values[r][j];
    ++counts[descents(images)];
    std::size_t r = h;
    while (r > 0) {
      --r;
      if (std::next_permutation(values[r].begin(), values[r].end())) break;
      if (r == 0) return counts;
    }
  }
}

}  // namespace riffle
