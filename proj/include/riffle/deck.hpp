#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/error.hpp"
#include "riffle/rng.hpp"

namespace riffle {

// Card label interned from its text token. Two labels compare equal iff their
// tokens are equal, across every deck parsed in the process.
struct Label {
  std::uint32_t id = 0;
  friend auto operator<=>(const Label&, const Label&) = default;
};

class LabelRegistry {
 public:
  static LabelRegistry& instance() {
    static LabelRegistry registry;
    return registry;
  }

  Label intern(std::string_view token) {
    std::lock_guard lock(mutex_);
    auto it = ids_.find(std::string(token));
    if (it != ids_.end()) return Label{it->second};
    const auto id = static_cast<std::uint32_t>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return Label{id};
  }

  std::string token(Label label) const {
    std::lock_guard lock(mutex_);
    return tokens_.at(label.id);
  }

 private:
  LabelRegistry() = default;
  mutable std::mutex mutex_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

inline Label label(std::string_view token) { return LabelRegistry::instance().intern(token); }
inline std::string token(Label l) { return LabelRegistry::instance().token(l); }

// Multiset signature of a deck: (label, count) pairs sorted by label id.
using Signature = std::vector<std::pair<Label, std::size_t>>;

// Ordered sequence of card labels; position 0 is the top card.
class Deck {
 public:
  Deck() = default;
  explicit Deck(std::vector<Label> cards) : cards_(std::move(cards)) {}

  static Deck from_tokens(const std::vector<std::string>& tokens) {
    std::vector<Label> cards;
    cards.reserve(tokens.size());
    for (const auto& t : tokens) cards.push_back(label(t));
    return Deck(std::move(cards));
  }

  std::size_t size() const { return cards_.size(); }
  bool empty() const { return cards_.empty(); }
  Label operator[](std::size_t i) const { return cards_[i]; }
  std::span<const Label> cards() const { return cards_; }
  auto begin() const { return cards_.begin(); }
  auto end() const { return cards_.end(); }

  Signature signature() const {
    std::map<Label, std::size_t> counts;
    for (Label c : cards_) ++counts[c];
    return Signature(counts.begin(), counts.end());
  }

  // Distinct labels in order of first appearance.
  std::vector<Label> labels_by_appearance() const {
    std::vector<Label> out;
    for (Label c : cards_)
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    return out;
  }

  std::vector<std::size_t> positions_of(Label l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cards_.size(); ++i)
      if (cards_[i] == l) out.push_back(i);
    return out;
  }

  friend bool operator==(const Deck&, const Deck&) = default;
  friend auto operator<=>(const Deck& a, const Deck& b) { return a.cards_ <=> b.cards_; }

 private:
  std::vector<Label> cards_;
};

inline bool same_multiset(const Deck& a, const Deck& b) {
  return a.size() == b.size() && a.signature() == b.signature();
}

// Bijection on positions. Stored 0-based: image(i) is the target position of
// the card at source position i. The 1-based accessors follow the usual
// one-line notation pi(1), ..., pi(n).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::uint32_t> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (auto v : images_) {
      if (v >= images_.size() || seen[v]) throw Error("permutation images are not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return Permutation(std::move(v));
  }

  static Permutation from_one_based(const std::vector<std::uint32_t>& images) {
    std::vector<std::uint32_t> v;
    v.reserve(images.size());
    for (auto x : images) {
      if (x == 0) throw Error("one-based permutation image 0");
      v.push_back(x - 1);
    }
    return Permutation(std::move(v));
  }

  std::size_t size() const { return images_.size(); }
  std::uint32_t operator[](std::size_t i) const { return images_[i]; }
  std::span<const std::uint32_t> images() const { return images_; }

  std::vector<std::uint32_t> one_based() const {
    std::vector<std::uint32_t> v(images_);
    for (auto& x : v) ++x;
    return v;
  }

  Permutation inverse() const {
    std::vector<std::uint32_t> inv(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<std::uint32_t>(i);
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.images_ <=> b.images_; }

 private:
  std::vector<std::uint32_t> images_;
};

inline std::size_t descents(std::span<const std::uint32_t> images) {
  std::size_t d = 0;
  for (std::size_t i = 1; i < images.size(); ++i) d += images[i - 1] > images[i];
  return d;
}

inline std::size_t descents(const Permutation& p) { return descents(p.images()); }

// Card at source position i moves to position p[i].
inline Deck apply(const Permutation& p, const Deck& d) {
  if (p.size() != d.size()) throw LengthMismatch("permutation and deck lengths differ");
  std::vector<Label> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[p[i]] = d[i];
  return Deck(std::move(out));
}

inline bool is_transition(const Permutation& p, const Deck& d1, const Deck& d2) {
  if (p.size() != d1.size() || d1.size() != d2.size()) return false;
  for (std::size_t i = 0; i < d1.size(); ++i)
    if (d1[i] != d2[p[i]]) return false;
  return true;
}

inline void require_same_signature(const Deck& d1, const Deck& d2) {
  if (d1.size() != d2.size()) throw SignatureMismatch("decks have different lengths");
  if (d1.signature() != d2.signature()) throw SignatureMismatch("decks have different label multisets");
}

// |Pi(D1; D2)| = product over labels of n_c!.
inline Integer transition_cardinality(const Deck& d1, const Deck& d2) {
  require_same_signature(d1, d2);
  Integer r = 1;
  for (const auto& [l, count] : d1.signature()) r *= factorial(count);
  return r;
}

// Number of distinct arrangements of the deck's multiset: n! / prod n_c!.
inline Integer arrangement_count(const Deck& d) {
  Integer r = factorial(d.size());
  for (const auto& [l, count] : d.signature()) r /= factorial(count);
  return r;
}

// ---------------------------------------------------------------------------
// Deck expressions
//
//   deck := term ("," term)*
//   term := atom ["^" positive-int]
//   atom := label | "(" label ("," label)* ")"
//
// Labels are any run of characters other than whitespace and ",()^".

namespace detail {

class DeckParser {
 public:
  explicit DeckParser(std::string_view text) : text_(text) {}

  Deck parse() {
    std::vector<Label> cards;
    skip_space();
    if (at_end()) throw ParseError("empty deck expression", pos_);
    term(cards);
    skip_space();
    while (!at_end()) {
      expect(',');
      term(cards);
      skip_space();
    }
    return Deck(std::move(cards));
  }

 private:
  static bool is_label_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != ',' && c != '(' && c != ')' && c != '^';
  }
  bool at_end() const { return pos_ >= text_.size(); }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_space();
    if (at_end() || text_[pos_] != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  Label label_token() {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && is_label_char(text_[pos_])) ++pos_;
    if (pos_ == start) throw ParseError("expected a label", start);
    return label(text_.substr(start, pos_ - start));
  }

  void term(std::vector<Label>& out) {
    skip_space();
    std::vector<Label> atom;
    if (!at_end() && text_[pos_] == '(') {
      ++pos_;
      atom.push_back(label_token());
      skip_space();
      while (!at_end() && text_[pos_] == ',') {
        ++pos_;
        atom.push_back(label_token());
        skip_space();
      }
      expect(')');
    } else {
      atom.push_back(label_token());
    }
    std::size_t repeat = 1;
    skip_space();
    if (!at_end() && text_[pos_] == '^') {
      ++pos_;
      skip_space();
      const std::size_t start = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == start) throw ParseError("expected a repetition count", start);
      const auto digits = text_.substr(start, pos_ - start);
      if (digits.size() > 9) throw ParseError("repetition count too large", start);
      repeat = std::stoul(std::string(digits));
      if (repeat == 0) throw ParseError("zero repetition count", start);
    }
    for (std::size_t r = 0; r < repeat; ++r) out.insert(out.end(), atom.begin(), atom.end());
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Deck parse_deck(std::string_view text) { return detail::DeckParser(text).parse(); }

// Canonical expression: runs of equal labels are written as "x^k".
inline std::string to_expression(const Deck& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size();) {
    std::size_t j = i;
    while (j < d.size() && d[j] == d[i]) ++j;
    if (!out.empty()) out += ',';
    out += token(d[i]);
    if (j - i > 1) out += '^' + std::to_string(j - i);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transition sets

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

// Per-label source and target position lists, labels in first-appearance
// order in the source deck.
struct LabelClasses {
  std::vector<Label> labels;
  std::vector<std::vector<std::uint32_t>> source;
  std::vector<std::vector<std::uint32_t>> target;

  LabelClasses(const Deck& d1, const Deck& d2) {
    require_same_signature(d1, d2);
    labels = d1.labels_by_appearance();
    for (Label l : labels) {
      std::vector<std::uint32_t> s, t;
      for (std::size_t i = 0; i < d1.size(); ++i) {
        if (d1[i] == l) s.push_back(static_cast<std::uint32_t>(i));
        if (d2[i] == l) t.push_back(static_cast<std::uint32_t>(i));
      }
      source.push_back(std::move(s));
      target.push_back(std::move(t));
    }
  }
};

// Visits every member of Pi(D1; D2) exactly once. Order: per-label bijections
// in lexicographic order, the first-appearing label varying slowest. The
// visitor receives 0-based images and returns false to stop early.
template <typename Visitor>
void for_each_transition(const Deck& d1, const Deck& d2, Visitor&& visit,
                         std::uint64_t cap = kDefaultEnumerationCap) {
  if (transition_cardinality(d1, d2) > from_u64(cap))
    throw CapExceeded("transition set larger than enumeration cap " + std::to_string(cap));
  LabelClasses classes(d1, d2);
  auto current = classes.target;  // sorted ascending: first lexicographic arrangement
  std::vector<std::uint32_t> images(d1.size());
  const std::size_t h = classes.labels.size();
  for (;;) {
    for (std::size_t c = 0; c < h; ++c)
      for (std::size_t j = 0; j < classes.source[c].size(); ++j) images[classes.source[c][j]] = current[c][j];
    if (!visit(std::span<const std::uint32_t>(images))) return;
    // odometer: last label fastest
    std::size_t c = h;
    while (c > 0) {
      --c;
      if (std::next_permutation(current[c].begin(), current[c].end())) break;
      if (c == 0) return;
    }
    if (h == 0) return;
  }
}

inline std::vector<Permutation> enumerate_transitions(const Deck& d1, const Deck& d2,
                                                      std::uint64_t cap = kDefaultEnumerationCap) {
  std::vector<Permutation> out;
  for_each_transition(
      d1, d2,
      [&](std::span<const std::uint32_t> images) {
        out.emplace_back(std::vector<std::uint32_t>(images.begin(), images.end()));
        return true;
      },
      cap);
  return out;
}

// Uniform sampler over Pi(D1; D2): one uniform bijection per label class.
// Holds scratch buffers, so give each thread its own copy.
class TransitionSampler {
 public:
  TransitionSampler(const Deck& d1, const Deck& d2) : classes_(d1, d2), images_(d1.size()), scratch_(classes_.target) {}

  template <typename Rng>
  std::span<const std::uint32_t> sample(Rng& rng) {
    for (std::size_t c = 0; c < scratch_.size(); ++c) {
      auto& t = scratch_[c];
      std::shuffle(t.begin(), t.end(), rng);
      const auto& s = classes_.source[c];
      for (std::size_t j = 0; j < s.size(); ++j) images_[s[j]] = t[j];
    }
    return images_;
  }

  template <typename Rng>
  std::size_t sample_descents(Rng& rng) {
    return descents(sample(rng));
  }

  std::size_t size() const { return images_.size(); }

 private:
  LabelClasses classes_;
  std::vector<std::uint32_t> images_;
  std::vector<std::vector<std::uint32_t>> scratch_;
};

template <typename Rng>
Permutation sample_uniform_transition(const Deck& d1, const Deck& d2, Rng& rng) {
  TransitionSampler sampler(d1, d2);
  auto images = sampler.sample(rng);
  return Permutation(std::vector<std::uint32_t>(images.begin(), images.end()));
}

// Uniform over the distinct arrangements of the deck's multiset.
template <typename Rng>
Deck sample_uniform_rearrangement(const Deck& d, Rng& rng) {
  std::vector<Label> cards(d.begin(), d.end());
  std::shuffle(cards.begin(), cards.end(), rng);
  return Deck(std::move(cards));
}

}  // namespace riffle
