#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"

namespace riffle {

enum class ScenarioKind { FixedSource, FixedTarget };

inline std::string to_string(ScenarioKind k) {
  return k == ScenarioKind::FixedSource ? "fixed-source" : "fixed-target";
}

inline ScenarioKind parse_scenario_kind(std::string_view s) {
  if (s == "fixed-source" || s == "source") return ScenarioKind::FixedSource;
  if (s == "fixed-target" || s == "target") return ScenarioKind::FixedTarget;
  throw Error("unknown scenario kind '" + std::string(s) + "'");
}

// A family of transition probabilities p_i, one per arrangement of the
// anchor's multiset. Fixed-source: p_i = P(anchor -> D_i). Fixed-target:
// p_i = P(D_i -> anchor).
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::FixedSource;
  Deck anchor;

  Scenario() = default;
  Scenario(std::string name_, ScenarioKind kind_, Deck anchor_)
      : name(std::move(name_)), kind(kind_), anchor(std::move(anchor_)) {
    if (anchor.empty()) throw Error("scenario deck must be nonempty");
  }

  // N = n! / prod n_c!
  Integer counterpart_count() const { return arrangement_count(anchor); }

  const Deck& source_for(const Deck& counterpart) const {
    return kind == ScenarioKind::FixedSource ? anchor : counterpart;
  }
  const Deck& target_for(const Deck& counterpart) const {
    return kind == ScenarioKind::FixedSource ? counterpart : anchor;
  }
};

inline std::string range_expression(int lo, int hi, int copies_each, bool interleaved) {
  std::string s;
  if (interleaved) {
    s = "(";
    for (int v = lo; v <= hi; ++v) s += (v > lo ? "," : "") + std::to_string(v);
    s += ")^" + std::to_string(copies_each);
  } else {
    for (int v = lo; v <= hi; ++v) {
      if (v > lo) s += ',';
      s += std::to_string(v);
      if (copies_each > 1) s += '^' + std::to_string(copies_each);
    }
  }
  return s;
}

// Card-game scenarios of the total-variation table.
inline std::vector<Scenario> builtin_scenarios() {
  using K = ScenarioKind;
  return {
      {"BayerDiaconis", K::FixedSource, parse_deck(range_expression(1, 52, 1, false))},
      {"Blackjack1", K::FixedSource, parse_deck(range_expression(1, 13, 4, false))},
      {"Blackjack2", K::FixedSource, parse_deck(range_expression(1, 13, 4, true))},
      {"Bridge1", K::FixedTarget, parse_deck("N^13,E^13,S^13,W^13")},
      {"Bridge2", K::FixedTarget, parse_deck("(N,E,S,W)^13")},
      {"RedBlack1", K::FixedSource, parse_deck("R^26,B^26")},
      {"RedBlack2", K::FixedSource, parse_deck("(R,B)^26")},
      {"AliceBob1", K::FixedTarget, parse_deck("A^26,B^26")},
      {"AliceBob2", K::FixedTarget, parse_deck("(A,B)^26")},
  };
}

inline std::optional<Scenario> find_scenario(std::string_view name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  return std::nullopt;
}

}  // namespace riffle
