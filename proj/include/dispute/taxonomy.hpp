#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "dispute/util.hpp"

namespace dispute {

// The nine conflict-strategy labels, grouped into four categories below.
enum class IrpStrategy {
  Proposal,
  Concession,
  Interests,
  PositiveExpectations,
  Facts,
  Procedural,
  Power,
  Rights,
  Residual,
};

inline constexpr int kStrategyCount = 9;

inline constexpr std::array<IrpStrategy, kStrategyCount> all_strategies() {
  return {IrpStrategy::Proposal,   IrpStrategy::Concession, IrpStrategy::Interests,
          IrpStrategy::PositiveExpectations, IrpStrategy::Facts, IrpStrategy::Procedural,
          IrpStrategy::Power,      IrpStrategy::Rights,     IrpStrategy::Residual};
}

enum class IrpCategory { Cooperative, Neutral, Competitive, Residual };

inline constexpr IrpCategory category_of(IrpStrategy s) {
  switch (s) {
    case IrpStrategy::Proposal:
    case IrpStrategy::Concession:
    case IrpStrategy::Interests:
    case IrpStrategy::PositiveExpectations:
      return IrpCategory::Cooperative;
    case IrpStrategy::Facts:
    case IrpStrategy::Procedural:
      return IrpCategory::Neutral;
    case IrpStrategy::Power:
    case IrpStrategy::Rights:
      return IrpCategory::Competitive;
    case IrpStrategy::Residual:
      return IrpCategory::Residual;
  }
  throw std::logic_error("category_of: invalid strategy");
}

inline const std::string& strategy_name(IrpStrategy s) {
  static const std::array<std::string, kStrategyCount> names = {
      "Proposal", "Concession", "Interests", "PositiveExpectations", "Facts",
      "Procedural", "Power", "Rights", "Residual"};
  return names[static_cast<int>(s)];
}

inline const std::string& category_name(IrpCategory c) {
  static const std::array<std::string, 4> names = {"Cooperative", "Neutral", "Competitive",
                                                   "Residual"};
  return names[static_cast<int>(c)];
}

// Canonical full names are accepted case-sensitively. The lenient reader also
// accepts the five-letter prefixes used on figure axes ("Propo", "Conce", ...)
// and the spaced form "Positive Expectations".
inline std::optional<IrpStrategy> try_parse_strategy(const std::string& label) {
  for (const auto s : all_strategies()) {
    if (label == strategy_name(s)) return s;
  }
  if (label == "Positive Expectations") return IrpStrategy::PositiveExpectations;
  if (label.size() == 5) {
    for (const auto s : all_strategies()) {
      if (strategy_name(s).compare(0, 5, label) == 0) return s;
    }
  }
  return std::nullopt;
}

inline IrpStrategy parse_strategy(const std::string& label) {
  const auto s = try_parse_strategy(label);
  if (!s) throw std::invalid_argument("unknown strategy label \"" + label + "\"");
  return *s;
}

enum class Role { Buyer, Seller };

inline Role opponent(Role r) { return r == Role::Buyer ? Role::Seller : Role::Buyer; }

inline const std::string& role_name(Role r) {
  static const std::array<std::string, 2> names = {"Buyer", "Seller"};
  return names[static_cast<int>(r)];
}

inline Role parse_role(const std::string& s) {
  if (s == "Buyer") return Role::Buyer;
  if (s == "Seller") return Role::Seller;
  throw std::invalid_argument("unknown role \"" + s + "\"");
}

// Small per-role pair used throughout for profiles, weights, and scores.
template <typename T>
struct PerRole {
  T buyer{};
  T seller{};

  T& operator[](Role r) { return r == Role::Buyer ? buyer : seller; }
  const T& operator[](Role r) const { return r == Role::Buyer ? buyer : seller; }

  bool operator==(const PerRole&) const = default;
};

enum class Trait { EXT, AGR, CON, NEU, OPE };

inline constexpr int kTraitCount = 5;

inline constexpr std::array<Trait, kTraitCount> all_traits() {
  return {Trait::EXT, Trait::AGR, Trait::CON, Trait::NEU, Trait::OPE};
}

inline const std::string& trait_name(Trait t) {
  static const std::array<std::string, kTraitCount> names = {"EXT", "AGR", "CON", "NEU", "OPE"};
  return names[static_cast<int>(t)];
}

inline Trait parse_trait(const std::string& s) {
  for (const auto t : all_traits())
    if (s == trait_name(t)) return t;
  throw std::invalid_argument("unknown trait \"" + s + "\"");
}

// One point on the six-point polarity-degree scale. Canonical integer encoding
// is -3..-1, +1..+3; zero is not representable.
struct TraitLevel {
  int value = 1;

  static TraitLevel from_int(int v) {
    if (v == 0 || v < -3 || v > 3)
      throw std::invalid_argument("trait level must be in {-3,-2,-1,+1,+2,+3}, got " +
                                  std::to_string(v));
    return TraitLevel{v};
  }

  bool positive() const { return value > 0; }
  int degree() const { return value > 0 ? value : -value; }

  bool operator==(const TraitLevel&) const = default;
};

inline constexpr std::array<int, 6> kTraitLevels = {-3, -2, -1, 1, 2, 3};

// Whether trait values are on the six-point scale (simulated agents) or the
// 1-5 decimal inventory scale carried by human corpora.
enum class TraitScale { SixPoint, HumanDecimal };

struct PersonalityProfile {
  TraitScale scale = TraitScale::SixPoint;
  std::array<double, kTraitCount> values{};  // levels or decimals per `scale`

  double value(Trait t) const { return values[static_cast<int>(t)]; }

  TraitLevel level(Trait t) const {
    if (scale != TraitScale::SixPoint)
      throw std::logic_error("level() requires a six-point profile");
    return TraitLevel::from_int(static_cast<int>(value(t)));
  }

  void validate() const {
    for (const auto t : all_traits()) {
      const double v = value(t);
      if (scale == TraitScale::SixPoint) {
        if (std::floor(v) != v) throw std::invalid_argument("six-point trait value not integral");
        TraitLevel::from_int(static_cast<int>(v));
      } else if (v < 1.0 || v > 5.0) {
        throw std::invalid_argument("human trait score outside [1,5]");
      }
    }
  }

  static PersonalityProfile six_point(std::array<int, kTraitCount> levels) {
    PersonalityProfile p;
    p.scale = TraitScale::SixPoint;
    for (int i = 0; i < kTraitCount; ++i) p.values[i] = levels[i];
    p.validate();
    return p;
  }

  bool operator==(const PersonalityProfile&) const = default;
};

}  // namespace dispute
