#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dispute/negotiation.hpp"
#include "dispute/taxonomy.hpp"
#include "dispute/util.hpp"

namespace dispute {

// Per-trait histogram over the six scale levels, with optional raw human
// decimal scores for quantile-style mapping.
struct TraitDistribution {
  std::array<std::array<double, 6>, kTraitCount> weights{};  // indexed by kTraitLevels order
  std::array<std::vector<double>, kTraitCount> human_scores{};

  static TraitDistribution uniform() {
    TraitDistribution d;
    for (auto& row : d.weights) row.fill(1.0);
    return d;
  }

  void validate() const {
    for (const auto t : all_traits()) {
      double sum = 0;
      for (const double w : weights[static_cast<int>(t)]) {
        if (!(w >= 0)) throw std::invalid_argument("histogram weight must be nonnegative");
        sum += w;
      }
      if (!(sum > 0))
        throw std::invalid_argument("degenerate histogram for trait " + trait_name(t));
    }
  }
};

inline TraitDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  TraitDistribution d;
  for (const auto t : all_traits()) {
    const auto& row = j.at(trait_name(t));
    if (row.is_array()) {
      if (row.size() != 6) throw std::invalid_argument("expected six weights per trait");
      for (int k = 0; k < 6; ++k) d.weights[static_cast<int>(t)][k] = row[k].get<double>();
    } else {
      if (!row.contains("weights")) throw std::invalid_argument("trait entry needs weights");
      for (int k = 0; k < 6; ++k)
        d.weights[static_cast<int>(t)][k] = row.at("weights")[k].get<double>();
      if (row.contains("scores"))
        d.human_scores[static_cast<int>(t)] = row.at("scores").get<std::vector<double>>();
    }
  }
  d.validate();
  return d;
}

// Each trait is drawn independently, proportional to its histogram weights.
inline PersonalityProfile sample_profile(const TraitDistribution& dist, std::uint64_t seed) {
  dist.validate();
  PersonalityProfile profile;
  profile.scale = TraitScale::SixPoint;
  Rng rng(splitmix64(seed));
  for (const auto t : all_traits()) {
    const auto& row = dist.weights[static_cast<int>(t)];
    double total = 0;
    for (const double w : row) total += w;
    const double u = rng.next_double() * total;
    double acc = 0;
    int chosen = 5;
    for (int k = 0; k < 6; ++k) {
      acc += row[k];
      if (u < acc) {
        chosen = k;
        break;
      }
    }
    profile.values[static_cast<int>(t)] = kTraitLevels[chosen];
  }
  return profile;
}

// Six equal-width, left-closed bins over [1,5]. Bridges human inventory
// decimals to the six-point scale.
inline TraitLevel map_human_to_level(double score) {
  if (!(score >= 1.0 && score <= 5.0))
    throw std::invalid_argument("human trait score outside [1,5]: " + std::to_string(score));
  if (score < 5.0 / 3.0) return TraitLevel{-3};
  if (score < 7.0 / 3.0) return TraitLevel{-2};
  if (score < 3.0) return TraitLevel{-1};
  if (score < 11.0 / 3.0) return TraitLevel{1};
  if (score < 13.0 / 3.0) return TraitLevel{2};
  return TraitLevel{3};
}

// Bipolar adjective pairs per trait: (low-pole word, high-pole word).
struct AdjectiveLexicon {
  std::array<std::vector<std::pair<std::string, std::string>>, kTraitCount> pairs;

  void validate() const {
    for (const auto t : all_traits()) {
      const auto& list = pairs[static_cast<int>(t)];
      if (list.size() < 3)
        throw std::invalid_argument("lexicon needs at least 3 pairs for " + trait_name(t));
      for (const auto& [lo, hi] : list)
        if (lo.empty() || hi.empty()) throw std::invalid_argument("empty adjective in lexicon");
    }
  }

  std::size_t total_pairs() const {
    std::size_t n = 0;
    for (const auto& list : pairs) n += list.size();
    return n;
  }
};

// Goldberg-style transparent bipolar markers, 14 pairs per trait (70 total).
inline const AdjectiveLexicon& default_lexicon() {
  static const AdjectiveLexicon lex = [] {
    AdjectiveLexicon l;
    l.pairs[static_cast<int>(Trait::EXT)] = {
        {"quiet", "talkative"},     {"reserved", "sociable"},  {"shy", "bold"},
        {"withdrawn", "outgoing"},  {"timid", "assertive"},    {"passive", "energetic"},
        {"solitary", "gregarious"}, {"inhibited", "spontaneous"},
        {"unadventurous", "adventurous"}, {"silent", "verbal"}, {"retiring", "forward"},
        {"unenergetic", "vigorous"}, {"introverted", "extraverted"}, {"bashful", "daring"}};
    l.pairs[static_cast<int>(Trait::AGR)] = {
        {"cold", "warm"},           {"unkind", "kind"},        {"uncooperative", "cooperative"},
        {"selfish", "unselfish"},   {"distrustful", "trustful"}, {"stingy", "generous"},
        {"inflexible", "flexible"}, {"unfair", "fair"},        {"harsh", "gentle"},
        {"rude", "courteous"},      {"critical", "lenient"},   {"quarrelsome", "agreeable"},
        {"demanding", "accommodating"}, {"ruthless", "softhearted"}};
    l.pairs[static_cast<int>(Trait::CON)] = {
        {"disorganized", "organized"}, {"careless", "careful"}, {"unreliable", "reliable"},
        {"lazy", "hardworking"},    {"impractical", "practical"}, {"negligent", "thorough"},
        {"inefficient", "efficient"}, {"sloppy", "neat"},      {"inconsistent", "consistent"},
        {"undependable", "dependable"}, {"frivolous", "serious"}, {"aimless", "purposeful"},
        {"forgetful", "mindful"},   {"haphazard", "systematic"}};
    l.pairs[static_cast<int>(Trait::NEU)] = {
        {"calm", "anxious"},        {"relaxed", "tense"},      {"at ease", "nervous"},
        {"composed", "irritable"},  {"secure", "insecure"},    {"unemotional", "emotional"},
        {"even-tempered", "moody"}, {"imperturbable", "excitable"}, {"undemanding", "fretful"},
        {"unenvious", "envious"},   {"contented", "discontented"}, {"tranquil", "high-strung"},
        {"resilient", "vulnerable"}, {"placid", "temperamental"}};
    l.pairs[static_cast<int>(Trait::OPE)] = {
        {"unimaginative", "imaginative"}, {"uncreative", "creative"},
        {"conventional", "unconventional"}, {"incurious", "curious"},
        {"unreflective", "reflective"}, {"uninquisitive", "inquisitive"},
        {"unsophisticated", "sophisticated"}, {"narrow-minded", "open-minded"},
        {"simple", "complex"},      {"shallow", "deep"},       {"traditional", "innovative"},
        {"unartistic", "artistic"}, {"literal-minded", "philosophical"},
        {"predictable", "original"}};
    l.validate();
    return l;
  }();
  return lex;
}

inline AdjectiveLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  AdjectiveLexicon lex;
  for (const auto t : all_traits()) {
    for (const auto& pair : j.at(trait_name(t))) {
      lex.pairs[static_cast<int>(t)].emplace_back(pair.at(0).get<std::string>(),
                                                  pair.at(1).get<std::string>());
    }
  }
  lex.validate();
  return lex;
}

struct PersonaPrompt {
  std::string text;
  std::vector<std::string> adjectives;  // the 15 chosen surface forms, 3 per trait
};

// Intensity modifier: degree 3 -> "very", degree 1 -> "a bit", degree 2 bare.
inline std::string render_adjective(TraitLevel level,
                                    const std::pair<std::string, std::string>& pair) {
  const std::string& word = level.positive() ? pair.second : pair.first;
  switch (level.degree()) {
    case 3:
      return "very " + word;
    case 1:
      return "a bit " + word;
    default:
      return word;
  }
}

inline PersonaPrompt build_persona_prompt(const PersonalityProfile& profile,
                                          const AdjectiveLexicon& lexicon, std::uint64_t seed) {
  profile.validate();
  lexicon.validate();
  if (profile.scale != TraitScale::SixPoint)
    throw std::invalid_argument("persona prompts require a six-point profile");
  PersonaPrompt prompt;
  for (const auto t : all_traits()) {
    const auto& pairs = lexicon.pairs[static_cast<int>(t)];
    Rng rng(splitmix64(seed ^ (0x5bd1e995ULL * (static_cast<std::uint64_t>(t) + 1))));
    for (const std::size_t idx : rng.sample_indices(pairs.size(), 3)) {
      prompt.adjectives.push_back(render_adjective(profile.level(t), pairs[idx]));
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < prompt.adjectives.size(); ++i) {
    if (i > 0) joined += i + 1 == prompt.adjectives.size() ? ", and " : ", ";
    joined += prompt.adjectives[i];
  }
  prompt.text = "You are " + joined + ".";
  return prompt;
}

inline constexpr double kApologyAgreeablenessSlope = 2.13;
inline constexpr double kApologyBaseWeight = 20.0;

// The apology the agent receives (SAP for the Buyer, BAP for the Seller) is
// weighted by agreeableness; the other four issues draw uniformly from
// [5, 40]. Raw weights are floored at 1 and normalized to sum to 100.
inline ImportanceWeights assign_importance(const PersonalityProfile& profile, Role role,
                                           std::uint64_t seed) {
  profile.validate();
  if (profile.scale != TraitScale::SixPoint)
    throw std::invalid_argument("importance assignment requires a six-point profile");
  const Issue apology_received = role == Role::Buyer ? Issue::SAP : Issue::BAP;
  Rng rng(splitmix64(seed ^ 0x9e3779b97f4a7c15ULL));
  ImportanceWeights w;
  for (const auto issue : all_issues()) {
    double raw;
    if (issue == apology_received)
      raw = kApologyBaseWeight + kApologyAgreeablenessSlope * profile.level(Trait::AGR).value;
    else
      raw = rng.uniform(5.0, 40.0);
    w[issue] = raw < 1.0 ? 1.0 : raw;
  }
  const double total = w.sum();
  for (const auto issue : all_issues()) w[issue] *= 100.0 / total;
  return w;
}

}  // namespace dispute
