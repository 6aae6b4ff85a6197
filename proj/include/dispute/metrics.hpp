#pragma once

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispute/corpus.hpp"
#include "dispute/taxonomy.hpp"

namespace dispute {

namespace detail {

inline IrpStrategy require_strategy(const Segment& seg) {
  if (!seg.strategy) throw std::invalid_argument("unannotated segment: \"" + seg.text + "\"");
  return *seg.strategy;
}

inline std::set<IrpCategory> category_set(const Turn& turn) {
  std::set<IrpCategory> cats;
  for (const auto& seg : turn.segments) cats.insert(category_of(require_strategy(seg)));
  return cats;
}

// A turn is Competitive if any of its segments is; everything else, including
// pure-action turns with no segments, is non-competitive.
inline bool turn_competitive(const Turn& turn) {
  return category_set(turn).count(IrpCategory::Competitive) > 0;
}

}  // namespace detail

// Percentage of the speaker's segments carrying strategies in `target`;
// missing when the speaker produced no segments.
inline std::optional<double> irp_ratio(const Dialogue& d, Role speaker, IrpCategory target) {
  std::size_t hits = 0, total = 0;
  for (const auto& turn : d.turns) {
    if (turn.speaker != speaker) continue;
    for (const auto& seg : turn.segments) {
      ++total;
      if (category_of(detail::require_strategy(seg)) == target) ++hits;
    }
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

inline std::optional<double> irp_ratio(const Dialogue& d, Role speaker, IrpStrategy target) {
  std::size_t hits = 0, total = 0;
  for (const auto& turn : d.turns) {
    if (turn.speaker != speaker) continue;
    for (const auto& seg : turn.segments) {
      ++total;
      if (detail::require_strategy(seg) == target) ++hits;
    }
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

// How often the speaker answers a partner turn containing category X with a
// turn that also contains X. Partner turns without a following speaker turn
// never enter the denominator.
inline std::optional<double> irp_reciprocity(const Dialogue& d, Role speaker, IrpCategory x) {
  if (x != IrpCategory::Cooperative && x != IrpCategory::Competitive)
    throw std::invalid_argument("reciprocity is defined for Cooperative/Competitive only");
  std::size_t numer = 0, denom = 0;
  for (std::size_t i = 0; i + 1 < d.turns.size(); ++i) {
    const Turn& partner = d.turns[i];
    const Turn& reply = d.turns[i + 1];
    if (partner.speaker == speaker || reply.speaker != speaker) continue;
    if (!detail::category_set(partner).count(x)) continue;
    ++denom;
    if (detail::category_set(reply).count(x)) ++numer;
  }
  if (denom == 0) return std::nullopt;
  return 100.0 * static_cast<double>(numer) / static_cast<double>(denom);
}

// Competitive replies to non-competitive partner turns.
inline std::optional<double> escalation_ratio(const Dialogue& d, Role speaker) {
  std::size_t numer = 0, denom = 0;
  for (std::size_t i = 0; i + 1 < d.turns.size(); ++i) {
    const Turn& partner = d.turns[i];
    const Turn& reply = d.turns[i + 1];
    if (partner.speaker == speaker || reply.speaker != speaker) continue;
    if (detail::turn_competitive(partner)) continue;
    ++denom;
    if (detail::turn_competitive(reply)) ++numer;
  }
  if (denom == 0) return std::nullopt;
  return 100.0 * static_cast<double>(numer) / static_cast<double>(denom);
}

// Non-competitive replies to competitive partner turns.
inline std::optional<double> deescalation_ratio(const Dialogue& d, Role speaker) {
  std::size_t numer = 0, denom = 0;
  for (std::size_t i = 0; i + 1 < d.turns.size(); ++i) {
    const Turn& partner = d.turns[i];
    const Turn& reply = d.turns[i + 1];
    if (partner.speaker == speaker || reply.speaker != speaker) continue;
    if (!detail::turn_competitive(partner)) continue;
    ++denom;
    if (!detail::turn_competitive(reply)) ++numer;
  }
  if (denom == 0) return std::nullopt;
  return 100.0 * static_cast<double>(numer) / static_cast<double>(denom);
}

struct StageDistribution {
  // n_stages rows x 9 strategy columns of row-normalized percentages; a row
  // is missing when its stage holds no segments.
  std::vector<std::optional<std::array<double, kStrategyCount>>> rows;
};

// Contiguous turn bins of as-equal-as-possible size; when the turn count does
// not divide evenly, earlier stages take the extra turn.
inline std::vector<std::size_t> stage_bin_sizes(std::size_t n_turns, int n_stages) {
  if (n_stages < 1) throw std::invalid_argument("n_stages must be >= 1");
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n_stages),
                                 n_turns / static_cast<std::size_t>(n_stages));
  const std::size_t remainder = n_turns % static_cast<std::size_t>(n_stages);
  for (std::size_t i = 0; i < remainder; ++i) ++sizes[i];
  return sizes;
}

inline StageDistribution stage_distribution(const Dialogue& d, std::optional<Role> speaker,
                                            int n_stages) {
  const auto sizes = stage_bin_sizes(d.turns.size(), n_stages);
  StageDistribution out;
  std::size_t turn = 0;
  for (const std::size_t size : sizes) {
    std::array<double, kStrategyCount> counts{};
    double total = 0;
    for (std::size_t k = 0; k < size; ++k, ++turn) {
      const Turn& t = d.turns[turn];
      if (speaker && t.speaker != *speaker) continue;
      for (const auto& seg : t.segments) {
        ++counts[static_cast<int>(detail::require_strategy(seg))];
        ++total;
      }
    }
    if (total == 0) {
      out.rows.push_back(std::nullopt);
    } else {
      for (auto& c : counts) c *= 100.0 / total;
      out.rows.push_back(counts);
    }
  }
  return out;
}

// One analysis row: a speaker in one dialogue with their trait predictors and
// all dependent variables. Missing DVs stay missing; they are never zero.
struct SpeakerRecord {
  std::string dialogue_id;
  CorpusSource source = CorpusSource::Simulated;
  Role role = Role::Buyer;
  double position_effect = -1;  // Buyer -1, Seller +1
  double position_dummy = 0;    // Buyer 0, Seller 1
  PersonalityProfile self;
  PersonalityProfile partner;
  std::optional<double> score;
  int accept = 0;
  int not_walk_away = 1;
  std::optional<double> coop_ratio;
  std::optional<double> comp_ratio;
  std::optional<double> coop_recip;
  std::optional<double> comp_recip;
  std::optional<double> escalation;
  std::optional<double> deescalation;
};

inline constexpr std::array<const char*, 9> kDvNames = {
    "score",    "accept",    "notWalkAway", "coopRatio", "compRatio",
    "coopRecip", "compRecip", "escalation",  "deescalation"};

inline std::optional<double> dv_value(const SpeakerRecord& r, const std::string& dv) {
  if (dv == "score") return r.score;
  if (dv == "accept") return static_cast<double>(r.accept);
  if (dv == "notWalkAway") return static_cast<double>(r.not_walk_away);
  if (dv == "coopRatio") return r.coop_ratio;
  if (dv == "compRatio") return r.comp_ratio;
  if (dv == "coopRecip") return r.coop_recip;
  if (dv == "compRecip") return r.comp_recip;
  if (dv == "escalation") return r.escalation;
  if (dv == "deescalation") return r.deescalation;
  throw std::invalid_argument("unknown DV \"" + dv + "\"");
}

inline bool dv_is_binary(const std::string& dv) { return dv == "accept" || dv == "notWalkAway"; }

inline std::vector<SpeakerRecord> build_speaker_records(const std::vector<Dialogue>& corpus) {
  std::vector<SpeakerRecord> records;
  records.reserve(corpus.size() * 2);
  for (const auto& d : corpus) {
    for (const Role role : {Role::Buyer, Role::Seller}) {
      SpeakerRecord r;
      r.dialogue_id = d.id;
      r.source = d.source;
      r.role = role;
      r.position_effect = role == Role::Buyer ? -1.0 : 1.0;
      r.position_dummy = role == Role::Buyer ? 0.0 : 1.0;
      r.self = d.profiles[role];
      r.partner = d.profiles[opponent(role)];
      r.score = d.outcome.scores[role];
      r.accept = d.outcome.accept(role);
      r.not_walk_away = d.outcome.not_walk_away(role);
      r.coop_ratio = irp_ratio(d, role, IrpCategory::Cooperative);
      r.comp_ratio = irp_ratio(d, role, IrpCategory::Competitive);
      r.coop_recip = irp_reciprocity(d, role, IrpCategory::Cooperative);
      r.comp_recip = irp_reciprocity(d, role, IrpCategory::Competitive);
      r.escalation = escalation_ratio(d, role);
      r.deescalation = deescalation_ratio(d, role);
      records.push_back(std::move(r));
    }
  }
  return records;
}

// Keeps records whose self trait is high under the source-appropriate rule:
// level >= +2 on the six-point scale, strictly > 3.5 on the decimal scale.
inline std::vector<SpeakerRecord> high_trait_filter(const std::vector<SpeakerRecord>& records,
                                                    Trait trait) {
  std::vector<SpeakerRecord> kept;
  for (const auto& r : records) {
    const double v = r.self.value(trait);
    const bool high = r.self.scale == TraitScale::SixPoint ? v >= 2.0 : v > 3.5;
    if (high) kept.push_back(r);
  }
  return kept;
}

}  // namespace dispute
