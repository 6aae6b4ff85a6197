#pragma once

#include <string>
#include <vector>

#include "dispute/corpus.hpp"
#include "dispute/util.hpp"

namespace testutil {

inline dispute::PersonalityProfile random_profile(dispute::Rng& rng) {
  std::array<int, dispute::kTraitCount> levels{};
  for (auto& v : levels) v = dispute::kTraitLevels[rng.next_below(6)];
  return dispute::PersonalityProfile::six_point(levels);
}

inline dispute::ImportanceWeights random_weights(dispute::Rng& rng) {
  dispute::ImportanceWeights w;
  double total = 0;
  for (const auto issue : dispute::all_issues()) {
    w[issue] = rng.uniform(1.0, 40.0);
    total += w[issue];
  }
  for (const auto issue : dispute::all_issues()) w[issue] *= 100.0 / total;
  return w;
}

inline dispute::IssueAllocation random_allocation(dispute::Rng& rng) {
  dispute::IssueAllocation a;
  a.refund = static_cast<dispute::RefundLevel>(rng.next_below(3));
  a.seller_review = static_cast<dispute::ReviewLevel>(rng.next_below(2));
  a.buyer_review = static_cast<dispute::ReviewLevel>(rng.next_below(2));
  a.seller_apology = static_cast<dispute::ApologyLevel>(rng.next_below(2));
  a.buyer_apology = static_cast<dispute::ApologyLevel>(rng.next_below(2));
  return a;
}

// A small valid annotated dialogue ending in NoAgreement: alternating turns,
// a mix of message turns (1..max_segments labeled segments) and pure-action
// submit turns (no segments).
inline dispute::Dialogue random_dialogue(dispute::Rng& rng, const std::string& id,
                                         int max_turns = 12, int max_segments = 4) {
  using namespace dispute;
  Dialogue d;
  d.id = id;
  d.source = CorpusSource::Simulated;
  d.profiles.buyer = random_profile(rng);
  d.profiles.seller = random_profile(rng);
  d.importance.buyer = random_weights(rng);
  d.importance.seller = random_weights(rng);
  const int n_turns = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_turns - 1)));
  for (int i = 0; i < n_turns; ++i) {
    Turn t;
    t.index = i;
    t.speaker = i % 2 == 0 ? Role::Buyer : Role::Seller;
    const bool submit = rng.next_double() < 0.15;
    if (submit) {
      t.action.kind = Action::Kind::Submit;
      t.action.offer = random_allocation(rng);
      t.text = "SUBMISSION: {...}";
    } else {
      t.action.kind = Action::Kind::Message;
      const int n_segs = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_segments)));
      for (int s = 0; s < n_segs; ++s) {
        Segment seg;
        seg.text = "segment " + std::to_string(i) + "." + std::to_string(s);
        seg.strategy = all_strategies()[rng.next_below(kStrategyCount)];
        t.segments.push_back(seg);
        if (!t.text.empty()) t.text += " ";
        t.text += seg.text + ".";
      }
    }
    t.action.text = t.text;
    d.turns.push_back(t);
  }
  d.outcome.kind = OutcomeKind::NoAgreement;
  return d;
}

}  // namespace testutil
