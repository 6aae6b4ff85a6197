#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "dispute/annotate.hpp"
#include "dispute/negotiation.hpp"
#include "dispute/taxonomy.hpp"
#include "dispute/util.hpp"

namespace dispute {

// Deterministic in-process opponents for offline simulation and tests.
struct ScriptedPolicy {
  enum class Kind {
    MessageOnly,     // never submits, accepts, or walks
    AcceptAnyOffer,  // accepts the first standing opponent offer
    WalkAtRound,     // walks away once `walk_round` is reached
    Concession       // time-decaying acceptance threshold + graduated offers
  };

  Kind kind = Kind::Concession;
  int walk_round = 3;                   // WalkAtRound only
  double accept_threshold_start = 70.0; // Concession: accept score at round 0
  double accept_threshold_decay = 2.0;  // Concession: drop per completed round
  int offer_every = 3;                  // Concession: submit on every Nth own turn
  double min_accept = 30.0;             // Concession: threshold floor
};

namespace detail {

// The allocation this role would most prefer.
inline IssueAllocation favored_allocation(Role role) {
  IssueAllocation a;
  if (role == Role::Buyer) {
    a.refund = RefundLevel::Full;
    a.seller_review = ReviewLevel::Remove;
    a.buyer_review = ReviewLevel::Keep;
    a.seller_apology = ApologyLevel::Apologize;
    a.buyer_apology = ApologyLevel::NotApologize;
  } else {
    a.refund = RefundLevel::None;
    a.seller_review = ReviewLevel::Keep;
    a.buyer_review = ReviewLevel::Remove;
    a.seller_apology = ApologyLevel::NotApologize;
    a.buyer_apology = ApologyLevel::Apologize;
  }
  return a;
}

inline void concede_issue(IssueAllocation& a, Role role, Issue issue, bool second_step) {
  switch (issue) {
    case Issue::REF:
      // Refund concedes in two steps through "partial".
      if (!second_step)
        a.refund = RefundLevel::Partial;
      else
        a.refund = role == Role::Buyer ? RefundLevel::None : RefundLevel::Full;
      break;
    case Issue::SNR:
      a.seller_review = role == Role::Buyer ? ReviewLevel::Keep : ReviewLevel::Remove;
      break;
    case Issue::BNR:
      a.buyer_review = role == Role::Buyer ? ReviewLevel::Remove : ReviewLevel::Keep;
      break;
    case Issue::SAP:
      a.seller_apology = role == Role::Buyer ? ApologyLevel::NotApologize : ApologyLevel::Apologize;
      break;
    case Issue::BAP:
      a.buyer_apology = role == Role::Buyer ? ApologyLevel::Apologize : ApologyLevel::NotApologize;
      break;
  }
}

// Graduated offer: starts from the favored allocation and gives ground issue
// by issue, cheapest first by own importance; the refund moves through
// "partial" before flipping entirely.
inline IssueAllocation concession_offer(Role role, const ImportanceWeights& weights, int step) {
  const auto issues = all_issues();
  std::vector<Issue> order(issues.begin(), issues.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](Issue a, Issue b) { return weights[a] < weights[b]; });
  IssueAllocation a = favored_allocation(role);
  int remaining = step;
  for (const Issue issue : order) {
    if (remaining <= 0) break;
    concede_issue(a, role, issue, false);
    --remaining;
    if (issue == Issue::REF && remaining > 0) {
      concede_issue(a, role, issue, true);
      --remaining;
    }
  }
  return a;
}

// Lines the scripted agent can say, grouped by the strategy they express. All
// of them parse as plain messages.
inline const std::vector<std::string>& message_bank(IrpStrategy s) {
  static const std::array<std::vector<std::string>, kStrategyCount> banks = [] {
    std::array<std::vector<std::string>, kStrategyCount> b;
    b[static_cast<int>(IrpStrategy::Proposal)] = {
        "Here is an offer that could settle this, how does that sound?",
        "What if we split the difference on the refund?"};
    b[static_cast<int>(IrpStrategy::Concession)] = {
        "Ok fine, I am willing to adjust my position on the reviews.",
        "On second thought, I can agree to part of what you asked."};
    b[static_cast<int>(IrpStrategy::Interests)] = {
        "I understand you want this resolved quickly because it matters to you.",
        "I need the review handled because my reputation is my livelihood."};
    b[static_cast<int>(IrpStrategy::PositiveExpectations)] = {
        "You and I both want to walk away from this satisfied.",
        "I believe we can find an arrangement that works for both of us."};
    b[static_cast<int>(IrpStrategy::Facts)] = {
        "The product arrived in the condition shown on the listing.",
        "The order record says the item shipped on time."};
    b[static_cast<int>(IrpStrategy::Procedural)] = {
        "Hello, can we please talk through the open issues one by one?",
        "Before we continue, shall we list what each of us still wants?"};
    b[static_cast<int>(IrpStrategy::Power)] = {
        "If this stalls, I will report this dispute to the platform.",
        "Keep this up or else this goes to arbitration."};
    b[static_cast<int>(IrpStrategy::Rights)] = {
        "According to the policy, disputes like this one qualify for review.",
        "It is only fair that both sides give something up here."};
    b[static_cast<int>(IrpStrategy::Residual)] = {
        "Alright.", "Thank you for staying with this conversation."};
    return b;
  }();
  return banks[static_cast<int>(s)];
}

// Loose reciprocation: answer the opponent's last detected strategy with a
// line from the same category, drifting cooperative when there is nothing to
// mirror.
inline std::string pick_message(const NegotiationState& state, Role self, Rng& rng) {
  IrpStrategy reply_to = IrpStrategy::PositiveExpectations;
  for (auto it = state.history.rbegin(); it != state.history.rend(); ++it) {
    if (it->first != self && it->second.kind == Action::Kind::Message) {
      reply_to = rule_classify(it->second.text);
      break;
    }
  }
  std::vector<IrpStrategy> pool;
  if (rng.next_below(5) == 0) {
    // Occasional free move so every strategy, competitive ones included,
    // shows up in simulated corpora.
    const auto everything = all_strategies();
    pool.assign(everything.begin(), everything.end());
  } else {
    for (const auto s : all_strategies())
      if (category_of(s) == category_of(reply_to)) pool.push_back(s);
  }
  const IrpStrategy chosen = pool[rng.next_below(pool.size())];
  const auto& bank = message_bank(chosen);
  return bank[rng.next_below(bank.size())];
}

inline std::string submission_text(const IssueAllocation& a) {
  nlohmann::json j;
  for (const auto issue : all_issues()) j[issue_name(issue)] = allocation_value_name(a, issue);
  return std::string(kSubmissionToken) + " " + j.dump();
}

}  // namespace detail

// Produces the raw message text for this turn; the caller parses it through
// the same action grammar as model output.
inline std::string scripted_agent_respond(const ScriptedPolicy& policy,
                                          const NegotiationState& state, Role self,
                                          const ImportanceWeights& weights, Rng& rng) {
  const bool opponent_offer_standing = state.standing && state.standing->by != self;
  switch (policy.kind) {
    case ScriptedPolicy::Kind::MessageOnly:
      return detail::pick_message(state, self, rng);
    case ScriptedPolicy::Kind::AcceptAnyOffer:
      if (opponent_offer_standing) return kAcceptToken;
      return detail::pick_message(state, self, rng);
    case ScriptedPolicy::Kind::WalkAtRound:
      if (state.completed_rounds() >= policy.walk_round) return kWalkAwayToken;
      return detail::pick_message(state, self, rng);
    case ScriptedPolicy::Kind::Concession:
      break;
  }

  const double threshold =
      std::max(policy.min_accept, policy.accept_threshold_start -
                                      policy.accept_threshold_decay * state.completed_rounds());
  if (opponent_offer_standing) {
    const double value = score(state.standing->allocation, weights, self);
    if (value >= threshold) return kAcceptToken;
    if (value < threshold - 25.0)
      return kRejectToken;  // far off the mark: clear it and renegotiate
  }

  int own_turns = 0;
  for (const auto& [speaker, _] : state.history)
    if (speaker == self) ++own_turns;
  if (policy.offer_every > 0 && (own_turns + 1) % policy.offer_every == 0) {
    const int step = (own_turns + 1) / policy.offer_every;
    return detail::pick_message(state, self, rng) + "\n" +
           detail::submission_text(detail::concession_offer(self, weights, step));
  }
  return detail::pick_message(state, self, rng);
}

}  // namespace dispute
