#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dispute/taxonomy.hpp"
#include "dispute/util.hpp"

namespace dispute {

inline constexpr int kDefaultMaxRounds = 25;

enum class Issue { REF, SNR, BNR, SAP, BAP };

inline constexpr int kIssueCount = 5;

inline constexpr std::array<Issue, kIssueCount> all_issues() {
  return {Issue::REF, Issue::SNR, Issue::BNR, Issue::SAP, Issue::BAP};
}

inline const std::string& issue_name(Issue i) {
  static const std::array<std::string, kIssueCount> names = {"REF", "SNR", "BNR", "SAP", "BAP"};
  return names[static_cast<int>(i)];
}

inline Issue parse_issue(const std::string& s) {
  for (const auto i : all_issues())
    if (s == issue_name(i)) return i;
  throw std::invalid_argument("unknown issue \"" + s + "\"");
}

enum class RefundLevel { Full, Partial, None };
enum class ReviewLevel { Remove, Keep };
enum class ApologyLevel { Apologize, NotApologize };

// The five-issue deal content: refund, the two negative reviews, the two
// apologies.
struct IssueAllocation {
  RefundLevel refund = RefundLevel::None;
  ReviewLevel seller_review = ReviewLevel::Keep;
  ReviewLevel buyer_review = ReviewLevel::Keep;
  ApologyLevel seller_apology = ApologyLevel::NotApologize;
  ApologyLevel buyer_apology = ApologyLevel::NotApologize;

  bool operator==(const IssueAllocation&) const = default;
};

using OfferContent = IssueAllocation;

inline std::string allocation_value_name(const IssueAllocation& a, Issue i) {
  switch (i) {
    case Issue::REF:
      return a.refund == RefundLevel::Full      ? "full"
             : a.refund == RefundLevel::Partial ? "partial"
                                                : "none";
    case Issue::SNR:
      return a.seller_review == ReviewLevel::Remove ? "remove" : "keep";
    case Issue::BNR:
      return a.buyer_review == ReviewLevel::Remove ? "remove" : "keep";
    case Issue::SAP:
      return a.seller_apology == ApologyLevel::Apologize ? "apologize" : "not-apologize";
    case Issue::BAP:
      return a.buyer_apology == ApologyLevel::Apologize ? "apologize" : "not-apologize";
  }
  throw std::logic_error("allocation_value_name: invalid issue");
}

// Per-issue preference weights; normalized weights sum to 100.
struct ImportanceWeights {
  std::array<double, kIssueCount> w{20, 20, 20, 20, 20};

  double operator[](Issue i) const { return w[static_cast<int>(i)]; }
  double& operator[](Issue i) { return w[static_cast<int>(i)]; }

  double sum() const {
    double s = 0;
    for (const double x : w) s += x;
    return s;
  }

  void validate() const {
    for (const double x : w)
      if (!(x >= 0)) throw std::invalid_argument("importance weight must be nonnegative");
    if (std::abs(sum() - 100.0) > 1e-6)
      throw std::invalid_argument("importance weights must sum to 100, got " +
                                  std::to_string(sum()));
  }

  bool operator==(const ImportanceWeights&) const = default;
};

// Role-favorability credit table. Each party wants the other's concession:
// the Buyer favors a full refund, removal of the seller's review, keeping
// their own review, and receiving (not giving) an apology; the Seller is the
// mirror image. Partial refund earns half credit for both.
inline double issue_credit(Role role, Issue issue, const IssueAllocation& a) {
  const bool buyer = role == Role::Buyer;
  switch (issue) {
    case Issue::REF: {
      const double toward_full = a.refund == RefundLevel::Full      ? 1.0
                                 : a.refund == RefundLevel::Partial ? 0.5
                                                                    : 0.0;
      return buyer ? toward_full : 1.0 - toward_full;
    }
    case Issue::SNR:
      return (a.seller_review == ReviewLevel::Remove) == buyer ? 1.0 : 0.0;
    case Issue::BNR:
      return (a.buyer_review == ReviewLevel::Keep) == buyer ? 1.0 : 0.0;
    case Issue::SAP:
      return (a.seller_apology == ApologyLevel::Apologize) == buyer ? 1.0 : 0.0;
    case Issue::BAP:
      return (a.buyer_apology == ApologyLevel::NotApologize) == buyer ? 1.0 : 0.0;
  }
  throw std::logic_error("issue_credit: invalid issue");
}

// Payoff: inner product of the agreed allocation's per-issue credit and the
// party's importance weights. Result lies in [0, 100].
inline double score(const IssueAllocation& allocation, const ImportanceWeights& weights,
                    Role role) {
  weights.validate();
  double total = 0;
  for (const auto issue : all_issues()) total += weights[issue] * issue_credit(role, issue, allocation);
  return total;
}

struct Action {
  enum class Kind { Message, Submit, Accept, Reject, WalkAway };

  Kind kind = Kind::Message;
  std::string text;  // full original message text
  std::optional<IssueAllocation> offer;  // Submit only

  bool operator==(const Action&) const = default;
};

inline const std::string& action_kind_name(Action::Kind k) {
  static const std::array<std::string, 5> names = {"Message", "Submit", "Accept", "Reject",
                                                   "WalkAway"};
  return names[static_cast<int>(k)];
}

inline Action::Kind parse_action_kind(const std::string& s) {
  if (s == "Message") return Action::Kind::Message;
  if (s == "Submit") return Action::Kind::Submit;
  if (s == "Accept") return Action::Kind::Accept;
  if (s == "Reject") return Action::Kind::Reject;
  if (s == "WalkAway") return Action::Kind::WalkAway;
  throw std::invalid_argument("unknown action kind \"" + s + "\"");
}

// parse_action is total over arbitrary text. A SUBMISSION line with a bad
// offer object yields Message plus a malformed note, so the caller can
// re-prompt.
struct ParsedAction {
  Action action;
  std::optional<std::string> malformed;
};

namespace detail {

inline std::optional<RefundLevel> parse_refund_value(const std::string& raw) {
  const std::string v = lowercase(trim(raw));
  if (v == "none") return RefundLevel::None;
  if (v == "full") return RefundLevel::Full;
  if (v == "partial") return RefundLevel::Partial;
  return std::nullopt;
}

inline std::optional<ReviewLevel> parse_review_value(const std::string& raw) {
  const std::string v = lowercase(trim(raw));
  if (v == "remove") return ReviewLevel::Remove;
  if (v == "keep" || v == "not remove") return ReviewLevel::Keep;
  return std::nullopt;
}

inline std::optional<ApologyLevel> parse_apology_value(const std::string& raw) {
  const std::string v = lowercase(trim(raw));
  if (v == "apologize") return ApologyLevel::Apologize;
  if (v == "not apologize" || v == "not-apologize") return ApologyLevel::NotApologize;
  return std::nullopt;
}

inline std::optional<std::string> parse_offer_object(const std::string& payload,
                                                     IssueAllocation& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception&) {
    return "offer is not a valid object";
  }
  if (!j.is_object()) return "offer is not an object";
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const auto issue : all_issues())
      if (key == issue_name(issue)) known = true;
    if (!known) return "unexpected issue key \"" + key + "\"";
  }
  for (const auto issue : all_issues()) {
    if (!j.contains(issue_name(issue))) return "missing issue key \"" + issue_name(issue) + "\"";
    if (!j[issue_name(issue)].is_string())
      return "issue value for \"" + issue_name(issue) + "\" is not a string";
  }
  const auto ref = parse_refund_value(j["REF"].get<std::string>());
  const auto snr = parse_review_value(j["SNR"].get<std::string>());
  const auto bnr = parse_review_value(j["BNR"].get<std::string>());
  const auto sap = parse_apology_value(j["SAP"].get<std::string>());
  const auto bap = parse_apology_value(j["BAP"].get<std::string>());
  if (!ref) return "unrecognized REF value";
  if (!snr) return "unrecognized SNR value";
  if (!bnr) return "unrecognized BNR value";
  if (!sap) return "unrecognized SAP value";
  if (!bap) return "unrecognized BAP value";
  out = IssueAllocation{*ref, *snr, *bnr, *sap, *bap};
  return std::nullopt;
}

}  // namespace detail

inline constexpr const char* kSubmissionToken = "SUBMISSION:";
inline constexpr const char* kAcceptToken = "ACCEPT-DEAL";
inline constexpr const char* kRejectToken = "REJECT-DEAL";
inline constexpr const char* kWalkAwayToken = "WALK-AWAY";

inline ParsedAction parse_action(const std::string& text) {
  for (const auto& line : split_lines(text)) {
    const std::string t = trim(line);
    if (t == kAcceptToken) return {Action{Action::Kind::Accept, text, std::nullopt}, std::nullopt};
    if (t == kRejectToken) return {Action{Action::Kind::Reject, text, std::nullopt}, std::nullopt};
    if (t == kWalkAwayToken)
      return {Action{Action::Kind::WalkAway, text, std::nullopt}, std::nullopt};
    if (t.rfind(kSubmissionToken, 0) == 0) {
      IssueAllocation alloc;
      const auto err = detail::parse_offer_object(t.substr(std::string(kSubmissionToken).size()), alloc);
      if (err) return {Action{Action::Kind::Message, text, std::nullopt}, err};
      return {Action{Action::Kind::Submit, text, alloc}, std::nullopt};
    }
  }
  return {Action{Action::Kind::Message, text, std::nullopt}, std::nullopt};
}

enum class OutcomeKind { Agreement, WalkAway, NoAgreement };

inline const std::string& outcome_kind_name(OutcomeKind k) {
  static const std::array<std::string, 3> names = {"Agreement", "WalkAway", "NoAgreement"};
  return names[static_cast<int>(k)];
}

inline OutcomeKind parse_outcome_kind(const std::string& s) {
  if (s == "Agreement") return OutcomeKind::Agreement;
  if (s == "WalkAway") return OutcomeKind::WalkAway;
  if (s == "NoAgreement") return OutcomeKind::NoAgreement;
  throw std::invalid_argument("unknown outcome kind \"" + s + "\"");
}

// Terminal result plus the per-party dependent variables. Scores exist only
// for agreements; walk-away and no-agreement leave them missing rather than
// zero-filled.
struct Outcome {
  OutcomeKind kind = OutcomeKind::NoAgreement;
  std::optional<Role> acceptor;              // Agreement only
  std::optional<Role> walker;                // WalkAway only
  std::optional<IssueAllocation> allocation; // Agreement only
  PerRole<std::optional<double>> scores;

  int accept(Role r) const { return kind == OutcomeKind::Agreement && acceptor == r ? 1 : 0; }
  int not_walk_away(Role r) const { return kind == OutcomeKind::WalkAway && walker == r ? 0 : 1; }

  void validate() const {
    switch (kind) {
      case OutcomeKind::Agreement:
        if (!acceptor || !allocation || !scores.buyer || !scores.seller || walker)
          throw std::invalid_argument("Agreement outcome requires acceptor, allocation, scores");
        break;
      case OutcomeKind::WalkAway:
        if (!walker || acceptor || allocation || scores.buyer || scores.seller)
          throw std::invalid_argument("WalkAway outcome carries only the walker");
        break;
      case OutcomeKind::NoAgreement:
        if (acceptor || walker || allocation || scores.buyer || scores.seller)
          throw std::invalid_argument("NoAgreement outcome carries no agreement fields");
        break;
    }
  }

  bool operator==(const Outcome&) const = default;
};

struct StandingOffer {
  IssueAllocation allocation;
  Role by = Role::Buyer;

  bool operator==(const StandingOffer&) const = default;
};

// Pure-value dispute state machine. One round is one Buyer turn plus one
// Seller turn; crossing max_rounds without acceptance or walk-away terminates
// with NoAgreement.
struct NegotiationState {
  std::vector<std::pair<Role, Action>> history;
  std::optional<StandingOffer> standing;
  Role next_actor = Role::Buyer;
  int max_rounds = kDefaultMaxRounds;
  std::optional<OutcomeKind> terminal;
  std::optional<Role> terminator;

  static NegotiationState initial(Role opener = Role::Buyer, int max_rounds = kDefaultMaxRounds) {
    NegotiationState s;
    s.next_actor = opener;
    s.max_rounds = max_rounds;
    return s;
  }

  bool is_terminal() const { return terminal.has_value(); }
  int completed_rounds() const { return static_cast<int>(history.size()) / 2; }
};

inline NegotiationState apply_action(const NegotiationState& state, const Action& action) {
  if (state.is_terminal()) throw std::logic_error("apply_action: state is terminal");
  NegotiationState next = state;
  const Role actor = state.next_actor;
  switch (action.kind) {
    case Action::Kind::Message:
      break;
    case Action::Kind::Submit:
      if (!action.offer) throw std::logic_error("apply_action: Submit carries no offer");
      next.standing = StandingOffer{*action.offer, actor};
      break;
    case Action::Kind::Accept:
      if (!state.standing || state.standing->by == actor)
        throw std::logic_error("apply_action: Accept with no standing opponent offer");
      next.terminal = OutcomeKind::Agreement;
      next.terminator = actor;
      break;
    case Action::Kind::Reject:
      if (!state.standing || state.standing->by == actor)
        throw std::logic_error("apply_action: Reject with no standing opponent offer");
      next.standing.reset();
      break;
    case Action::Kind::WalkAway:
      next.terminal = OutcomeKind::WalkAway;
      next.terminator = actor;
      break;
  }
  next.history.emplace_back(actor, action);
  next.next_actor = opponent(actor);
  if (!next.terminal && next.history.size() >= 2 * static_cast<std::size_t>(next.max_rounds)) {
    next.terminal = OutcomeKind::NoAgreement;
  }
  return next;
}

inline Outcome outcome_of(const NegotiationState& state,
                          const PerRole<ImportanceWeights>& weights) {
  if (!state.is_terminal()) throw std::logic_error("outcome_of: state is not terminal");
  Outcome out;
  out.kind = *state.terminal;
  switch (out.kind) {
    case OutcomeKind::Agreement:
      out.acceptor = state.terminator;
      out.allocation = state.standing->allocation;
      out.scores.buyer = score(*out.allocation, weights.buyer, Role::Buyer);
      out.scores.seller = score(*out.allocation, weights.seller, Role::Seller);
      break;
    case OutcomeKind::WalkAway:
      out.walker = state.terminator;
      break;
    case OutcomeKind::NoAgreement:
      break;
  }
  out.validate();
  return out;
}

}  // namespace dispute
