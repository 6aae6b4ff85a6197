#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dispute/negotiation.hpp"
#include "dispute/taxonomy.hpp"

namespace dispute {

struct Segment {
  std::string text;
  std::optional<IrpStrategy> strategy;

  bool operator==(const Segment&) const = default;
};

struct Turn {
  int index = 0;
  Role speaker = Role::Buyer;
  std::string text;
  Action action;
  std::vector<Segment> segments;

  bool operator==(const Turn&) const = default;
};

enum class CorpusSource { HumanCorpus, Simulated };

inline const std::string& source_name(CorpusSource s) {
  static const std::array<std::string, 2> names = {"human-corpus", "simulated"};
  return names[static_cast<int>(s)];
}

inline CorpusSource parse_source(const std::string& s) {
  if (s == "human-corpus") return CorpusSource::HumanCorpus;
  if (s == "simulated") return CorpusSource::Simulated;
  throw std::invalid_argument("unknown source \"" + s + "\"");
}

struct Dialogue {
  std::string id;
  CorpusSource source = CorpusSource::Simulated;
  PerRole<PersonalityProfile> profiles;
  PerRole<ImportanceWeights> importance;
  std::vector<Turn> turns;
  Outcome outcome;
  int max_rounds = kDefaultMaxRounds;

  bool annotated() const {
    for (const auto& turn : turns)
      for (const auto& seg : turn.segments)
        if (!seg.strategy) return false;
    return true;
  }

  void validate() const;

  bool operator==(const Dialogue&) const = default;
};

inline void Dialogue::validate() const {
  if (id.empty()) throw std::invalid_argument("dialogue id is empty");
  profiles.buyer.validate();
  profiles.seller.validate();
  importance.buyer.validate();
  importance.seller.validate();
  if (turns.empty()) throw std::invalid_argument("dialogue has no turns");
  if (turns.size() > 2 * static_cast<std::size_t>(max_rounds))
    throw std::invalid_argument("dialogue exceeds " + std::to_string(max_rounds) + " rounds");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    if (t.index != static_cast<int>(i))
      throw std::invalid_argument("non-contiguous turn index at position " + std::to_string(i));
    if (i > 0 && t.speaker == turns[i - 1].speaker)
      throw std::invalid_argument("non-alternating turns at index " + std::to_string(i));
    if (t.action.kind == Action::Kind::Message && t.segments.empty())
      throw std::invalid_argument("message turn " + std::to_string(i) + " has no segments");
    if (t.action.kind == Action::Kind::Submit && !t.action.offer)
      throw std::invalid_argument("submit turn " + std::to_string(i) + " has no offer");
    for (const auto& seg : t.segments)
      if (seg.text.empty())
        throw std::invalid_argument("empty segment text in turn " + std::to_string(i));
  }
  const Action::Kind last = turns.back().action.kind;
  switch (outcome.kind) {
    case OutcomeKind::Agreement:
      if (last != Action::Kind::Accept || outcome.acceptor != turns.back().speaker)
        throw std::invalid_argument("Agreement outcome inconsistent with terminal action");
      break;
    case OutcomeKind::WalkAway:
      if (last != Action::Kind::WalkAway || outcome.walker != turns.back().speaker)
        throw std::invalid_argument("WalkAway outcome inconsistent with terminal action");
      break;
    case OutcomeKind::NoAgreement:
      if (last == Action::Kind::Accept || last == Action::Kind::WalkAway)
        throw std::invalid_argument("NoAgreement outcome inconsistent with terminal action");
      break;
  }
  outcome.validate();
}

// Raised by corpus readers with the 1-based line number of the bad record.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

namespace detail {

inline nlohmann::json allocation_to_json(const IssueAllocation& a) {
  nlohmann::json j;
  for (const auto issue : all_issues()) j[issue_name(issue)] = allocation_value_name(a, issue);
  return j;
}

inline IssueAllocation allocation_from_json(const nlohmann::json& j) {
  IssueAllocation a;
  const auto err = parse_offer_object(j.dump(), a);
  if (err) throw std::invalid_argument("bad allocation: " + *err);
  return a;
}

inline nlohmann::json profile_to_json(const PersonalityProfile& p) {
  nlohmann::json j;
  for (const auto t : all_traits()) {
    const double v = p.value(t);
    if (p.scale == TraitScale::SixPoint)
      j[trait_name(t)] = static_cast<int>(v);
    else
      j[trait_name(t)] = v;
  }
  return j;
}

inline PersonalityProfile profile_from_json(const nlohmann::json& j, TraitScale scale) {
  PersonalityProfile p;
  p.scale = scale;
  for (const auto t : all_traits()) {
    if (!j.contains(trait_name(t)))
      throw std::invalid_argument("profile missing trait " + trait_name(t));
    p.values[static_cast<int>(t)] = j[trait_name(t)].get<double>();
  }
  p.validate();
  return p;
}

inline nlohmann::json weights_to_json(const ImportanceWeights& w) {
  nlohmann::json j;
  for (const auto issue : all_issues()) j[issue_name(issue)] = w[issue];
  return j;
}

inline ImportanceWeights weights_from_json(const nlohmann::json& j) {
  ImportanceWeights w;
  for (const auto issue : all_issues()) {
    if (!j.contains(issue_name(issue)))
      throw std::invalid_argument("importance missing issue " + issue_name(issue));
    w[issue] = j[issue_name(issue)].get<double>();
  }
  return w;
}

}  // namespace detail

inline nlohmann::json dialogue_to_json(const Dialogue& d) {
  nlohmann::json j;
  j["id"] = d.id;
  j["source"] = source_name(d.source);
  j["profiles"] = {{"Buyer", detail::profile_to_json(d.profiles.buyer)},
                   {"Seller", detail::profile_to_json(d.profiles.seller)}};
  j["importance"] = {{"Buyer", detail::weights_to_json(d.importance.buyer)},
                     {"Seller", detail::weights_to_json(d.importance.seller)}};
  j["turns"] = nlohmann::json::array();
  for (const auto& turn : d.turns) {
    nlohmann::json jt;
    jt["index"] = turn.index;
    jt["speaker"] = role_name(turn.speaker);
    jt["text"] = turn.text;
    jt["action"] = action_kind_name(turn.action.kind);
    if (turn.action.offer) jt["offer"] = detail::allocation_to_json(*turn.action.offer);
    jt["segments"] = nlohmann::json::array();
    for (const auto& seg : turn.segments) {
      nlohmann::json js;
      js["text"] = seg.text;
      if (seg.strategy) js["strategy"] = strategy_name(*seg.strategy);
      jt["segments"].push_back(js);
    }
    j["turns"].push_back(jt);
  }
  nlohmann::json jo;
  jo["kind"] = outcome_kind_name(d.outcome.kind);
  if (d.outcome.acceptor) jo["acceptor"] = role_name(*d.outcome.acceptor);
  if (d.outcome.allocation) jo["allocation"] = detail::allocation_to_json(*d.outcome.allocation);
  if (d.outcome.scores.buyer)
    jo["scores"] = {{"Buyer", *d.outcome.scores.buyer}, {"Seller", *d.outcome.scores.seller}};
  j["outcome"] = jo;
  return j;
}

inline Dialogue dialogue_from_json(const nlohmann::json& j) {
  Dialogue d;
  d.id = j.at("id").get<std::string>();
  d.source = parse_source(j.at("source").get<std::string>());
  // Human corpora carry traits as 1-5 decimals, simulated corpora as the
  // canonical six-point integers; the source field tags which is present.
  const TraitScale scale =
      d.source == CorpusSource::HumanCorpus ? TraitScale::HumanDecimal : TraitScale::SixPoint;
  d.profiles.buyer = detail::profile_from_json(j.at("profiles").at("Buyer"), scale);
  d.profiles.seller = detail::profile_from_json(j.at("profiles").at("Seller"), scale);
  d.importance.buyer = detail::weights_from_json(j.at("importance").at("Buyer"));
  d.importance.seller = detail::weights_from_json(j.at("importance").at("Seller"));
  for (const auto& jt : j.at("turns")) {
    Turn turn;
    turn.index = jt.at("index").get<int>();
    turn.speaker = parse_role(jt.at("speaker").get<std::string>());
    turn.text = jt.at("text").get<std::string>();
    turn.action.kind = parse_action_kind(jt.at("action").get<std::string>());
    turn.action.text = turn.text;
    if (jt.contains("offer")) turn.action.offer = detail::allocation_from_json(jt.at("offer"));
    for (const auto& js : jt.at("segments")) {
      Segment seg;
      seg.text = js.at("text").get<std::string>();
      if (js.contains("strategy")) seg.strategy = parse_strategy(js.at("strategy").get<std::string>());
      turn.segments.push_back(seg);
    }
    d.turns.push_back(turn);
  }
  const auto& jo = j.at("outcome");
  d.outcome.kind = parse_outcome_kind(jo.at("kind").get<std::string>());
  if (jo.contains("acceptor")) d.outcome.acceptor = parse_role(jo.at("acceptor").get<std::string>());
  if (jo.contains("allocation"))
    d.outcome.allocation = detail::allocation_from_json(jo.at("allocation"));
  if (jo.contains("scores")) {
    d.outcome.scores.buyer = jo.at("scores").at("Buyer").get<double>();
    d.outcome.scores.seller = jo.at("scores").at("Seller").get<double>();
  }
  // The walker is not stored; it is the speaker of the terminal turn.
  if (d.outcome.kind == OutcomeKind::WalkAway && !d.turns.empty())
    d.outcome.walker = d.turns.back().speaker;
  d.validate();
  return d;
}

// One dialogue per line. Invalid records raise CorpusError with the line
// number and offending field.
inline std::vector<Dialogue> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<Dialogue> dialogues;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      dialogues.push_back(dialogue_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw CorpusError(lineno, e.what());
    }
  }
  return dialogues;
}

inline std::string dialogue_to_line(const Dialogue& d) { return dialogue_to_json(d).dump(); }

inline void write_corpus(const std::vector<Dialogue>& dialogues, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open corpus file for writing: " + path);
  for (const auto& d : dialogues) {
    d.validate();
    out << dialogue_to_line(d) << '\n';
  }
  if (!out) throw std::runtime_error("I/O failure writing corpus: " + path);
}

}  // namespace dispute
