#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispute/client.hpp"
#include "dispute/corpus.hpp"
#include "dispute/taxonomy.hpp"
#include "dispute/util.hpp"

namespace dispute {

namespace detail {

// Small closed lexicon plus suffix heuristics; a full tagger is overkill for
// clause-boundary detection.
inline bool verb_like(const std::string& word) {
  static const std::vector<std::string> lexicon = {
      "is",    "am",    "are",   "was",     "were",   "be",     "been",   "being",  "have",
      "has",   "had",   "do",    "does",    "did",    "will",   "would",  "can",    "could",
      "shall", "should","may",   "might",   "must",   "want",   "wants",  "need",   "needs",
      "give",  "gives", "gave",  "get",     "got",    "remove", "keep",   "apologize",
      "refund","accept","reject","agree",   "take",   "make",   "makes",  "offer",  "think",
      "know",  "see",   "feel",  "go",      "let",    "write",  "understand", "say",
      "says",  "said",  "tell",  "told",    "consider", "meet", "care",   "hurt",   "demand",
      "check", "adjust","drop",  "sue",     "pay",    "send",   "fix",    "resolve",
      "saw",   "seem",  "seems", "paid",    "win",    "lose",   "keep",   "owe"};
  for (const auto& w : lexicon)
    if (word == w) return true;
  const auto ends_with = [&](const std::string& suffix) {
    return word.size() > suffix.size() &&
           word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with("ing") || ends_with("ed") || ends_with("'ll") || ends_with("'m") ||
         ends_with("'re") || ends_with("'ve") || ends_with("n't");
}

inline bool contains_verb(const std::string& chunk) {
  std::string word;
  for (const char c : chunk) {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'') {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      if (!word.empty() && verb_like(word)) return true;
      word.clear();
    }
  }
  return !word.empty() && verb_like(word);
}

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace detail

// Splits an utterance into subject-verb clause segments: always at sentence
// terminators, and at coordinating boundaries (" and ", " but ", " - ", ";")
// when both sides contain a verb-like token. The concatenation of the
// segments, ignoring whitespace, equals the input.
inline std::vector<Segment> segment_utterance(const std::string& text) {
  std::vector<Segment> segments;
  const auto emit = [&](std::size_t from, std::size_t to) {
    const std::string piece = trim(text.substr(from, to - from));
    if (!piece.empty()) segments.push_back(Segment{piece, std::nullopt});
  };

  const auto next_sentence_end = [&](std::size_t from) {
    for (std::size_t i = from; i < text.size(); ++i)
      if (detail::is_terminator(text[i])) return i;
    return text.size();
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (detail::is_terminator(text[i])) {
      std::size_t end = i;
      while (end < text.size() && detail::is_terminator(text[end])) ++end;
      if (end < text.size()) {
        emit(start, end);
        start = end;
      }
      i = end;
      continue;
    }
    bool split_here = false;
    std::size_t next_start = i;
    if (text[i] == ';') {
      split_here = true;
      next_start = i + 1;  // ';' stays with the left clause
    } else if (text[i] == ' ') {
      for (const std::string marker : {" and ", " but ", " - "}) {
        if (text.compare(i, marker.size(), marker) == 0) {
          split_here = true;
          next_start = i + 1;  // the coordinator opens the right clause
          break;
        }
      }
    }
    if (split_here) {
      const std::string left = text.substr(start, i - start);
      const std::string right =
          text.substr(next_start, next_sentence_end(next_start) - next_start);
      if (detail::contains_verb(left) && detail::contains_verb(right)) {
        emit(start, text[i] == ';' ? i + 1 : i);
        start = next_start;
        i = next_start;
        continue;
      }
    }
    ++i;
  }
  emit(start, text.size());
  return segments;
}

// Deterministic keyword classifier covering all nine classes; the offline
// fallback when no annotation model is available. First matching rule wins,
// Residual is the catch-all.
inline IrpStrategy rule_classify(const std::string& text) {
  const std::string t = lowercase(text);
  const auto has = [&](std::initializer_list<const char*> patterns) {
    for (const char* p : patterns)
      if (t.find(p) != std::string::npos) return true;
    return false;
  };
  if (has({"ok fine", "okay fine", " instead", "i'll reconsider", "i will reconsider",
           "willing to adjust", "willing to change", "willing to meet", "on second thought",
           "you've convinced", "i can agree", "i'll agree", "i will agree", "i'll drop",
           "dropping the", "i changed my mind"}))
    return IrpStrategy::Concession;
  if (has({"liar", "crook", "scam", "fraud", "you lied", "you're lying", "or else",
           "i will write more negative", "i'll report", "i will report", "i'll sue",
           "i will sue", "you will regret", "i will escalate", "make sure everyone knows"}))
    return IrpStrategy::Power;
  if (has({"according to the policy", "policy", "the rules", "my rights", "entitled",
           "unfair", "only fair", "not fair", "fairness", "terms of service", "the law",
           "legally", "seems fair", "consumer protection"}))
    return IrpStrategy::Rights;
  if (has({"you and i both", "we both", "common goal", "work this out", "optimistic",
           "good outcome for both", "i believe we can", "we can find", "mutually",
           "together we"}))
    return IrpStrategy::PositiveExpectations;
  if (has({"offer", "how about", "what if", "propose", "proposal", "i suggest",
           "would you accept", "how does that sound", "in exchange", "counter"}))
    return IrpStrategy::Proposal;
  if (has({"i understand", "because", "i need", "i want", "you want", "you need", "concern",
           "matters to", "important to me", "important to you", "nephew", "priority",
           "i care about"}))
    return IrpStrategy::Interests;
  if (has({"hello", "hi,", "hi ", "can we please talk", "can we talk", "let's discuss",
           "let's talk", "to begin", "next step", "before we continue", "shall we",
           "let me start"}))
    return IrpStrategy::Procedural;
  if (has({"the product", "the listing", "the jersey", "the item", "the order", "was not",
           "wasn't", "never mentioned", "in fact", "actually", "to clarify", "i bought",
           "you bought", "i purchased", "you purchased", "it says", "stated", "did you",
           "what happened", "website", "screenshot"}))
    return IrpStrategy::Facts;
  return IrpStrategy::Residual;
}

// Labels every segment; overwrites existing labels.
inline Dialogue annotate_rules(const Dialogue& dialogue) {
  Dialogue out = dialogue;
  for (auto& turn : out.turns)
    for (auto& seg : turn.segments) seg.strategy = rule_classify(seg.text);
  return out;
}

inline const std::string& default_annotation_template() {
  static const std::string tpl =
      "You label negotiation utterance segments with one of nine conflict strategies.\n\n"
      "{{definitions}}\n\n"
      "Conversation so far:\n{{conversation}}\n\n"
      "Segment to label:\n{{segment}}\n\n"
      "Reply with exactly one strategy name.";
  return tpl;
}

inline const std::string& strategy_definitions_text() {
  static const std::string defs =
      "Proposal: a concrete idea for settling the dispute.\n"
      "Concession: giving ground relative to an earlier stance.\n"
      "Interests: naming a need, want, or worry of either side.\n"
      "PositiveExpectations: optimism or appeal to shared goals.\n"
      "Facts: sharing or requesting information about the situation.\n"
      "Procedural: talk about the conversation's process or openings.\n"
      "Power: threats, coercion, or accusations.\n"
      "Rights: appeals to rules, norms, or fairness.\n"
      "Residual: anything else (apologies, affirmations, thanks).";
  return defs;
}

struct AnnotationStats {
  std::size_t segments = 0;
  std::size_t retried = 0;
  std::size_t fallback_residual = 0;  // warnings: replies that never parsed
};

namespace detail {

inline std::string fill_template(std::string tpl, const std::string& key,
                                 const std::string& value) {
  const std::string placeholder = "{{" + key + "}}";
  for (auto pos = tpl.find(placeholder); pos != std::string::npos;
       pos = tpl.find(placeholder, pos + value.size()))
    tpl.replace(pos, placeholder.size(), value);
  return tpl;
}

}  // namespace detail

// Asks the model for one label per segment. Unparseable replies are retried
// once, then mapped to Residual with a warning, mirroring the taxonomy's
// catch-all.
inline Dialogue annotate_llm(const Dialogue& dialogue, ChatProvider& provider,
                             const std::string& prompt_template, AnnotationStats* stats = nullptr,
                             int max_retries = 3) {
  Dialogue out = dialogue;
  std::string conversation;
  for (auto& turn : out.turns) {
    for (auto& seg : turn.segments) {
      std::string prompt = detail::fill_template(prompt_template, "definitions",
                                                 strategy_definitions_text());
      prompt = detail::fill_template(prompt, "conversation", conversation);
      prompt = detail::fill_template(prompt, "segment", seg.text);
      std::optional<IrpStrategy> label;
      for (int attempt = 0; attempt < 2 && !label; ++attempt) {
        if (attempt == 1 && stats) ++stats->retried;
        const auto reply =
            complete_with_retries(provider, {{"user", prompt}}, max_retries).text;
        label = try_parse_strategy(trim(reply));
      }
      if (!label) {
        label = IrpStrategy::Residual;
        if (stats) ++stats->fallback_residual;
      }
      seg.strategy = label;
      if (stats) ++stats->segments;
    }
    conversation += role_name(turn.speaker) + ": " + turn.text + "\n";
  }
  return out;
}

// One item, >= 2 annotators, each giving a binary correct/incorrect verdict
// on a predicted label.
struct AnnotationJudgment {
  std::string item_id;
  std::vector<bool> verdicts;
};

// Imbalance-adjusted agreement over binary verdicts: observed pairwise
// agreement corrected against the uniform two-category chance rate (1/2),
// which stays meaningful under heavily skewed label prevalence where
// prevalence-based kappas collapse.
inline double a_kappa(const std::vector<AnnotationJudgment>& judgments) {
  if (judgments.empty()) throw std::invalid_argument("a_kappa: no items");
  double observed = 0;
  for (const auto& item : judgments) {
    const std::size_t n = item.verdicts.size();
    if (n < 2) throw std::invalid_argument("a_kappa: item \"" + item.item_id +
                                           "\" has fewer than 2 annotators");
    std::size_t yes = 0;
    for (const bool v : item.verdicts) yes += v ? 1 : 0;
    const std::size_t no = n - yes;
    const double pairs_agree = static_cast<double>(yes * (yes - 1) + no * (no - 1));
    observed += pairs_agree / static_cast<double>(n * (n - 1));
  }
  observed /= static_cast<double>(judgments.size());
  const double chance = 0.5;
  return (observed - chance) / (1.0 - chance);
}

struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kStrategyCount>, kStrategyCount> counts{};  // [gold][pred]

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts)
      for (const auto c : row) n += c;
    return n;
  }

  std::uint64_t trace() const {
    std::uint64_t n = 0;
    for (int i = 0; i < kStrategyCount; ++i) n += counts[i][i];
    return n;
  }
};

struct ClassificationReport {
  ConfusionMatrix confusion;
  std::array<double, kStrategyCount> precision{};
  std::array<double, kStrategyCount> recall{};
  std::array<double, kStrategyCount> f1{};
  std::array<std::uint64_t, kStrategyCount> support{};
  double macro_f1 = 0;
  double weighted_f1 = 0;
  double accuracy = 0;
  std::vector<std::string> warnings;
};

inline ClassificationReport classification_report(
    const std::vector<std::pair<IrpStrategy, IrpStrategy>>& gold_pred) {
  if (gold_pred.empty()) throw std::invalid_argument("classification_report: no items");
  ClassificationReport rep;
  for (const auto& [gold, pred] : gold_pred)
    ++rep.confusion.counts[static_cast<int>(gold)][static_cast<int>(pred)];
  const double total = static_cast<double>(rep.confusion.total());
  rep.accuracy = static_cast<double>(rep.confusion.trace()) / total;
  double weighted = 0;
  for (int c = 0; c < kStrategyCount; ++c) {
    std::uint64_t tp = rep.confusion.counts[c][c], gold_n = 0, pred_n = 0;
    for (int k = 0; k < kStrategyCount; ++k) {
      gold_n += rep.confusion.counts[c][k];
      pred_n += rep.confusion.counts[k][c];
    }
    rep.support[c] = gold_n;
    rep.precision[c] = pred_n == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_n);
    rep.recall[c] = gold_n == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_n);
    const double pr = rep.precision[c] + rep.recall[c];
    rep.f1[c] = pr == 0 ? 0.0 : 2.0 * rep.precision[c] * rep.recall[c] / pr;
    if (gold_n == 0)
      rep.warnings.push_back("class " +
                             strategy_name(all_strategies()[static_cast<std::size_t>(c)]) +
                             " has zero gold support; F1 reported as 0");
    rep.macro_f1 += rep.f1[c] / kStrategyCount;
    weighted += rep.f1[c] * static_cast<double>(gold_n);
  }
  rep.weighted_f1 = weighted / total;
  return rep;
}

// Aligns two corpora segment-by-segment; structures must match exactly.
inline ClassificationReport classification_report(const std::vector<Dialogue>& pred,
                                                  const std::vector<Dialogue>& gold) {
  if (pred.size() != gold.size())
    throw std::invalid_argument("classification_report: corpus sizes differ");
  std::vector<std::pair<IrpStrategy, IrpStrategy>> items;
  for (std::size_t d = 0; d < pred.size(); ++d) {
    if (pred[d].id != gold[d].id || pred[d].turns.size() != gold[d].turns.size())
      throw std::invalid_argument("classification_report: id mismatch at dialogue " +
                                  std::to_string(d));
    for (std::size_t t = 0; t < pred[d].turns.size(); ++t) {
      const auto& pt = pred[d].turns[t];
      const auto& gt = gold[d].turns[t];
      if (pt.segments.size() != gt.segments.size())
        throw std::invalid_argument("classification_report: segment mismatch in dialogue " +
                                    pred[d].id + " turn " + std::to_string(t));
      for (std::size_t s = 0; s < pt.segments.size(); ++s) {
        if (!pt.segments[s].strategy || !gt.segments[s].strategy)
          throw std::invalid_argument("classification_report: unannotated segment");
        items.emplace_back(*gt.segments[s].strategy, *pt.segments[s].strategy);
      }
    }
  }
  return classification_report(items);
}

}  // namespace dispute
