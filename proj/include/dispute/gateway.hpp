#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "dispute/annotate.hpp"
#include "dispute/client.hpp"
#include "dispute/corpus.hpp"
#include "dispute/negotiation.hpp"
#include "dispute/persona.hpp"
#include "dispute/scripted.hpp"
#include "dispute/util.hpp"

namespace dispute {

struct AgentConfig {
  std::variant<ScriptedPolicy, ProviderConfig> driver = ScriptedPolicy{};
  PersonalityProfile profile;
  ImportanceWeights weights;
  std::string persona;  // adjective sentence injected into the system prompt
};

struct SimulationConfig {
  std::string id;
  PerRole<AgentConfig> agents;
  Role opener = Role::Buyer;
  int max_rounds = kDefaultMaxRounds;
  std::uint64_t seed = 0;
};

// System prompt for a model-driven negotiator: persona, the dispute scenario,
// the party's own priorities, and the action grammar.
inline std::string build_agent_prompt(Role role, const AgentConfig& agent, int max_rounds) {
  std::string p;
  p += agent.persona;
  p += "\n\nYou are the " + role_name(role) +
       " in a dispute over an online purchase. The open issues are REF (the refund: full, "
       "partial, or none), SNR (the Seller's negative review of the Buyer: remove or keep), "
       "BNR (the Buyer's negative review of the Seller: remove or keep), SAP (whether the "
       "Seller apologizes: apologize or not-apologize), and BAP (whether the Buyer apologizes: "
       "apologize or not-apologize).\n\nYour priorities out of 100:\n";
  for (const auto issue : all_issues()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  %s: %.1f\n", issue_name(issue).c_str(),
                  agent.weights[issue]);
    p += buf;
  }
  p += "\nNegotiate in short conversational messages. You may also act:\n"
       "- To put a complete package on the table, write a line starting with " +
       std::string(kSubmissionToken) +
       " followed by a JSON object with exactly the keys REF, SNR, BNR, SAP, BAP and string "
       "values as listed above.\n"
       "- To accept the other party's standing offer, reply with the single line " +
       kAcceptToken + ".\n- To decline their standing offer, reply with the single line " +
       kRejectToken + ".\n- To abandon the negotiation, reply with the single line " +
       kWalkAwayToken + ".\nThe conversation ends after " + std::to_string(max_rounds) +
       " rounds with no deal.";
  return p;
}

using ProviderFactory =
    std::function<std::unique_ptr<ChatProvider>(const ProviderConfig&, Role role)>;

namespace detail {

// The prose of a turn is everything except action-token lines.
inline std::string prose_of(const std::string& text) {
  std::string prose;
  for (const auto& line : split_lines(text)) {
    const std::string t = trim(line);
    if (t == kAcceptToken || t == kRejectToken || t == kWalkAwayToken ||
        t.rfind(kSubmissionToken, 0) == 0)
      continue;
    if (!prose.empty()) prose += "\n";
    prose += line;
  }
  return prose;
}

struct TurnDriver {
  std::function<std::string(const NegotiationState&, const std::string& corrective)> respond;
};

}  // namespace detail

struct SimulationResult {
  Dialogue dialogue;
  int malformed_offers = 0;  // turns that needed the corrective re-prompt
  int invalid_actions = 0;   // accepts/rejects downgraded to messages
};

// Runs one dispute to termination. Model-driven agents get a single
// corrective re-prompt when a SUBMISSION line fails to parse; a second
// failure (and any accept/reject with no standing opponent offer) is
// downgraded to a plain message so the episode always completes.
inline SimulationResult run_simulation(const SimulationConfig& config,
                                       const ProviderFactory& factory = nullptr) {
  PerRole<detail::TurnDriver> drivers;
  PerRole<std::unique_ptr<ChatProvider>> providers;
  PerRole<std::unique_ptr<Rng>> rngs;
  std::string transcript;

  for (const Role role : {Role::Buyer, Role::Seller}) {
    const AgentConfig& agent = config.agents[role];
    agent.profile.validate();
    agent.weights.validate();
    if (const auto* policy = std::get_if<ScriptedPolicy>(&agent.driver)) {
      rngs[role] = std::make_unique<Rng>(
          splitmix64(config.seed ^ (role == Role::Buyer ? 0x42ULL : 0x53ULL)));
      const ImportanceWeights* weights = &agent.weights;
      drivers[role].respond = [policy, role, weights, &rngs](const NegotiationState& state,
                                                             const std::string&) {
        return scripted_agent_respond(*policy, state, role, *weights, *rngs[role]);
      };
    } else {
      const auto& pc = std::get<ProviderConfig>(agent.driver);
      providers[role] = factory ? factory(pc, role)
                                : std::unique_ptr<ChatProvider>(new HttpChatProvider(pc));
      const std::string system = build_agent_prompt(role, agent, config.max_rounds);
      const int retries = pc.max_retries;
      drivers[role].respond = [role, system, retries, &providers, &transcript](
                                  const NegotiationState&, const std::string& corrective) {
        std::vector<ChatMessage> messages = {{"system", system}};
        std::string user = transcript.empty() ? "Begin the negotiation." : transcript;
        if (!corrective.empty()) user += "\n\n" + corrective;
        messages.push_back({"user", user});
        return complete_with_retries(*providers[role], messages, retries).text;
      };
    }
  }

  SimulationResult result;
  NegotiationState state = NegotiationState::initial(config.opener, config.max_rounds);
  Dialogue& d = result.dialogue;
  d.id = config.id;
  d.source = CorpusSource::Simulated;
  d.profiles = {config.agents.buyer.profile, config.agents.seller.profile};
  d.importance = {config.agents.buyer.weights, config.agents.seller.weights};
  d.max_rounds = config.max_rounds;

  while (!state.is_terminal()) {
    const Role actor = state.next_actor;
    std::string raw = drivers[actor].respond(state, "");
    ParsedAction parsed = parse_action(raw);
    if (parsed.malformed) {
      ++result.malformed_offers;
      raw = drivers[actor].respond(
          state, "Your " + std::string(kSubmissionToken) + " line was invalid (" +
                     *parsed.malformed + "). Resend it as a JSON object with exactly the keys "
                     "REF, SNR, BNR, SAP, BAP and the allowed string values, or continue "
                     "with a plain message.");
      parsed = parse_action(raw);
      if (parsed.malformed) parsed.action.kind = Action::Kind::Message;
    }
    const bool opponent_offer = state.standing && state.standing->by != actor;
    if ((parsed.action.kind == Action::Kind::Accept ||
         parsed.action.kind == Action::Kind::Reject) &&
        !opponent_offer) {
      ++result.invalid_actions;
      parsed.action.kind = Action::Kind::Message;
      parsed.action.offer.reset();
    }

    Turn turn;
    turn.index = static_cast<int>(state.history.size());
    turn.speaker = actor;
    turn.text = raw;
    turn.action = parsed.action;
    turn.segments = segment_utterance(detail::prose_of(raw));
    if (turn.action.kind == Action::Kind::Message && turn.segments.empty()) {
      // Blank or token-free-but-empty reply; keep the record valid.
      turn.text = "...";
      turn.action.text = turn.text;
      turn.segments = {Segment{"...", std::nullopt}};
    }
    d.turns.push_back(turn);
    transcript += role_name(actor) + ": " + raw + "\n";
    state = apply_action(state, parsed.action);
  }

  d.outcome = outcome_of(state, d.importance);
  d.validate();
  return result;
}

struct BatchFailure {
  std::string id;
  std::string error;
  std::size_t turns_completed = 0;
};

struct BatchResult {
  std::vector<Dialogue> dialogues;  // sorted by id
  std::vector<BatchFailure> failures;
  int malformed_offers = 0;
  int invalid_actions = 0;
};

// Runs simulations across a thread pool. Each episode is seeded
// independently, so results are identical for any parallelism setting.
inline BatchResult run_batch(const std::vector<SimulationConfig>& configs, int parallelism = 1,
                             const ProviderFactory& factory = nullptr) {
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  struct Slot {
    std::optional<SimulationResult> result;
    std::optional<BatchFailure> failure;
  };
  std::vector<Slot> slots(configs.size());
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        slots[i].result = run_simulation(configs[i], factory);
      } catch (const std::exception& e) {
        slots[i].failure = BatchFailure{configs[i].id, e.what(), 0};
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < parallelism; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BatchResult out;
  for (auto& slot : slots) {
    if (slot.result) {
      out.dialogues.push_back(std::move(slot.result->dialogue));
      out.malformed_offers += slot.result->malformed_offers;
      out.invalid_actions += slot.result->invalid_actions;
    } else if (slot.failure) {
      out.failures.push_back(std::move(*slot.failure));
    }
  }
  std::sort(out.dialogues.begin(), out.dialogues.end(),
            [](const Dialogue& a, const Dialogue& b) { return a.id < b.id; });
  return out;
}

// Persona pipeline: sample a profile, render its adjective prompt, and derive
// the importance weights, all from one per-agent seed.
inline AgentConfig make_agent(const TraitDistribution& dist, const AdjectiveLexicon& lexicon,
                              Role role, std::uint64_t seed) {
  AgentConfig agent;
  agent.profile = sample_profile(dist, seed);
  agent.persona = build_persona_prompt(agent.profile, lexicon, splitmix64(seed + 1)).text;
  agent.weights = assign_importance(agent.profile, role, splitmix64(seed + 2));
  return agent;
}

}  // namespace dispute
