#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <map>

#include "dispute/client.hpp"
#include "dispute/corpus.hpp"
#include "dispute/negotiation.hpp"
#include "dispute/persona.hpp"
#include "dispute/taxonomy.hpp"

#include "helpers.hpp"

using namespace dispute;

TEST_CASE("strategy categories partition the taxonomy") {
  std::map<IrpCategory, int> sizes;
  for (const auto s : all_strategies()) ++sizes[category_of(s)];
  CHECK(sizes[IrpCategory::Cooperative] == 4);
  CHECK(sizes[IrpCategory::Neutral] == 2);
  CHECK(sizes[IrpCategory::Competitive] == 2);
  CHECK(sizes[IrpCategory::Residual] == 1);
  for (const auto s : all_strategies()) CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK(parse_strategy("Positive Expectations") == IrpStrategy::PositiveExpectations);
  CHECK(parse_strategy("Propo") == IrpStrategy::Proposal);
  CHECK_FALSE(try_parse_strategy("proposal"));  // canonical names are case-sensitive
}

TEST_CASE("trait levels reject zero and out-of-range") {
  CHECK_THROWS(TraitLevel::from_int(0));
  CHECK_THROWS(TraitLevel::from_int(4));
  CHECK(TraitLevel::from_int(-3).degree() == 3);
  CHECK(TraitLevel::from_int(2).positive());
}

TEST_CASE("worked scoring example") {
  ImportanceWeights w;
  w[Issue::REF] = 40;
  w[Issue::SNR] = 25;
  w[Issue::BNR] = 10;
  w[Issue::SAP] = 20;
  w[Issue::BAP] = 5;
  IssueAllocation a;
  a.refund = RefundLevel::Partial;
  a.seller_review = ReviewLevel::Remove;
  a.buyer_review = ReviewLevel::Remove;
  a.seller_apology = ApologyLevel::Apologize;
  a.buyer_apology = ApologyLevel::NotApologize;
  CHECK(score(a, w, Role::Buyer) == Catch::Approx(70.0).margin(1e-12));
}

TEST_CASE("scores of mirror allocations complement for mirror weights") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto w = testutil::random_weights(rng);
    const auto a = testutil::random_allocation(rng);
    double buyer = score(a, w, Role::Buyer), seller = score(a, w, Role::Seller);
    CHECK(buyer >= -1e-9);
    CHECK(buyer <= 100.0 + 1e-9);
    CHECK(buyer + seller == Catch::Approx(100.0).margin(1e-9));
  }
}

TEST_CASE("action grammar") {
  CHECK(parse_action("ACCEPT-DEAL").action.kind == Action::Kind::Accept);
  CHECK(parse_action("  WALK-AWAY  ").action.kind == Action::Kind::WalkAway);
  CHECK(parse_action("let's talk\nREJECT-DEAL").action.kind == Action::Kind::Reject);
  CHECK(parse_action("accept-deal").action.kind == Action::Kind::Message);  // case-sensitive
  CHECK(parse_action("I might WALK-AWAY soon").action.kind == Action::Kind::Message);

  const auto ok = parse_action(
      R"(Final thought. SUBMISSION is next.
SUBMISSION: {"REF": "partial", "SNR": "remove", "BNR": "keep", "SAP": "apologize", "BAP": "not apologize"})");
  REQUIRE(ok.action.kind == Action::Kind::Submit);
  REQUIRE(ok.action.offer);
  CHECK(ok.action.offer->refund == RefundLevel::Partial);
  CHECK(ok.action.offer->buyer_apology == ApologyLevel::NotApologize);
  CHECK_FALSE(ok.malformed);

  const auto bad = parse_action(R"(SUBMISSION: {"REF": "half"})");
  CHECK(bad.action.kind == Action::Kind::Message);
  CHECK(bad.malformed);

  const auto extra = parse_action(
      R"(SUBMISSION: {"REF": "none", "SNR": "keep", "BNR": "keep", "SAP": "apologize", "BAP": "apologize", "PRICE": "low"})");
  CHECK(extra.malformed);
}

TEST_CASE("offer values accept the paper's loose spellings") {
  IssueAllocation a;
  CHECK_FALSE(detail::parse_offer_object(
      R"({"REF": "None", "SNR": "remove", "BNR": "not remove", "SAP": "apologize", "BAP": "not apologize"})",
      a));
  CHECK(a.refund == RefundLevel::None);
  CHECK(a.buyer_review == ReviewLevel::Keep);
  CHECK(a.buyer_apology == ApologyLevel::NotApologize);
}

TEST_CASE("accept requires an opponent standing offer and reject clears it") {
  auto s = NegotiationState::initial();
  CHECK_THROWS_AS(apply_action(s, Action{Action::Kind::Accept, "ACCEPT-DEAL", {}}),
                  std::logic_error);
  IssueAllocation offer;
  s = apply_action(s, Action{Action::Kind::Submit, "SUBMISSION: ...", offer});  // Buyer
  // Own offer cannot be accepted by its author on some later turn; the seller
  // may though.
  s = apply_action(s, Action{Action::Kind::Reject, "REJECT-DEAL", {}});  // Seller
  CHECK_FALSE(s.standing);
  CHECK_THROWS_AS(apply_action(s, Action{Action::Kind::Accept, "ACCEPT-DEAL", {}}),
                  std::logic_error);
}

TEST_CASE("round cap yields NoAgreement") {
  auto s = NegotiationState::initial(Role::Buyer, 25);
  for (int i = 0; i < 50; ++i) {
    REQUIRE_FALSE(s.is_terminal());
    s = apply_action(s, Action{Action::Kind::Message, "hello there", {}});
  }
  REQUIRE(s.is_terminal());
  CHECK(*s.terminal == OutcomeKind::NoAgreement);
  CHECK(s.completed_rounds() == 25);
  Rng rng(3);
  const auto out = outcome_of(
      s, PerRole<ImportanceWeights>{testutil::random_weights(rng), testutil::random_weights(rng)});
  CHECK(out.accept(Role::Buyer) == 0);
  CHECK(out.not_walk_away(Role::Seller) == 1);
  CHECK_FALSE(out.scores.buyer);
}

TEST_CASE("walk-away marks only the walker") {
  auto s = NegotiationState::initial();
  s = apply_action(s, Action{Action::Kind::Message, "hi", {}});
  s = apply_action(s, Action{Action::Kind::WalkAway, "WALK-AWAY", {}});
  Rng rng(4);
  const auto out = outcome_of(
      s, PerRole<ImportanceWeights>{testutil::random_weights(rng), testutil::random_weights(rng)});
  CHECK(out.kind == OutcomeKind::WalkAway);
  CHECK(out.not_walk_away(Role::Seller) == 0);
  CHECK(out.not_walk_away(Role::Buyer) == 1);
  CHECK_FALSE(out.scores.seller);
}

TEST_CASE("human decimal mapping uses six equal-width left-closed bins") {
  CHECK(map_human_to_level(1.0).value == -3);
  CHECK(map_human_to_level(2.5).value == -1);
  CHECK(map_human_to_level(3.0).value == 1);
  CHECK(map_human_to_level(11.0 / 3.0 - 1e-9).value == 1);
  CHECK(map_human_to_level(11.0 / 3.0).value == 2);
  CHECK(map_human_to_level(5.0).value == 3);
  CHECK_THROWS(map_human_to_level(0.9));
}

TEST_CASE("persona prompt renders modifiers and samples without replacement") {
  const auto profile = PersonalityProfile::six_point({3, -1, 2, -3, 1});
  const auto prompt = build_persona_prompt(profile, default_lexicon(), 99);
  REQUIRE(prompt.adjectives.size() == 15);
  // EXT level +3 -> "very <high-pole>", AGR -1 -> "a bit <low-pole>", CON +2 bare.
  for (int k = 0; k < 3; ++k) {
    CHECK(prompt.adjectives[k].rfind("very ", 0) == 0);
    CHECK(prompt.adjectives[3 + k].rfind("a bit ", 0) == 0);
    CHECK(prompt.adjectives[6 + k].find("very") == std::string::npos);
    CHECK(prompt.adjectives[6 + k].find("a bit") == std::string::npos);
  }
  for (std::size_t i = 0; i < prompt.adjectives.size(); ++i)
    for (std::size_t j = i + 1; j < prompt.adjectives.size(); ++j)
      CHECK(prompt.adjectives[i] != prompt.adjectives[j]);
  CHECK(prompt.text.rfind("You are ", 0) == 0);
  CHECK(build_persona_prompt(profile, default_lexicon(), 99).text == prompt.text);
}

TEST_CASE("importance weights embed the agreeableness apology term") {
  for (const int agr : {-3, -1, 2, 3}) {
    const auto profile = PersonalityProfile::six_point({1, agr, 1, 1, 1});
    const auto wb = assign_importance(profile, Role::Buyer, 7);
    CHECK(wb.sum() == Catch::Approx(100.0).margin(1e-9));
    // Recover the raw apology weight from the normalization factor: weights
    // are proportional to raws, so check the ratio against a re-derivation.
    Rng rng(splitmix64(7ULL ^ 0x9e3779b97f4a7c15ULL));
    double raw_total = 0;
    std::array<double, kIssueCount> raw{};
    for (const auto issue : all_issues()) {
      double r;
      if (issue == Issue::SAP)
        r = 20.0 + 2.13 * agr;
      else
        r = rng.uniform(5.0, 40.0);
      raw[static_cast<int>(issue)] = std::max(r, 1.0);
      raw_total += raw[static_cast<int>(issue)];
    }
    for (const auto issue : all_issues())
      CHECK(wb[issue] ==
            Catch::Approx(100.0 * raw[static_cast<int>(issue)] / raw_total).margin(1e-9));
  }
}

TEST_CASE("corpus round-trips byte-identically") {
  Rng rng(42);
  std::vector<Dialogue> corpus;
  for (int i = 0; i < 20; ++i)
    corpus.push_back(testutil::random_dialogue(rng, "rt-" + std::to_string(i)));
  const auto path = std::filesystem::temp_directory_path() / "dispute_rt.jsonl";
  write_corpus(corpus, path.string());
  const auto loaded = load_corpus(path.string());
  REQUIRE(loaded.size() == corpus.size());
  CHECK(loaded == corpus);
  const auto path2 = std::filesystem::temp_directory_path() / "dispute_rt2.jsonl";
  write_corpus(loaded, path2.string());
  std::ifstream a(path), b(path2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("corpus errors carry line numbers") {
  const auto path = std::filesystem::temp_directory_path() / "dispute_bad.jsonl";
  {
    Rng rng(5);
    std::ofstream out(path);
    out << dialogue_to_line(testutil::random_dialogue(rng, "good-1")) << "\n";
    out << "{\"id\": \"broken\"}\n";
  }
  try {
    load_corpus(path.string());
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("dialogue validation rejects structural defects") {
  Rng rng(6);
  auto d = testutil::random_dialogue(rng, "v-1");
  auto broken = d;
  broken.turns[1].speaker = broken.turns[0].speaker;
  CHECK_THROWS_WITH(broken.validate(), Catch::Matchers::ContainsSubstring("non-alternating"));
  broken = d;
  broken.outcome.kind = OutcomeKind::Agreement;
  CHECK_THROWS(broken.validate());
}

TEST_CASE("provider retry policy") {
  MockChatProvider mock;
  mock.replies = {"hello"};
  mock.transient_failures = 2;
  std::vector<std::chrono::milliseconds> sleeps;
  const auto result = complete_with_retries(
      mock, {{"user", "hi"}}, 3, nullptr,
      [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  CHECK(result.text == "hello");
  CHECK(result.attempts == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[1] == 2 * sleeps[0]);  // exponential backoff

  MockChatProvider exhausted;
  exhausted.transient_failures = 5;
  CHECK_THROWS_AS(complete_with_retries(exhausted, {}, 2, nullptr, [](auto) {}), TransientError);
  CHECK(exhausted.calls == 3);  // initial attempt + 2 retries

  MockChatProvider auth;
  auth.fail_auth = true;
  CHECK_THROWS_AS(complete_with_retries(auth, {}, 5, nullptr, [](auto) {}), AuthError);
  CHECK(auth.calls == 1);  // never retried
}

TEST_CASE("credential env var defaults to DISPUTEBENCH_<ID>_KEY") {
  ProviderConfig pc;
  pc.provider_id = "openai";
  CHECK(pc.credential_variable() == "DISPUTEBENCH_OPENAI_KEY");
  CHECK_THROWS_AS(HttpChatProvider(pc), AuthError);  // not set in test env
}

TEST_CASE("shipped lexicon file matches the built-in lexicon") {
  const auto loaded = load_lexicon(DISPUTE_LEXICON_PATH);
  const auto& builtin = default_lexicon();
  CHECK(loaded.total_pairs() == 70);
  for (const auto t : all_traits())
    CHECK(loaded.pairs[static_cast<int>(t)] == builtin.pairs[static_cast<int>(t)]);
  CHECK_THROWS(load_lexicon("/nonexistent/lexicon.json"));
}
