// disputebench: simulate, annotate, and analyze dyadic dispute negotiations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dispute/annotate.hpp"
#include "dispute/corpus.hpp"
#include "dispute/gateway.hpp"
#include "dispute/metrics.hpp"
#include "dispute/persona.hpp"
#include "dispute/report.hpp"
#include "dispute/scripted.hpp"
#include "dispute/stats.hpp"

namespace {

using namespace dispute;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScriptedPolicy draw_policy(Rng& rng) {
  ScriptedPolicy p;
  const double u = rng.next_double();
  if (u < 0.10) {
    p.kind = ScriptedPolicy::Kind::WalkAtRound;
    p.walk_round = 2 + static_cast<int>(rng.next_below(7));
  } else if (u < 0.18) {
    p.kind = ScriptedPolicy::Kind::AcceptAnyOffer;
  } else {
    p.kind = ScriptedPolicy::Kind::Concession;
    p.accept_threshold_start = rng.uniform(55.0, 80.0);
    p.accept_threshold_decay = rng.uniform(1.0, 4.0);
    p.offer_every = 2 + static_cast<int>(rng.next_below(3));
  }
  return p;
}

struct ProviderFlags {
  std::string provider = "openai";
  std::string model;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  double temperature = 1.0;
  int retries = 3;

  ProviderConfig to_config() const {
    ProviderConfig pc;
    pc.provider_id = provider;
    pc.model = model;
    pc.endpoint = endpoint;
    pc.temperature = temperature;
    pc.max_retries = retries;
    return pc;
  }
};

int cmd_simulate(const std::string& out_path, int n, std::uint64_t seed, bool scripted,
                 const ProviderFlags& flags, int max_rounds, int parallelism) {
  std::vector<SimulationConfig> configs;
  const TraitDistribution dist = TraitDistribution::uniform();
  const AdjectiveLexicon& lexicon = default_lexicon();
  for (int i = 0; i < n; ++i) {
    SimulationConfig cfg;
    cfg.seed = splitmix64(seed + static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof(id), "sim-%06d", i);
    cfg.id = id;
    cfg.max_rounds = max_rounds;
    Rng rng(splitmix64(cfg.seed ^ 0xabcdULL));
    for (const Role role : {Role::Buyer, Role::Seller}) {
      cfg.agents[role] = make_agent(dist, lexicon, role,
                                    splitmix64(cfg.seed ^ (role == Role::Buyer ? 1ULL : 2ULL)));
      if (scripted)
        cfg.agents[role].driver = draw_policy(rng);
      else
        cfg.agents[role].driver = flags.to_config();
    }
    configs.push_back(std::move(cfg));
  }
  if (!scripted) {
    // Fail fast on a missing credential before any episode runs.
    HttpChatProvider probe(flags.to_config());
    (void)probe;
  }
  const BatchResult batch = run_batch(configs, parallelism);
  write_corpus(batch.dialogues, out_path);
  std::map<OutcomeKind, int> counts;
  for (const auto& d : batch.dialogues) ++counts[d.outcome.kind];
  std::cout << "dialogues: " << batch.dialogues.size() << "\n";
  for (const auto& [kind, count] : counts)
    std::cout << "  " << outcome_kind_name(kind) << ": " << count << "\n";
  if (!batch.failures.empty()) {
    for (const auto& f : batch.failures)
      std::cerr << "failed: " << f.id << ": " << f.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_annotate(const std::string& in_path, const std::string& out_path,
                 const std::string& annotator, const ProviderFlags& flags, bool force) {
  std::vector<Dialogue> corpus = load_corpus(in_path);
  bool all_done = true;
  for (const auto& d : corpus) all_done = all_done && d.annotated();
  if (all_done && !force) {
    std::cout << "corpus already annotated; pass --force to re-annotate\n";
    write_corpus(corpus, out_path);
    return 0;
  }
  AnnotationStats stats;
  std::unique_ptr<ChatProvider> provider;
  if (annotator == "llm") provider = std::make_unique<HttpChatProvider>(flags.to_config());
  std::size_t segments = 0;
  for (auto& d : corpus) {
    if (annotator == "rules")
      d = annotate_rules(d);
    else
      d = annotate_llm(d, *provider, default_annotation_template(), &stats, flags.retries);
    for (const auto& t : d.turns) segments += t.segments.size();
  }
  write_corpus(corpus, out_path);
  std::cout << "annotated " << corpus.size() << " dialogues, " << segments << " segments\n";
  if (stats.fallback_residual > 0)
    std::cerr << "warning: " << stats.fallback_residual
              << " segments fell back to Residual after unparseable replies\n";
  return 0;
}

int cmd_analyze(const std::string& in_path, const std::string& outdir, int stages,
                const std::string& coding_flag, const std::string& robust_flag, bool standardize,
                bool role_contingent) {
  const std::vector<Dialogue> corpus = load_corpus(in_path);
  std::filesystem::create_directories(outdir);
  const std::vector<SpeakerRecord> records = build_speaker_records(corpus);
  write_text(outdir + "/records.tsv", records_table(records));

  const Coding coding = coding_flag == "dummy" ? Coding::Dummy : Coding::Effect;
  const Robust robust = robust_flag == "none" ? Robust::None : Robust::HC1;
  const BatteryResult battery =
      regression_battery(records, default_dv_list(), coding, robust, standardize, false);
  write_text(outdir + "/regression_" + coding_name(coding) + ".tsv",
             regression_table(battery.results));
  for (const auto& [dv, err] : battery.errors)
    std::cerr << "regression skipped for " << dv << ": " << err << "\n";

  if (role_contingent) {
    const BatteryResult dummy_battery =
        regression_battery(records, default_dv_list(), Coding::Dummy, robust, standardize, true);
    write_text(outdir + "/regression_dummy_interactions.tsv",
               regression_table(dummy_battery.results));
    std::vector<std::pair<std::string, std::pair<Contrast, Contrast>>> effects;
    for (const auto& result : dummy_battery.results)
      for (const auto t : all_traits()) {
        try {
          effects.emplace_back(result.dv, simple_effects(result, trait_name(t)));
        } catch (const std::exception& e) {
          std::cerr << "simple effect skipped for " << result.dv << "/" << trait_name(t) << ": "
                    << e.what() << "\n";
        }
      }
    write_text(outdir + "/simple_effects.tsv", simple_effects_table(effects));
  }

  write_text(outdir + "/heatmap.tsv", heatmap_table(corpus));
  write_text(outdir + "/stages.tsv", stage_table(corpus, stages));
  std::cout << "analysis written to " << outdir << "\n";
  return 0;
}

int cmd_report(const std::string& a_path, const std::string& b_path, const std::string& label_a,
               const std::string& label_b, const std::string& out_path) {
  const auto a = parse_regression_table(read_text(a_path));
  const auto b = parse_regression_table(read_text(b_path));
  const std::string report = comparison_report(label_a, a, label_b, b);
  if (out_path.empty())
    std::cout << report;
  else
    write_text(out_path, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personality-conditioned dispute negotiation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  ProviderFlags flags;
  const auto add_provider_flags = [&flags](CLI::App* cmd) {
    cmd->add_option("--provider", flags.provider, "provider id (credential from DISPUTEBENCH_<ID>_KEY)");
    cmd->add_option("--model", flags.model, "model name");
    cmd->add_option("--endpoint", flags.endpoint, "chat-completion URL");
    cmd->add_option("--temperature", flags.temperature, "sampling temperature");
    cmd->add_option("--retries", flags.retries, "max retries on transient errors");
  };

  auto* sim = app.add_subcommand("simulate", "run negotiation episodes");
  std::string sim_out = "corpus.jsonl";
  int sim_n = 10, sim_rounds = kDefaultMaxRounds, sim_par = 1;
  std::uint64_t sim_seed = 0;
  bool sim_scripted = false;
  sim->add_option("--out", sim_out, "output corpus path");
  sim->add_option("--n", sim_n, "number of dialogues")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "root seed");
  sim->add_option("--max-rounds", sim_rounds, "round cap")->check(CLI::PositiveNumber);
  sim->add_option("--parallelism", sim_par, "worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--scripted", sim_scripted, "use in-process scripted agents");
  add_provider_flags(sim);

  auto* ann = app.add_subcommand("annotate", "label segments with conflict strategies");
  std::string ann_in, ann_out = "annotated.jsonl", ann_kind = "rules";
  bool ann_force = false;
  ann->add_option("--in", ann_in, "input corpus")->required();
  ann->add_option("--out", ann_out, "output corpus");
  ann->add_option("--annotator", ann_kind, "rules | llm")
      ->check(CLI::IsMember({"rules", "llm"}));
  ann->add_flag("--force", ann_force, "re-annotate already-labeled corpora");
  add_provider_flags(ann);

  auto* ana = app.add_subcommand("analyze", "records, regressions, heatmaps, stage profiles");
  std::string ana_in, ana_out = "analysis", ana_coding = "effect", ana_robust = "hc1";
  int ana_stages = 5;
  bool ana_std = true, ana_role = false;
  ana->add_option("--in", ana_in, "annotated corpus")->required();
  ana->add_option("--outdir", ana_out, "output directory");
  ana->add_option("--stages", ana_stages, "temporal stage count")->check(CLI::PositiveNumber);
  ana->add_option("--coding", ana_coding, "effect | dummy")
      ->check(CLI::IsMember({"effect", "dummy"}));
  ana->add_option("--robust", ana_robust, "hc1 | none")->check(CLI::IsMember({"hc1", "none"}));
  ana->add_flag("--standardize,!--no-standardize", ana_std, "z-score trait predictors");
  ana->add_flag("--role-contingent", ana_role, "also fit dummy+interaction models with simple effects");

  auto* rep = app.add_subcommand("report", "compare regression tables across corpora");
  std::string rep_a, rep_b, rep_la = "A", rep_lb = "B", rep_out;
  rep->add_option("--a", rep_a, "first regression table")->required();
  rep->add_option("--b", rep_b, "second regression table")->required();
  rep->add_option("--label-a", rep_la, "first corpus label");
  rep->add_option("--label-b", rep_lb, "second corpus label");
  rep->add_option("--out", rep_out, "report path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_out, sim_n, sim_seed, sim_scripted, flags, sim_rounds, sim_par);
    if (ann->parsed()) return cmd_annotate(ann_in, ann_out, ann_kind, flags, ann_force);
    if (ana->parsed())
      return cmd_analyze(ana_in, ana_out, ana_stages, ana_coding, ana_robust, ana_std, ana_role);
    if (rep->parsed()) return cmd_report(rep_a, rep_b, rep_la, rep_lb, rep_out);
  } catch (const dispute::AuthError& e) {
    std::cerr << "auth error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
