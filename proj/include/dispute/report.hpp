#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dispute/metrics.hpp"
#include "dispute/stats.hpp"

namespace dispute {

inline constexpr const char* kMissingMarker = "NA";

// All tables are TAB-delimited with fixed 6-decimal numbers so repeated runs
// are byte-identical.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : kMissingMarker;
}

// Three-level significance convention, strict inequalities.
inline std::string star(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

inline std::string records_table(const std::vector<SpeakerRecord>& records) {
  std::ostringstream out;
  out << "dialogue_id\trole\tposition";
  for (const auto t : all_traits()) out << "\tSELF_" << trait_name(t);
  for (const auto t : all_traits()) out << "\tPARTNER_" << trait_name(t);
  for (const char* dv : kDvNames) out << '\t' << dv;
  out << '\n';
  for (const auto& r : records) {
    out << r.dialogue_id << '\t' << role_name(r.role) << '\t' << format_number(r.position_effect);
    for (const auto t : all_traits()) out << '\t' << format_number(r.self.value(t));
    for (const auto t : all_traits()) out << '\t' << format_number(r.partner.value(t));
    for (const char* dv : kDvNames) out << '\t' << format_optional(dv_value(r, dv));
    out << '\n';
  }
  return out.str();
}

inline std::string regression_table(const std::vector<RegressionResult>& results) {
  std::ostringstream out;
  out << "dv\tiv\tbeta\tse\tstat\tp\tsig\tn\tmodel\tcoding\trobust\tstandardized\n";
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.columns.size(); ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      out << r.dv << '\t' << r.columns[j] << '\t' << format_number(r.beta(idx)) << '\t'
          << format_number(r.se(idx)) << '\t' << format_number(r.stat(idx)) << '\t'
          << format_number(r.p(idx)) << '\t' << star(r.p(idx)) << '\t' << r.n << '\t' << r.model
          << '\t' << coding_name(r.coding) << '\t' << robust_name(r.robust) << '\t'
          << (r.standardized ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

inline std::string simple_effects_table(
    const std::vector<std::pair<std::string, std::pair<Contrast, Contrast>>>& effects) {
  std::ostringstream out;
  out << "dv\teffect\testimate\tse\tstat\tp\tsig\n";
  for (const auto& [dv, pair] : effects) {
    for (const Contrast* c : {&pair.first, &pair.second}) {
      out << dv << '\t' << c->name << '\t' << format_number(c->estimate) << '\t'
          << format_number(c->se) << '\t' << format_number(c->stat) << '\t'
          << format_number(c->p) << '\t' << star(c->p) << '\n';
    }
  }
  return out.str();
}

// Per high-trait group, the distribution of the nine strategies over all
// segments spoken by group members; each emitted row sums to 100.
inline std::map<Trait, std::optional<std::array<double, kStrategyCount>>> heatmap_rows(
    const std::vector<Dialogue>& corpus) {
  std::map<Trait, std::optional<std::array<double, kStrategyCount>>> rows;
  for (const auto trait : all_traits()) {
    std::array<double, kStrategyCount> counts{};
    double total = 0;
    for (const auto& d : corpus) {
      for (const Role role : {Role::Buyer, Role::Seller}) {
        const double v = d.profiles[role].value(trait);
        const bool high =
            d.profiles[role].scale == TraitScale::SixPoint ? v >= 2.0 : v > 3.5;
        if (!high) continue;
        for (const auto& turn : d.turns) {
          if (turn.speaker != role) continue;
          for (const auto& seg : turn.segments) {
            ++counts[static_cast<int>(detail::require_strategy(seg))];
            ++total;
          }
        }
      }
    }
    if (total == 0) {
      rows[trait] = std::nullopt;
    } else {
      for (auto& c : counts) c *= 100.0 / total;
      rows[trait] = counts;
    }
  }
  return rows;
}

inline std::string heatmap_table(const std::vector<Dialogue>& corpus) {
  const auto rows = heatmap_rows(corpus);
  std::ostringstream out;
  out << "trait";
  for (const auto s : all_strategies()) out << '\t' << strategy_name(s);
  out << '\n';
  for (const auto trait : all_traits()) {
    out << trait_name(trait);
    const auto& row = rows.at(trait);
    for (int c = 0; c < kStrategyCount; ++c)
      out << '\t' << (row ? format_number((*row)[c]) : kMissingMarker);
    out << '\n';
  }
  return out.str();
}

// Corpus-level temporal profile: per-dialogue stage distributions averaged
// over dialogues that have segments in that stage.
inline std::string stage_table(const std::vector<Dialogue>& corpus, int n_stages,
                               std::optional<Role> speaker = std::nullopt) {
  std::vector<std::array<double, kStrategyCount>> sums(static_cast<std::size_t>(n_stages));
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_stages), 0);
  for (auto& row : sums) row.fill(0.0);
  for (const auto& d : corpus) {
    const auto dist = stage_distribution(d, speaker, n_stages);
    for (std::size_t s = 0; s < dist.rows.size(); ++s) {
      if (!dist.rows[s]) continue;
      for (int c = 0; c < kStrategyCount; ++c) sums[s][c] += (*dist.rows[s])[c];
      ++counts[s];
    }
  }
  std::ostringstream out;
  out << "stage";
  for (const auto s : all_strategies()) out << '\t' << strategy_name(s);
  out << '\n';
  for (std::size_t s = 0; s < sums.size(); ++s) {
    out << (s + 1);
    for (int c = 0; c < kStrategyCount; ++c)
      out << '\t' << (counts[s] ? format_number(sums[s][c] / static_cast<double>(counts[s]))
                                : kMissingMarker);
    out << '\n';
  }
  return out.str();
}

// One parsed row of a regression table, for cross-corpus comparison.
struct RegTableRow {
  std::string dv;
  std::string iv;
  double beta = 0;
  double p = 1;
};

inline std::vector<RegTableRow> parse_regression_table(const std::string& text) {
  std::vector<RegTableRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, '\t')) fields.push_back(field);
    if (fields.size() < 6) throw std::invalid_argument("malformed regression table row: " + line);
    rows.push_back(RegTableRow{fields[0], fields[1], std::stod(fields[2]), std::stod(fields[5])});
  }
  return rows;
}

// Aligns two corpora's regression tables and lists, per DV, which predictors
// are significant (p < .05) in both, and which in only one. Mismatched DV
// sets are reported and the intersection is compared.
inline std::string comparison_report(const std::string& label_a,
                                     const std::vector<RegTableRow>& a, const std::string& label_b,
                                     const std::vector<RegTableRow>& b) {
  const auto by_dv = [](const std::vector<RegTableRow>& rows) {
    std::map<std::string, std::set<std::string>> sig;
    std::set<std::string> dvs;
    for (const auto& r : rows) {
      dvs.insert(r.dv);
      if (r.p < 0.05 && r.iv != "CONST") sig[r.dv].insert(r.iv);
    }
    return std::make_pair(dvs, sig);
  };
  const auto [dvs_a, sig_a] = by_dv(a);
  const auto [dvs_b, sig_b] = by_dv(b);

  std::ostringstream out;
  out << "comparison\t" << label_a << "\tvs\t" << label_b << '\n';
  std::vector<std::string> only_a, only_b, common;
  for (const auto& dv : dvs_a)
    (dvs_b.count(dv) ? common : only_a).push_back(dv);
  for (const auto& dv : dvs_b)
    if (!dvs_a.count(dv)) only_b.push_back(dv);
  for (const auto& dv : only_a) out << "warning\tdv " << dv << " only in " << label_a << '\n';
  for (const auto& dv : only_b) out << "warning\tdv " << dv << " only in " << label_b << '\n';

  std::size_t overlap_total = 0, union_total = 0;
  for (const auto& dv : common) {
    const auto& sa = sig_a.count(dv) ? sig_a.at(dv) : std::set<std::string>{};
    const auto& sb = sig_b.count(dv) ? sig_b.at(dv) : std::set<std::string>{};
    std::vector<std::string> both, a_only, b_only;
    for (const auto& iv : sa) (sb.count(iv) ? both : a_only).push_back(iv);
    for (const auto& iv : sb)
      if (!sa.count(iv)) b_only.push_back(iv);
    overlap_total += both.size();
    union_total += both.size() + a_only.size() + b_only.size();
    const auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
      return s.empty() ? std::string("-") : s;
    };
    out << "dv\t" << dv << "\tboth\t" << join(both) << "\tonly_" << label_a << '\t'
        << join(a_only) << "\tonly_" << label_b << '\t' << join(b_only) << '\n';
  }
  const double overlap_pct =
      union_total == 0 ? 100.0
                       : 100.0 * static_cast<double>(overlap_total) / static_cast<double>(union_total);
  out << "overlap_pct\t" << format_number(overlap_pct) << '\n';
  return out.str();
}

}  // namespace dispute
