#pragma once

#include "anvaya/corpus.hpp"
#include "anvaya/metrics.hpp"
#include "anvaya/profile.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace anvaya {

struct MetricSettings {
    TokenizeOptions tokenize;
    Smoothing smoothing = Smoothing::exp;  // sentence level; corpus BLEU is unsmoothed
    AlignmentPolicy alignment = AlignmentPolicy::greedy;
    std::string profile_hash;  // empty when no rule profile was involved

    nlohmann::json to_json() const;
};

struct SentenceMetrics {
    std::string id;
    double bleu = 0;
    std::optional<double> tau;
    std::optional<double> compliance;
    std::size_t unaligned_count = 0;
};

struct MetricReport {
    std::vector<SentenceMetrics> per_sentence;
    double corpus_bleu = 0;
    std::optional<double> mean_tau;  // mean of the defined sentence taus
    MetricSettings settings;

    nlohmann::json to_json() const;
};

// A system output line: {"id", "prose_pred"} plus an optional adjudicated
// "rules_followed" list used by compliance scoring.
struct Hypothesis {
    std::string id;
    std::string prose;
    std::optional<std::vector<int>> rules_followed;
};

/// Reads jsonl hypotheses in file order. Throws CorpusError on malformed
/// lines and duplicate ids.
std::vector<Hypothesis> load_hypotheses(const std::filesystem::path& path);
void write_hypotheses(std::ostream& out, const std::vector<Hypothesis>& hyps);

/// Scores hypotheses against reference prose. Every hypothesis id must name
/// a reference record carrying prose; otherwise throws MetricError listing
/// the missing ids. Throws MetricError for an empty hypothesis list.
MetricReport evaluate(const std::vector<Hypothesis>& hyps, const std::vector<VerseRecord>& refs,
                      const MetricSettings& settings);

/// Aligned-column table: id, BLEU, tau, unaligned; corpus summary last.
void write_report_table(std::ostream& out, const MetricReport& report);

struct GridCell {
    std::string model;
    std::string corpus;
    MetricReport report;
};

/// Model x corpus grid of BLEU and tau, one row per model, in order of
/// first appearance.
void write_grid_table(std::ostream& out, const std::vector<GridCell>& cells);
nlohmann::json grid_to_json(const std::vector<GridCell>& cells);

struct ComplianceRow {
    std::string id;
    ComplianceResult result;
    bool adjudicated = false;
};

struct ComplianceReport {
    std::vector<ComplianceRow> rows;
    double mean_score = 0;
    ComplianceWeights weights;
    std::string profile_hash;

    nlohmann::json to_json() const;
};

/// Per-record rule compliance. Rows with `rules_followed` use that
/// adjudication; the rest are checked mechanically against the gold
/// annotation (which must then be present). Throws MetricError on id
/// mismatch or a missing annotation.
ComplianceReport score_compliance(const std::vector<Hypothesis>& hyps, const std::vector<VerseRecord>& gold,
                                  const ComplianceWeights& weights, const RuleProfile& profile,
                                  const TokenizeOptions& tokenize = {});

void write_compliance_table(std::ostream& out, const ComplianceReport& report);

}  // namespace anvaya
