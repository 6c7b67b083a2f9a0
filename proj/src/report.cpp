#include "anvaya/report.hpp"

#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace anvaya {

namespace {

constexpr std::string_view kTauAggregation = "mean-of-sentence-tau";

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string format_tau(const std::optional<double>& tau) { return tau ? fmt::format("{:.4f}", *tau) : "-"; }

}  // namespace

nlohmann::json MetricSettings::to_json() const {
    return {{"tokenization", tokenization_name(tokenize)},
            {"smoothing", to_string(smoothing)},
            {"corpus_smoothing", "none"},
            {"alignment", to_string(alignment)},
            {"tau_variant", "tau-a over aligned tokens"},
            {"tau_aggregation", kTauAggregation},
            {"rule_profile_hash", profile_hash}};
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : per_sentence) {
        nlohmann::json row{{"id", s.id}, {"bleu", s.bleu}, {"tau", optional_number(s.tau)},
                           {"unaligned_count", s.unaligned_count}};
        if (s.compliance) row["compliance"] = *s.compliance;
        rows.push_back(std::move(row));
    }
    return {{"per_sentence", rows},
            {"corpus_bleu", corpus_bleu},
            {"mean_tau", optional_number(mean_tau)},
            {"settings", settings.to_json()}};
}

std::vector<Hypothesis> load_hypotheses(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError(0, "cannot open hypothesis file " + path.string());
    std::vector<Hypothesis> hyps;
    std::set<std::string> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (collapse_whitespace(text).empty()) continue;
        Hypothesis h;
        try {
            const auto j = nlohmann::json::parse(text);
            h.id = j.at("id").get<std::string>();
            h.prose = normalize_iast(j.at("prose_pred").get<std::string>());
            if (j.contains("rules_followed") && !j.at("rules_followed").is_null()) {
                h.rules_followed = j.at("rules_followed").get<std::vector<int>>();
                for (int r : *h.rules_followed)
                    if (r < 1 || r > kComplianceRules)
                        throw CorpusError(line, "rule id " + std::to_string(r) + " outside 1..5");
            }
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(line, std::string("malformed hypothesis: ") + e.what());
        }
        if (!seen.insert(h.id).second) throw CorpusError(line, "duplicate id '" + h.id + "'");
        hyps.push_back(std::move(h));
    }
    return hyps;
}

void write_hypotheses(std::ostream& out, const std::vector<Hypothesis>& hyps) {
    for (const auto& h : hyps) {
        nlohmann::json j{{"id", h.id}, {"prose_pred", h.prose}};
        if (h.rules_followed) j["rules_followed"] = *h.rules_followed;
        out << j.dump() << '\n';
    }
}

namespace {

std::map<std::string, const VerseRecord*> index_by_id(const std::vector<VerseRecord>& records) {
    std::map<std::string, const VerseRecord*> out;
    for (const auto& r : records) out[r.id] = &r;
    return out;
}

template <typename Pred>
void require_ids(const std::vector<Hypothesis>& hyps, const std::map<std::string, const VerseRecord*>& refs,
                 Pred usable, const std::string& what) {
    std::vector<std::string> missing;
    for (const auto& h : hyps) {
        const auto it = refs.find(h.id);
        if (it == refs.end() || !usable(*it->second)) missing.push_back(h.id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw MetricError("hypothesis ids without " + what + ": " + list);
    }
}

}  // namespace

MetricReport evaluate(const std::vector<Hypothesis>& hyps, const std::vector<VerseRecord>& refs,
                      const MetricSettings& settings) {
    if (hyps.empty()) throw MetricError("no hypotheses to evaluate");
    const auto by_id = index_by_id(refs);
    require_ids(hyps, by_id, [](const VerseRecord& r) { return r.prose.has_value(); }, "reference prose");

    MetricReport report;
    report.settings = settings;
    std::vector<TokenPair> pairs;
    double tau_sum = 0;
    std::size_t tau_count = 0;
    for (const auto& h : hyps) {
        Tokens hyp = tokenize_iast(h.prose, settings.tokenize);
        Tokens ref = tokenize_iast(*by_id.at(h.id)->prose, settings.tokenize);
        SentenceMetrics s;
        s.id = h.id;
        s.bleu = sentence_bleu(hyp, ref, settings.smoothing);
        const auto tau = kendall_tau(hyp, ref, settings.alignment);
        s.tau = tau.tau;
        s.unaligned_count = tau.unaligned_count;
        if (tau.tau) {
            tau_sum += *tau.tau;
            ++tau_count;
        }
        report.per_sentence.push_back(std::move(s));
        pairs.emplace_back(std::move(hyp), std::move(ref));
    }
    report.corpus_bleu = corpus_bleu(pairs);
    if (tau_count) report.mean_tau = tau_sum / static_cast<double>(tau_count);
    return report;
}

void write_report_table(std::ostream& out, const MetricReport& report) {
    std::size_t width = 6;
    for (const auto& s : report.per_sentence) width = std::max(width, s.id.size());
    out << fmt::format("{:<{}}  {:>8}  {:>7}  {:>9}\n", "id", width, "BLEU", "tau", "unaligned");
    for (const auto& s : report.per_sentence)
        out << fmt::format("{:<{}}  {:>8.3f}  {:>7}  {:>9}\n", s.id, width, s.bleu, format_tau(s.tau),
                           s.unaligned_count);
    out << std::string(width + 34, '-') << '\n';
    out << fmt::format("{:<{}}  {:>8.3f}  {:>7}\n", "corpus", width, report.corpus_bleu, format_tau(report.mean_tau));
    const auto& st = report.settings;
    out << fmt::format("tokenization={} smoothing={} (sentence; corpus unsmoothed) alignment={} tau={}", tokenization_name(st.tokenize),
                       to_string(st.smoothing), to_string(st.alignment), kTauAggregation);
    if (!st.profile_hash.empty()) out << " profile=" << st.profile_hash.substr(0, 12);
    out << '\n';
}

namespace {

template <typename T>
std::vector<std::string> first_appearance(const std::vector<GridCell>& cells, T GridCell::*field) {
    std::vector<std::string> out;
    for (const auto& c : cells)
        if (std::find(out.begin(), out.end(), c.*field) == out.end()) out.push_back(c.*field);
    return out;
}

}  // namespace

void write_grid_table(std::ostream& out, const std::vector<GridCell>& cells) {
    const auto models = first_appearance(cells, &GridCell::model);
    const auto corpora = first_appearance(cells, &GridCell::corpus);
    std::size_t width = 5;
    for (const auto& m : models) width = std::max(width, m.size());

    out << fmt::format("{:<{}}", "Model", width);
    for (const auto& c : corpora) out << fmt::format(" | {:^17}", c);
    out << '\n' << fmt::format("{:<{}}", "", width);
    for (std::size_t i = 0; i < corpora.size(); ++i) out << fmt::format(" | {:>8} {:>8}", "BLEU", "KT");
    out << '\n';
    for (const auto& m : models) {
        out << fmt::format("{:<{}}", m, width);
        for (const auto& c : corpora) {
            const auto it = std::find_if(cells.begin(), cells.end(),
                                         [&](const GridCell& g) { return g.model == m && g.corpus == c; });
            if (it == cells.end())
                out << fmt::format(" | {:>8} {:>8}", "-", "-");
            else
                out << fmt::format(" | {:>8.3f} {:>8}", it->report.corpus_bleu, format_tau(it->report.mean_tau));
        }
        out << '\n';
    }
}

nlohmann::json grid_to_json(const std::vector<GridCell>& cells) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cells)
        out.push_back({{"model", c.model}, {"corpus", c.corpus}, {"report", c.report.to_json()}});
    return out;
}

nlohmann::json ComplianceReport::to_json() const {
    nlohmann::json out_rows = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json per_rule = nlohmann::json::object();
        for (int k = 1; k <= kComplianceRules; ++k)
            per_rule[std::to_string(k)] = r.result.passed[static_cast<std::size_t>(k - 1)];
        out_rows.push_back({{"id", r.id},
                            {"score", r.result.score},
                            {"per_rule", per_rule},
                            {"source", r.adjudicated ? "adjudicated" : "mechanical"}});
    }
    nlohmann::json w = nlohmann::json::object();
    for (int k = 1; k <= kComplianceRules; ++k) w[std::to_string(k)] = weights.weight(k);
    return {{"per_sentence", out_rows},
            {"mean_score", mean_score},
            {"weights", w},
            {"rule_profile_hash", profile_hash}};
}

ComplianceReport score_compliance(const std::vector<Hypothesis>& hyps, const std::vector<VerseRecord>& gold,
                                  const ComplianceWeights& weights, const RuleProfile& profile,
                                  const TokenizeOptions& tokenize) {
    weights.validate();
    const auto by_id = index_by_id(gold);
    require_ids(hyps, by_id, [](const VerseRecord&) { return true; }, "a gold record");

    ComplianceReport report;
    report.weights = weights;
    report.profile_hash = profile.hash();
    double total = 0;
    for (const auto& h : hyps) {
        ComplianceRow row;
        row.id = h.id;
        if (h.rules_followed) {
            row.adjudicated = true;
            for (int r : *h.rules_followed) row.result.passed[static_cast<std::size_t>(r - 1)] = true;
            row.result.score = weighted_score(row.result.passed, weights);
        } else {
            const auto* record = by_id.at(h.id);
            if (!record->annotation) throw MetricError("gold record '" + h.id + "' has no annotation");
            row.result = compliance_score(tokenize_iast(h.prose, tokenize), *record->annotation, weights, profile);
        }
        total += row.result.score;
        report.rows.push_back(std::move(row));
    }
    if (!report.rows.empty()) report.mean_score = total / static_cast<double>(report.rows.size());
    return report;
}

void write_compliance_table(std::ostream& out, const ComplianceReport& report) {
    std::size_t width = 6;
    for (const auto& r : report.rows) width = std::max(width, r.id.size());
    out << fmt::format("{:<{}}  {:>6}  {:<11}  {}\n", "id", width, "score", "rules", "source");
    for (const auto& r : report.rows) {
        std::string rules;
        for (int k = 1; k <= kComplianceRules; ++k)
            if (r.result.passed[static_cast<std::size_t>(k - 1)]) rules += (rules.empty() ? "" : ",") + std::to_string(k);
        if (rules.empty()) rules = "-";
        out << fmt::format("{:<{}}  {:>6.2f}  {:<11}  {}\n", r.id, width, r.result.score, rules,
                           r.adjudicated ? "adjudicated" : "mechanical");
    }
    out << std::string(width + 36, '-') << '\n';
    out << fmt::format("{:<{}}  {:>6.2f}  (out of {:g})\n", "mean", width, report.mean_score, report.weights.total());
}

}  // namespace anvaya
