// anvaya: batch linearization, evaluation, prompt generation and compliance
// scoring over verse corpora.

#include "anvaya/client.hpp"
#include "anvaya/corpus.hpp"
#include "anvaya/error.hpp"
#include "anvaya/hash.hpp"
#include "anvaya/linearizer.hpp"
#include "anvaya/metrics.hpp"
#include "anvaya/profile.hpp"
#include "anvaya/prompts.hpp"
#include "anvaya/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anvaya;

namespace {

struct Common {
    std::string input;
    std::string output;
    std::string profile;
    std::string format = "jsonl";
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_profile = true) {
    cmd->add_option("--input,-i", c.input, "Input file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output,-o", c.output, "Output file");
    if (with_profile) cmd->add_option("--profile", c.profile, "Rule profile json")->check(CLI::ExistingFile);
    cmd->add_option("--format", c.format, "Corpus format")->check(CLI::IsMember({"jsonl", "tsv"}));
    cmd->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::Range(1u, 256u));
}

CorpusFormat corpus_format(const Common& c) { return *parse_corpus_format(c.format); }

RuleProfile load_profile(const Common& c) { return c.profile.empty() ? RuleProfile{} : RuleProfile::load(c.profile); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Everything needed to re-run a command: what it read (with content
// hashes), the profile, metric settings and the effective configuration.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string profile_hash;
    json metric_settings;
    std::string effective_config;

    json to_json() const {
        json in = json::array();
        for (const auto& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_hex(read_file(p))}});
        return {{"command", command},
                {"inputs", in},
                {"rule_profile_hash", profile_hash},
                {"metric_settings", metric_settings},
                {"artifact_version", ANVAYA_VERSION},
                {"timestamp", utc_now()},
                {"effective_config", effective_config}};
    }

    void write_next_to(const fs::path& output) const {
        fs::path target = fs::is_directory(output) ? output / "manifest.json"
                                                   : fs::path(output.string() + ".manifest.json");
        write_file(target, to_json().dump(2) + "\n");
    }
};

// Writes to the output file, or stdout when none was given.
void emit(const std::string& output, const std::string& text) {
    if (output.empty())
        std::cout << text;
    else
        write_file(output, text);
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) f(i);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(jobs, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

int cmd_linearize(const Common& c, RunManifest& manifest) {
    auto profile = load_profile(c);
    auto records = load_corpus(c.input, corpus_format(c));
    std::vector<std::optional<std::string>> prose(records.size());
    std::vector<std::string> errors(records.size());
    parallel_for(records.size(), c.jobs, [&](std::size_t i) {
        const auto& r = records[i];
        if (!r.annotation) {
            errors[i] = "record has no annotation";
            return;
        }
        try {
            prose[i] = linearize(*r.annotation, profile);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    std::string out;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!prose[i]) {
            ++failed;
            std::cerr << "failed " << records[i].id << ": " << errors[i] << "\n";
            continue;
        }
        out += json{{"id", records[i].id}, {"prose_pred", *prose[i]}}.dump() + "\n";
    }
    emit(c.output, out);
    std::cerr << fmt::format("processed {}, failed {}\n", records.size(), failed);
    manifest.inputs = {c.input};
    manifest.profile_hash = profile.hash();
    return failed ? 1 : 0;
}

struct EvalOptions {
    std::string ref;
    std::string smoothing = "exp";
    std::string alignment = "greedy-left-to-right";
    bool keep_punctuation = false;
    std::string table;
    std::vector<std::string> cells;
};

MetricSettings metric_settings(const EvalOptions& e, const RuleProfile* profile) {
    MetricSettings s;
    s.smoothing = *parse_smoothing(e.smoothing);
    s.alignment = *parse_alignment_policy(e.alignment);
    s.tokenize.detach_punctuation = !e.keep_punctuation;
    if (profile) s.profile_hash = profile->hash();
    return s;
}

int cmd_evaluate(const Common& c, const EvalOptions& e, RunManifest& manifest) {
    RuleProfile profile = load_profile(c);
    auto settings = metric_settings(e, c.profile.empty() ? nullptr : &profile);
    manifest.metric_settings = settings.to_json();
    manifest.profile_hash = settings.profile_hash;
    std::ostringstream table;
    json report;
    if (e.cells.empty()) {
        if (e.ref.empty()) throw CLI::ValidationError("--ref", "required unless --cell is given");
        auto hyps = load_hypotheses(c.input);
        auto refs = load_corpus(e.ref, corpus_format(c));
        auto r = evaluate(hyps, refs, settings);
        report = r.to_json();
        write_report_table(table, r);
        manifest.inputs = {c.input, e.ref};
    } else {
        std::vector<GridCell> cells;
        for (const auto& spec : e.cells) {
            std::vector<std::string> parts;
            std::stringstream ss(spec);
            for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
            if (parts.size() != 4) throw CLI::ValidationError("--cell", "expected MODEL,CORPUS,HYP,REF: " + spec);
            auto hyps = load_hypotheses(parts[2]);
            auto refs = load_corpus(parts[3], corpus_format(c));
            cells.push_back({parts[0], parts[1], evaluate(hyps, refs, settings)});
            manifest.inputs.push_back(parts[2]);
            manifest.inputs.push_back(parts[3]);
        }
        report = grid_to_json(cells);
        write_grid_table(table, cells);
    }
    emit(c.output, report.dump(2) + "\n");
    if (e.table.empty())
        std::cerr << table.str();
    else
        write_file(e.table, table.str());
    return 0;
}

struct PromptOptions {
    std::string strategy = "fs-rules";
    std::string rules = "1,2,3,4,5";
    std::string examples;
    std::string cot_examples;
    std::string convention;
    std::string ablate;
};

std::set<int> parse_mask(const std::string& text) {
    std::set<int> mask;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        if (p.empty()) continue;
        try {
            mask.insert(std::stoi(p));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--rules", "not a rule number: " + p);
        }
    }
    return mask;
}

int cmd_prompt(const std::string& output, const PromptOptions& p, RunManifest& manifest) {
    PromptSpec spec;
    spec.strategy = *parse_prompt_strategy(p.strategy);
    const bool plain = spec.strategy == PromptStrategy::zs_plain || spec.strategy == PromptStrategy::fs_plain;
    spec.rule_mask = plain ? std::set<int>{} : parse_mask(p.rules);
    spec.tag_convention = p.convention.empty()
                              ? (spec.strategy == PromptStrategy::cot ? TagConvention::think_prose
                                                                      : TagConvention::prose_only)
                              : *parse_tag_convention(p.convention);
    auto fewshot = p.examples.empty() ? bundled_fewshot_examples() : load_demonstrations(p.examples);
    auto cot = p.cot_examples.empty() ? bundled_cot_examples() : load_demonstrations(p.cot_examples);
    if (!p.examples.empty()) manifest.inputs.push_back(p.examples);
    if (!p.cot_examples.empty()) manifest.inputs.push_back(p.cot_examples);

    if (!p.ablate.empty()) {
        PromptSpec base;
        base.examples = fewshot;
        fs::create_directories(p.ablate);
        for (const auto& [name, variant] : ablation_family(base, cot))
            write_file(fs::path(p.ablate) / (name + ".txt"), render_prompt(variant));
        return 0;
    }
    if (spec.strategy == PromptStrategy::cot)
        spec.examples = p.examples.empty() ? cot : fewshot;
    else if (spec.strategy != PromptStrategy::zs_plain)
        spec.examples = fewshot;
    try {
        spec.validate();
    } catch (const PromptError& e) {
        throw CLI::ValidationError("prompt", e.what());
    }
    emit(output, render_prompt(spec));
    return 0;
}

struct ScoreOptions {
    std::string gold;
    std::vector<double> weights{3, 2, 2, 2, 1};
    std::string table;
};

int cmd_score(const Common& c, const ScoreOptions& s, RunManifest& manifest) {
    auto profile = load_profile(c);
    ComplianceWeights weights;
    if (s.weights.size() != weights.weights.size())
        throw CLI::ValidationError("--weights", "expected five weights");
    std::copy(s.weights.begin(), s.weights.end(), weights.weights.begin());
    weights.validate();
    auto hyps = load_hypotheses(c.input);
    auto gold = load_corpus(s.gold, corpus_format(c));
    auto report = score_compliance(hyps, gold, weights, profile);
    emit(c.output, report.to_json().dump(2) + "\n");
    std::ostringstream table;
    write_compliance_table(table, report);
    if (s.table.empty())
        std::cerr << table.str();
    else
        write_file(s.table, table.str());
    manifest.inputs = {c.input, s.gold};
    manifest.profile_hash = profile.hash();
    return 0;
}

int cmd_stats(const Common& c, RunManifest& manifest) {
    auto records = load_corpus(c.input, corpus_format(c));
    auto st = corpus_stats(records);
    json j{{"records", st.records},
           {"annotated", st.annotated},
           {"with_prose", st.with_prose},
           {"per_source", st.per_source},
           {"mean_verse_tokens", st.mean_verse_tokens},
           {"mean_prose_tokens", st.mean_prose_tokens}};
    emit(c.output, j.dump(2) + "\n");
    manifest.inputs = {c.input};
    return 0;
}

struct QueryOptions {
    std::string endpoint;
    std::string convention = "think-prose";
    std::size_t concurrency = 1;
};

// Sends each prompt file to the endpoint; writes one jsonl line per prompt
// in input order.
int cmd_query(const std::vector<std::string>& prompts, const std::string& output, const QueryOptions& q,
              RunManifest& manifest) {
    auto endpoint = EndpointConfig::from_json(json::parse(read_file(q.endpoint)));
    auto convention = *parse_tag_convention(q.convention);
    std::vector<std::string> texts;
    for (const auto& p : prompts) texts.push_back(read_file(p));
    ModelClient client(endpoint);
    std::map<std::string, std::string> failures;
    auto responses = client.query_all(texts, q.concurrency, &failures);
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto hash = prompt_hash(texts[i]);
        json line{{"prompt", prompts[i]}, {"prompt_hash", hash}};
        if (auto it = responses.find(hash); it != responses.end()) {
            auto parsed = parse_response(it->second, convention);
            line["raw_response"] = it->second;
            line["prose_pred"] = parsed.prose ? json(*parsed.prose) : json(nullptr);
            line["diagnostics"] = parsed.diagnostics;
        } else {
            line["error"] = failures[hash];
            std::cerr << "failed " << prompts[i] << ": " << failures[hash] << "\n";
        }
        out += line.dump() + "\n";
    }
    emit(output, out);
    manifest.inputs = prompts;
    manifest.inputs.push_back(q.endpoint);
    return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Canonical prose ordering (anvaya) for Sanskrit verse: linearize, evaluate, prompt, score."};
    app.set_config("--config", "", "TOML/INI configuration file (flags override it)");
    app.require_subcommand(1);
    app.set_version_flag("--version", ANVAYA_VERSION);

    Common lin, ev, sc, st;
    auto* linearize_cmd = app.add_subcommand("linearize", "Annotated corpus -> canonical prose jsonl");
    add_common(linearize_cmd, lin);

    EvalOptions eval_opts;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "BLEU and Kendall's tau of hypotheses against references");
    evaluate_cmd->add_option("--input,-i", ev.input, "Hypothesis jsonl {id, prose_pred}")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--output,-o", ev.output, "Report json");
    evaluate_cmd->add_option("--profile", ev.profile, "Rule profile json (hash recorded)")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--format", ev.format, "Reference corpus format")->check(CLI::IsMember({"jsonl", "tsv"}));
    evaluate_cmd->add_option("--jobs,-j", ev.jobs, "Worker threads")->check(CLI::Range(1u, 256u));
    evaluate_cmd->add_option("--ref,-r", eval_opts.ref, "Reference corpus")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--smoothing", eval_opts.smoothing)->check(CLI::IsMember({"exp", "floor", "none"}));
    evaluate_cmd->add_option("--alignment", eval_opts.alignment)
        ->check(CLI::IsMember({"greedy-left-to-right", "exhaustive-min-inversions"}));
    evaluate_cmd->add_flag("--keep-punctuation", eval_opts.keep_punctuation, "Do not split punctuation off tokens");
    evaluate_cmd->add_option("--table", eval_opts.table, "Write the text table here instead of stderr");
    evaluate_cmd->add_option("--cell", eval_opts.cells, "Cross-domain cell MODEL,CORPUS,HYP,REF (repeatable)");

    PromptOptions prompt_opts;
    std::string prompt_output;
    auto* prompt_cmd = app.add_subcommand("prompt", "Render prompt variants");
    prompt_cmd->add_option("--strategy", prompt_opts.strategy)
        ->check(CLI::IsMember({"zs-plain", "fs-plain", "fs-rules", "cot"}));
    prompt_cmd->add_option("--rules", prompt_opts.rules, "Comma-separated rule numbers");
    prompt_cmd->add_option("--examples", prompt_opts.examples, "Demonstration block file")->check(CLI::ExistingFile);
    prompt_cmd->add_option("--cot-examples", prompt_opts.cot_examples, "Reasoning demonstrations for --ablate")
        ->check(CLI::ExistingFile);
    prompt_cmd->add_option("--convention", prompt_opts.convention)
        ->check(CLI::IsMember({"prose-only", "think-prose", "reasoning-answer"}));
    prompt_cmd->add_option("--output,-o", prompt_output, "Prompt file");
    prompt_cmd->add_option("--ablate", prompt_opts.ablate, "Write the 8-variant ablation family into this directory");

    ScoreOptions score_opts;
    auto* score_cmd = app.add_subcommand("score", "Weighted rule compliance against gold annotations");
    add_common(score_cmd, sc);
    score_cmd->add_option("--gold,-g", score_opts.gold, "Annotated gold corpus")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--weights", score_opts.weights, "Five rule weights")->delimiter(',')->expected(5);
    score_cmd->add_option("--table", score_opts.table, "Write the text table here instead of stderr");

    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
    add_common(stats_cmd, st, false);

    std::vector<std::string> query_prompts;
    std::string query_output;
    QueryOptions query_opts;
    auto* query_cmd = app.add_subcommand("query", "Send rendered prompts to a chat-completion endpoint");
    query_cmd->add_option("prompts", query_prompts, "Prompt files")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--endpoint", query_opts.endpoint, "Endpoint json")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--convention", query_opts.convention)
        ->check(CLI::IsMember({"prose-only", "think-prose", "reasoning-answer"}));
    query_cmd->add_option("--concurrency", query_opts.concurrency)->check(CLI::Range(1, 64));
    query_cmd->add_option("--output,-o", query_output, "Responses jsonl");

    CLI11_PARSE(app, argc, argv);

    RunManifest manifest;
    std::string output;
    try {
        int status = 0;
        if (*linearize_cmd) {
            manifest.command = "linearize";
            status = cmd_linearize(lin, manifest);
            output = lin.output;
        } else if (*evaluate_cmd) {
            manifest.command = "evaluate";
            if (ev.input.empty() && eval_opts.cells.empty())
                throw CLI::ValidationError("--input", "required unless --cell is given");
            status = cmd_evaluate(ev, eval_opts, manifest);
            output = ev.output;
        } else if (*prompt_cmd) {
            manifest.command = "prompt";
            status = cmd_prompt(prompt_output, prompt_opts, manifest);
            output = prompt_opts.ablate.empty() ? prompt_output : prompt_opts.ablate;
        } else if (*score_cmd) {
            manifest.command = "score";
            status = cmd_score(sc, score_opts, manifest);
            output = sc.output;
        } else if (*stats_cmd) {
            manifest.command = "stats";
            status = cmd_stats(st, manifest);
            output = st.output;
        } else if (*query_cmd) {
            manifest.command = "query";
            status = cmd_query(query_prompts, query_output, query_opts, manifest);
            output = query_output;
        }
        manifest.effective_config = app.config_to_str(true, false);
        if (!output.empty()) manifest.write_next_to(output);
        return status;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
