#include "anvaya/prompts.hpp"

#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <mutex>
#include <sstream>

#ifndef ANVAYA_DEFAULT_DATA_DIR
#define ANVAYA_DEFAULT_DATA_DIR "data/prompts"
#endif

namespace anvaya {

namespace {

constexpr std::array<std::string_view, 4> kStrategyNames{"zs-plain", "fs-plain", "fs-rules", "cot"};
constexpr std::array<std::string_view, 3> kConventionNames{"prose-only", "think-prose", "reasoning-answer"};

struct TagPair {
    std::string_view answer;
    std::string_view reasoning;
};

constexpr TagPair kProseTags{"prose", "think"};
constexpr TagPair kAnswerTags{"answer", "reasoning"};

TagPair own_tags(TagConvention c) { return c == TagConvention::reasoning_answer ? kAnswerTags : kProseTags; }
TagPair other_tags(TagConvention c) { return c == TagConvention::reasoning_answer ? kProseTags : kAnswerTags; }

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

const std::string& block(const PromptBlocks& blocks, const std::string& name) {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw PromptError("template has no block '" + name + "'");
    return it->second;
}

std::string format_block_name(TagConvention c) {
    switch (c) {
        case TagConvention::prose_only: return "format-prose";
        case TagConvention::think_prose: return "format-cot";
        case TagConvention::reasoning_answer: return "format-answer";
    }
    return "format-prose";
}

std::string render_example(std::size_t n, const Demonstration& d, TagConvention c) {
    std::string out = "Example " + std::to_string(n) + ":\nINPUT:\nsloka: " + d.verse + "\nRESPONSE:\n";
    if (c == TagConvention::prose_only || !d.reasoning) {
        auto tags = own_tags(c);
        out += "<" + std::string(tags.answer) + ">" + d.prose + "</" + std::string(tags.answer) + ">";
        return out;
    }
    out += wrap_response(d.prose, c, "\n" + *d.reasoning + "\n");
    return out;
}

struct TagSpan {
    std::string content;
    bool closed = false;
};

// Content of the last <tag>...</tag> pair; the opening tag is the last one
// in the text and the closing tag the first after it.
std::optional<TagSpan> extract_tag(std::string_view text, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    auto o = text.rfind(open);
    if (o == std::string_view::npos) return std::nullopt;
    auto start = o + open.size();
    auto c = text.find(close, start);
    if (c == std::string_view::npos) return TagSpan{std::string(text.substr(start)), false};
    return TagSpan{std::string(text.substr(start, c - start)), true};
}

}  // namespace

std::string_view to_string(PromptStrategy strategy) { return kStrategyNames[static_cast<std::size_t>(strategy)]; }
std::string_view to_string(TagConvention convention) { return kConventionNames[static_cast<std::size_t>(convention)]; }

std::optional<PromptStrategy> parse_prompt_strategy(std::string_view name) {
    for (std::size_t i = 0; i < kStrategyNames.size(); ++i)
        if (kStrategyNames[i] == name) return static_cast<PromptStrategy>(i);
    return std::nullopt;
}

std::optional<TagConvention> parse_tag_convention(std::string_view name) {
    for (std::size_t i = 0; i < kConventionNames.size(); ++i)
        if (kConventionNames[i] == name) return static_cast<TagConvention>(i);
    return std::nullopt;
}

void PromptSpec::validate() const {
    for (int r : rule_mask)
        if (r < 1 || r > 5) throw PromptError("rule mask entry out of range 1..5: " + std::to_string(r));
    const bool plain = strategy == PromptStrategy::zs_plain || strategy == PromptStrategy::fs_plain;
    if (plain && !rule_mask.empty())
        throw PromptError(std::string(to_string(strategy)) + " takes no rules; rule mask must be empty");
    if (strategy == PromptStrategy::zs_plain && !examples.empty())
        throw PromptError("zs-plain takes no examples");
    if (strategy != PromptStrategy::zs_plain && examples.empty())
        throw PromptError(std::string(to_string(strategy)) + " needs at least one example");
    if (strategy == PromptStrategy::cot) {
        if (tag_convention == TagConvention::prose_only)
            throw PromptError("cot needs a reasoning tag convention (think-prose or reasoning-answer)");
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (!examples[i].reasoning || trim(*examples[i].reasoning).empty())
                throw PromptError("cot example " + std::to_string(i + 1) + " has no reasoning");
    }
    for (std::size_t i = 0; i < examples.size(); ++i)
        if (trim(examples[i].verse).empty() || trim(examples[i].prose).empty())
            throw PromptError("example " + std::to_string(i + 1) + " has an empty verse or prose");
}

PromptBlocks parse_blocks(std::istream& in) {
    PromptBlocks blocks;
    std::string line;
    std::string name;
    std::vector<std::string> lines;
    auto flush = [&] {
        if (name.empty()) return;
        while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
        std::string text;
        for (std::size_t i = 0; i < lines.size(); ++i) text += (i ? "\n" : "") + lines[i];
        if (!blocks.emplace(name, text).second) throw PromptError("duplicate block '" + name + "'");
        lines.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (starts_with(line, "=== ") && line.size() > 8 && line.ends_with(" ===")) {
            flush();
            name = trim(line.substr(4, line.size() - 8));
            if (name.empty()) throw PromptError("block header without a name");
            continue;
        }
        if (name.empty()) {
            if (trim(line).empty() || starts_with(line, "#")) continue;
            throw PromptError("text before the first block header: " + line);
        }
        lines.push_back(line);
    }
    flush();
    return blocks;
}

PromptBlocks load_blocks(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PromptError("cannot open prompt data file " + path.string());
    return parse_blocks(in);
}

std::filesystem::path prompt_data_dir() {
    if (const char* env = std::getenv("ANVAYA_DATA_DIR"); env && *env) return env;
    return ANVAYA_DEFAULT_DATA_DIR;
}

const PromptBlocks& bundled_template() {
    static std::once_flag once;
    static PromptBlocks blocks;
    std::call_once(once, [] { blocks = load_blocks(prompt_data_dir() / "template.txt"); });
    return blocks;
}

std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path) {
    auto blocks = load_blocks(path);
    std::map<int, Demonstration> by_number;
    for (const auto& [name, text] : blocks) {
        if (!starts_with(name, "example-")) continue;
        int n = 0;
        try {
            n = std::stoi(name.substr(8));
        } catch (const std::exception&) {
            throw PromptError("bad example block name '" + name + "'");
        }
        Demonstration d;
        std::istringstream lines(text);
        std::string line;
        std::optional<std::string> reasoning;
        while (std::getline(lines, line)) {
            if (reasoning) {
                *reasoning += (reasoning->empty() ? "" : "\n") + line;
            } else if (starts_with(line, "sloka:")) {
                d.verse = normalize_iast(trim(line.substr(6)));
            } else if (starts_with(line, "prose:")) {
                d.prose = normalize_iast(trim(line.substr(6)));
            } else if (starts_with(line, "reasoning:")) {
                reasoning = trim(line.substr(10));
            } else if (!trim(line).empty()) {
                throw PromptError(name + ": unexpected line '" + line + "'");
            }
        }
        if (reasoning) d.reasoning = normalize_iast(trim(*reasoning));
        if (d.verse.empty() || d.prose.empty()) throw PromptError(name + ": needs sloka and prose");
        by_number.emplace(n, std::move(d));
    }
    std::vector<Demonstration> out;
    for (auto& [n, d] : by_number) out.push_back(std::move(d));
    return out;
}

std::vector<Demonstration> bundled_fewshot_examples() {
    return load_demonstrations(prompt_data_dir() / "fewshot_examples.txt");
}

std::vector<Demonstration> bundled_cot_examples() {
    return load_demonstrations(prompt_data_dir() / "cot_examples.txt");
}

std::string render_prompt(const PromptSpec& spec, const PromptBlocks& blocks) {
    spec.validate();
    const bool with_rules = spec.strategy == PromptStrategy::fs_rules || spec.strategy == PromptStrategy::cot;
    std::vector<std::string> parts;
    parts.push_back(block(blocks, with_rules ? "task" : "task-plain"));
    if (with_rules && !spec.rule_mask.empty()) {
        parts.push_back(block(blocks, "rules-heading"));
        for (int r : spec.rule_mask) parts.push_back(block(blocks, "rule-" + std::to_string(r)));
    }
    parts.push_back(block(blocks, format_block_name(spec.tag_convention)));
    if (!spec.examples.empty()) {
        bool cot_heading = spec.strategy == PromptStrategy::cot && blocks.count("examples-heading-cot");
        parts.push_back(block(blocks, cot_heading ? "examples-heading-cot" : "examples-heading"));
        for (std::size_t i = 0; i < spec.examples.size(); ++i)
            parts.push_back(render_example(i + 1, spec.examples[i], spec.tag_convention));
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "\n\n" : "") + parts[i];
    out += "\n";
    return out;
}

std::string render_prompt(const PromptSpec& spec) { return render_prompt(spec, bundled_template()); }

PromptFamily ablation_family(const PromptSpec& base, const std::vector<Demonstration>& cot_examples) {
    if (base.strategy != PromptStrategy::fs_rules || base.rule_mask != std::set<int>{1, 2, 3, 4, 5})
        throw PromptError("ablation base must be fs-rules with rules 1..5");
    PromptFamily family;
    PromptSpec zs;
    zs.strategy = PromptStrategy::zs_plain;
    zs.rule_mask.clear();
    zs.tag_convention = base.tag_convention;
    family.emplace_back("P_base", zs);
    family.emplace_back("P_full", base);
    constexpr std::array<std::string_view, 5> kNames{"P_NoSandhi", "P_NoClause", "P_NoChunking", "P_NoOrder",
                                                     "P_NoParticles"};
    for (int k = 1; k <= 5; ++k) {
        PromptSpec v = base;
        v.rule_mask.erase(k);
        family.emplace_back(std::string(kNames[k - 1]), std::move(v));
    }
    PromptSpec cot = base;
    cot.strategy = PromptStrategy::cot;
    cot.tag_convention = TagConvention::think_prose;
    cot.examples = cot_examples;
    family.emplace_back("CoT", std::move(cot));
    return family;
}

PromptFamily ablation_family(const PromptSpec& base) { return ablation_family(base, bundled_cot_examples()); }

ParsedResponse parse_response(std::string_view raw, TagConvention convention) {
    ParsedResponse out;
    out.raw = std::string(raw);
    std::vector<TagPair> vocab{own_tags(convention)};
    if (convention != TagConvention::prose_only) vocab.push_back(other_tags(convention));
    for (std::size_t v = 0; v < vocab.size(); ++v) {
        auto span = extract_tag(raw, vocab[v].answer);
        if (!span) continue;
        if (v > 0)
            out.diagnostics.push_back("used alternate tag <" + std::string(vocab[v].answer) + ">");
        if (!span->closed)
            out.diagnostics.push_back("missing </" + std::string(vocab[v].answer) + ">; took text to end");
        auto prose = collapse_whitespace(span->content);
        if (prose.empty())
            out.diagnostics.push_back("empty <" + std::string(vocab[v].answer) + "> tag");
        else
            out.prose = std::move(prose);
        if (auto r = extract_tag(raw, vocab[v].reasoning)) {
            if (!r->closed)
                out.diagnostics.push_back("missing </" + std::string(vocab[v].reasoning) + ">");
            else
                out.reasoning = trim(r->content);
        }
        return out;
    }
    out.diagnostics.push_back("no answer tag");
    return out;
}

std::string wrap_response(std::string_view prose, TagConvention convention, std::string_view reasoning) {
    auto tags = own_tags(convention);
    std::string out;
    if (convention != TagConvention::prose_only && !reasoning.empty())
        out += "<" + std::string(tags.reasoning) + ">" + std::string(reasoning) + "</" +
               std::string(tags.reasoning) + ">\n";
    out += "<" + std::string(tags.answer) + ">" + std::string(prose) + "</" + std::string(tags.answer) + ">";
    return out;
}

}  // namespace anvaya
