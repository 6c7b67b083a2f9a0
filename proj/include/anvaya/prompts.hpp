#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anvaya {

enum class PromptStrategy { zs_plain, fs_plain, fs_rules, cot };
enum class TagConvention { prose_only, think_prose, reasoning_answer };

std::string_view to_string(PromptStrategy strategy);
std::string_view to_string(TagConvention convention);
std::optional<PromptStrategy> parse_prompt_strategy(std::string_view name);
std::optional<TagConvention> parse_tag_convention(std::string_view name);

struct Demonstration {
    std::string verse;
    std::string prose;
    std::optional<std::string> reasoning;

    bool operator==(const Demonstration&) const = default;
};

struct PromptSpec {
    PromptStrategy strategy = PromptStrategy::fs_rules;
    std::set<int> rule_mask{1, 2, 3, 4, 5};
    std::vector<Demonstration> examples;
    TagConvention tag_convention = TagConvention::prose_only;

    // Throws PromptError when the strategy, mask and examples disagree.
    void validate() const;

    bool operator==(const PromptSpec&) const = default;
};

// Named text blocks read from the bundled data files.
using PromptBlocks = std::map<std::string, std::string>;

/// Parses "=== name ===" delimited blocks. Leading "#" lines before the
/// first header are comments; trailing blank lines of a block are dropped.
/// Throws PromptError on a duplicate block name or text before any header.
PromptBlocks parse_blocks(std::istream& in);
PromptBlocks load_blocks(const std::filesystem::path& path);

/// Directory of the bundled template files. ANVAYA_DATA_DIR overrides the
/// compiled-in location.
std::filesystem::path prompt_data_dir();

/// The bundled template blocks (task, rule-1..rule-5, format-*, ...).
const PromptBlocks& bundled_template();

/// Demonstrations from example-N blocks holding "sloka:", "prose:" and an
/// optional multi-line "reasoning:" field, in N order.
std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path);
std::vector<Demonstration> bundled_fewshot_examples();
std::vector<Demonstration> bundled_cot_examples();

/// Task description, the rule blocks in `rule_mask` (ascending), the
/// response format for the tag convention, then the demonstrations.
/// Blocks are separated by one blank line. Throws PromptError if the spec
/// is invalid.
std::string render_prompt(const PromptSpec& spec, const PromptBlocks& blocks);
std::string render_prompt(const PromptSpec& spec);

using PromptFamily = std::vector<std::pair<std::string, PromptSpec>>;

/// P_base, P_full, P_NoSandhi, P_NoClause, P_NoChunking, P_NoOrder,
/// P_NoParticles, CoT (in that order). `base` must be fs-rules with the full
/// mask; CoT uses `cot_examples` under think-prose.
PromptFamily ablation_family(const PromptSpec& base, const std::vector<Demonstration>& cot_examples);
PromptFamily ablation_family(const PromptSpec& base);

struct ParsedResponse {
    std::optional<std::string> prose;      // whitespace-collapsed, never empty
    std::optional<std::string> reasoning;  // trimmed
    std::string raw;
    std::vector<std::string> diagnostics;
};

/// Takes the content between the last closing answer tag and the nearest
/// opening tag before it. The convention's own tags are tried first, then
/// the other vocabulary (prose/think vs answer/reasoning). A missing closing
/// tag takes the text to the end. Never throws; failures are diagnostics.
ParsedResponse parse_response(std::string_view raw, TagConvention convention);

/// Inverse of parse_response for a well-formed response.
std::string wrap_response(std::string_view prose, TagConvention convention,
                          std::string_view reasoning = {});

}  // namespace anvaya
