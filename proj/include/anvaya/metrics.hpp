#pragma once

#include "anvaya/annotation.hpp"
#include "anvaya/profile.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anvaya {

using Tokens = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Tokenization

struct TokenizeOptions {
    bool detach_punctuation = true;
};

/// NFC-normalizes, splits on whitespace and (optionally) splits the ASCII
/// punctuation characters and the danda signs off as separate tokens.
Tokens tokenize_iast(std::string_view text, const TokenizeOptions& options = {});
std::string tokenization_name(const TokenizeOptions& options);

// ---------------------------------------------------------------------------
// BLEU

// How a zero n-gram precision is replaced. `exp` halves a running
// numerator for every zero order; `floor` uses a numerator of 0.1.
// Zero unigram matches always score 0.
enum class Smoothing { exp, floor, none };

std::string_view to_string(Smoothing smoothing);
std::optional<Smoothing> parse_smoothing(std::string_view name);

inline constexpr int kBleuOrder = 4;

struct BleuStats {
    std::array<double, kBleuOrder> matches{};
    std::array<double, kBleuOrder> totals{};
    double hyp_len = 0;
    double ref_len = 0;

    BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref);

/// BLEU in [0, 100]. With effective_order, orders for which the hypothesis
/// has no n-grams are dropped from the geometric mean (sentence level).
double bleu_from_stats(const BleuStats& stats, Smoothing smoothing, bool effective_order);

/// Throws MetricError if `ref` is empty.
double sentence_bleu(const Tokens& hyp, const Tokens& ref, Smoothing smoothing = Smoothing::exp);

using TokenPair = std::pair<Tokens, Tokens>;  // (hyp, ref)

/// Counts pooled over all pairs before precisions are formed; brevity
/// penalty from total lengths. No smoothing: an order with zero pooled
/// matches gives 0, and n copies of a corpus score the same as one.
/// Throws MetricError on empty input or an empty reference.
double corpus_bleu(std::span<const TokenPair> pairs);

// ---------------------------------------------------------------------------
// Alignment and Kendall's tau

enum class AlignmentPolicy {
    greedy,      // k-th occurrence in hyp <-> k-th occurrence in ref
    exhaustive,  // minimum-inversion assignment, at most 10 aligned tokens
};

std::string_view to_string(AlignmentPolicy policy);
std::optional<AlignmentPolicy> parse_alignment_policy(std::string_view name);

inline constexpr std::size_t kExhaustiveAlignmentLimit = 10;

struct Alignment {
    std::vector<std::optional<std::size_t>> hyp_to_ref;
    std::vector<std::size_t> unaligned_hyp;
    std::vector<std::size_t> unaligned_ref;

    std::size_t aligned() const { return hyp_to_ref.size() - unaligned_hyp.size(); }
    // Ref indices of aligned tokens, in hypothesis order.
    std::vector<std::size_t> ref_sequence() const;
};

/// Injective, surface-preserving mapping hyp index -> ref index. The
/// exhaustive policy throws MetricError when more than
/// kExhaustiveAlignmentLimit tokens would align.
Alignment align_tokens(const Tokens& hyp, const Tokens& ref, AlignmentPolicy policy = AlignmentPolicy::greedy);

/// Pairs (i < j) with seq[i] > seq[j]; O(n log n).
std::size_t count_inversions(std::span<const std::size_t> seq);

struct TauResult {
    std::optional<double> tau;  // undefined below two aligned tokens
    std::size_t aligned = 0;
    std::size_t inversions = 0;
    std::size_t unaligned_count = 0;  // unaligned hyp + unaligned ref tokens
};

/// tau-a over the aligned common subsequence: 1 - 2 inv / C(m, 2).
TauResult kendall_tau(const Tokens& hyp, const Tokens& ref, AlignmentPolicy policy = AlignmentPolicy::greedy);

// ---------------------------------------------------------------------------
// Rule compliance

inline constexpr int kComplianceRules = 5;

// Rule ids 1..5: sandhi analysis, clause structuring, modifier chunking,
// intra-clause order, particle placement.
struct ComplianceWeights {
    std::array<double, kComplianceRules> weights{3, 2, 2, 2, 1};

    double weight(int rule) const { return weights.at(static_cast<std::size_t>(rule - 1)); }
    void validate() const;  // throws MetricError on a negative weight
    double total() const;
};

using RuleOutcome = std::array<bool, kComplianceRules>;

/// Sum of the weights of the passing rules.
double weighted_score(const RuleOutcome& passed, const ComplianceWeights& weights);

struct ComplianceResult {
    double score = 0;
    RuleOutcome passed{};
};

/// Mechanical proxies for the five rule judgements against a gold
/// annotation:
///   R1 hyp token multiset equals the gold segmentation multiset
///   R2 clause spans follow order_clauses and the main finite verb is final
///   R3 every modifier sits on its side of its head with only that head's
///      phrase in between
///   R4 chunk heads of every clause (and argument group) follow the class order
///   R5 every particle directly follows its head or a sibling particle
/// A rule fails when a token it checks is unaligned. Throws MetricError if
/// no hypothesis token occurs in the gold annotation.
ComplianceResult compliance_score(const Tokens& hyp, const AnnotatedSentence& gold,
                                  const ComplianceWeights& weights, const RuleProfile& profile);

}  // namespace anvaya
