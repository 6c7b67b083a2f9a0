#include "anvaya/metrics.hpp"

#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"
#include "anvaya/linearizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace anvaya {

// ---------------------------------------------------------------------------
// Tokenization

Tokens tokenize_iast(std::string_view text, const TokenizeOptions& options) {
    Tokens out;
    for (const auto& word : split_whitespace(normalize_iast(text))) {
        if (!options.detach_punctuation) {
            out.push_back(word);
            continue;
        }
        const auto* s = reinterpret_cast<const uint8_t*>(word.data());
        const auto length = static_cast<int32_t>(word.size());
        std::string current;
        int32_t i = 0;
        while (i < length) {
            const int32_t start = i;
            UChar32 c = 0;
            U8_NEXT(s, i, length, c);
            if (c >= 0 && u_ispunct(c)) {
                if (!current.empty()) out.push_back(std::move(current));
                current.clear();
                out.emplace_back(word.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
            } else {
                current.append(word, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
            }
        }
        if (!current.empty()) out.push_back(std::move(current));
    }
    return out;
}

std::string tokenization_name(const TokenizeOptions& options) {
    return options.detach_punctuation ? "iast-nfc-whitespace+punct" : "iast-nfc-whitespace";
}

// ---------------------------------------------------------------------------
// BLEU

std::string_view to_string(Smoothing smoothing) {
    switch (smoothing) {
        case Smoothing::exp:
            return "exp";
        case Smoothing::floor:
            return "floor";
        case Smoothing::none:
            return "none";
    }
    return "exp";
}

std::optional<Smoothing> parse_smoothing(std::string_view name) {
    if (name == "exp") return Smoothing::exp;
    if (name == "floor") return Smoothing::floor;
    if (name == "none") return Smoothing::none;
    return std::nullopt;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
    for (int n = 0; n < kBleuOrder; ++n) {
        matches[n] += other.matches[n];
        totals[n] += other.totals[n];
    }
    hyp_len += other.hyp_len;
    ref_len += other.ref_len;
    return *this;
}

namespace {

using NgramCounts = std::unordered_map<std::string, int>;

// n-grams of every order keyed by their tokens joined with U+001F.
NgramCounts extract_ngrams(const Tokens& tokens) {
    NgramCounts counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string key;
        for (std::size_t n = 0; n < kBleuOrder && i + n < tokens.size(); ++n) {
            if (n) key += '\x1f';
            key += tokens[i + n];
            ++counts[key];
        }
    }
    return counts;
}

std::size_t order_of(const std::string& key) {
    return static_cast<std::size_t>(std::count(key.begin(), key.end(), '\x1f'));
}

}  // namespace

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref) {
    BleuStats stats;
    stats.hyp_len = static_cast<double>(hyp.size());
    stats.ref_len = static_cast<double>(ref.size());
    for (int n = 0; n < kBleuOrder; ++n)
        stats.totals[n] = static_cast<double>(hyp.size() > static_cast<std::size_t>(n) ? hyp.size() - n : 0);

    const auto ref_counts = extract_ngrams(ref);
    for (const auto& [key, count] : extract_ngrams(hyp)) {
        const auto it = ref_counts.find(key);
        if (it != ref_counts.end()) stats.matches[order_of(key)] += std::min(count, it->second);
    }
    return stats;
}

double bleu_from_stats(const BleuStats& stats, Smoothing smoothing, bool effective_order) {
    if (stats.matches[0] == 0) return 0.0;

    double brevity = 1.0;
    if (stats.hyp_len < stats.ref_len)
        brevity = stats.hyp_len > 0 ? std::exp(1.0 - stats.ref_len / stats.hyp_len) : 0.0;

    constexpr double kFloor = 0.1;
    std::array<double, kBleuOrder> precision{};
    double exp_denominator = 1.0;
    int used_orders = kBleuOrder;
    for (int n = 0; n < kBleuOrder; ++n) {
        if (stats.totals[n] == 0) break;
        if (effective_order) used_orders = n + 1;
        if (stats.matches[n] > 0) {
            precision[n] = stats.matches[n] / stats.totals[n];
        } else if (smoothing == Smoothing::exp) {
            exp_denominator *= 2;
            precision[n] = 1.0 / (exp_denominator * stats.totals[n]);
        } else if (smoothing == Smoothing::floor) {
            precision[n] = kFloor / stats.totals[n];
        }
    }

    double log_sum = 0;
    for (int n = 0; n < used_orders; ++n) {
        if (precision[n] <= 0) return 0.0;
        log_sum += std::log(precision[n]);
    }
    return 100.0 * brevity * std::exp(log_sum / used_orders);
}

double sentence_bleu(const Tokens& hyp, const Tokens& ref, Smoothing smoothing) {
    if (ref.empty()) throw MetricError("sentence_bleu: empty reference");
    return bleu_from_stats(bleu_stats(hyp, ref), smoothing, true);
}

double corpus_bleu(std::span<const TokenPair> pairs) {
    if (pairs.empty()) throw MetricError("corpus_bleu: no sentence pairs");
    BleuStats pooled;
    for (const auto& [hyp, ref] : pairs) {
        if (ref.empty()) throw MetricError("corpus_bleu: empty reference");
        pooled += bleu_stats(hyp, ref);
    }
    // Unsmoothed: the smoothing numerators depend on pooled totals, which
    // would make the score change when the corpus is replicated.
    return bleu_from_stats(pooled, Smoothing::none, false);
}

// ---------------------------------------------------------------------------
// Alignment and Kendall's tau

std::string_view to_string(AlignmentPolicy policy) {
    return policy == AlignmentPolicy::greedy ? "greedy-left-to-right" : "exhaustive-min-inversions";
}

std::optional<AlignmentPolicy> parse_alignment_policy(std::string_view name) {
    if (name == "greedy" || name == "greedy-left-to-right") return AlignmentPolicy::greedy;
    if (name == "exhaustive" || name == "exhaustive-min-inversions") return AlignmentPolicy::exhaustive;
    return std::nullopt;
}

std::vector<std::size_t> Alignment::ref_sequence() const {
    std::vector<std::size_t> seq;
    for (const auto& r : hyp_to_ref)
        if (r) seq.push_back(*r);
    return seq;
}

namespace {

void merge_count(std::vector<std::size_t>& v, std::vector<std::size_t>& scratch, std::size_t lo, std::size_t hi,
                 std::size_t& inversions) {
    if (hi - lo < 2) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    merge_count(v, scratch, lo, mid, inversions);
    merge_count(v, scratch, mid, hi, inversions);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inversions += mid - i;
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
}

void finish(Alignment& a, std::size_t ref_size) {
    std::vector<char> used(ref_size, 0);
    for (std::size_t h = 0; h < a.hyp_to_ref.size(); ++h) {
        if (a.hyp_to_ref[h])
            used[*a.hyp_to_ref[h]] = 1;
        else
            a.unaligned_hyp.push_back(h);
    }
    for (std::size_t r = 0; r < ref_size; ++r)
        if (!used[r]) a.unaligned_ref.push_back(r);
}

Alignment greedy_alignment(const Tokens& hyp, const Tokens& ref) {
    std::unordered_map<std::string, std::vector<std::size_t>> positions;
    for (std::size_t r = 0; r < ref.size(); ++r) positions[ref[r]].push_back(r);
    std::unordered_map<std::string, std::size_t> next;

    Alignment a;
    a.hyp_to_ref.resize(hyp.size());
    for (std::size_t h = 0; h < hyp.size(); ++h) {
        const auto it = positions.find(hyp[h]);
        if (it == positions.end()) continue;
        auto& k = next[hyp[h]];
        if (k < it->second.size()) a.hyp_to_ref[h] = it->second[k++];
    }
    finish(a, ref.size());
    return a;
}

// Every size-k subset of `items`, in lexicographic order.
void for_each_subset(const std::vector<std::size_t>& items, std::size_t k,
                     const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::vector<std::size_t> chosen(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) chosen[i] = items[pick[i]];
        fn(chosen);
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == items.size() - k + i - 1) --i;
        if (i == 0) return;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

// Minimum-inversion assignment. For fixed subsets of equal-surface
// positions, pairing them in order never loses to a crossed pairing
// (uncrossing two equal-surface pairs removes at least one inversion), so
// only the subsets are enumerated.
Alignment exhaustive_alignment(const Tokens& hyp, const Tokens& ref) {
    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
    for (std::size_t h = 0; h < hyp.size(); ++h) groups[hyp[h]].first.push_back(h);
    for (std::size_t r = 0; r < ref.size(); ++r) {
        auto it = groups.find(ref[r]);
        if (it != groups.end()) it->second.second.push_back(r);
    }

    struct Choice {
        std::vector<std::vector<std::size_t>> hyp_options;
        std::vector<std::vector<std::size_t>> ref_options;
    };
    std::vector<Choice> choices;
    std::size_t total = 0;
    for (auto& [surface, g] : groups) {
        const std::size_t k = std::min(g.first.size(), g.second.size());
        if (k == 0) continue;
        total += k;
        Choice c;
        for_each_subset(g.first, k, [&](const auto& s) { c.hyp_options.push_back(s); });
        for_each_subset(g.second, k, [&](const auto& s) { c.ref_options.push_back(s); });
        choices.push_back(std::move(c));
    }
    if (total > kExhaustiveAlignmentLimit)
        throw MetricError("exhaustive alignment supports at most " + std::to_string(kExhaustiveAlignmentLimit) +
                          " aligned tokens, got " + std::to_string(total));

    std::vector<std::optional<std::size_t>> current(hyp.size());
    std::vector<std::optional<std::size_t>> best;
    std::size_t best_inversions = std::numeric_limits<std::size_t>::max();

    std::function<void(std::size_t)> search = [&](std::size_t g) {
        if (g == choices.size()) {
            std::vector<std::size_t> seq;
            for (const auto& r : current)
                if (r) seq.push_back(*r);
            const std::size_t inv = count_inversions(seq);
            if (inv < best_inversions) {
                best_inversions = inv;
                best = current;
            }
            return;
        }
        for (const auto& hs : choices[g].hyp_options) {
            for (const auto& rs : choices[g].ref_options) {
                for (std::size_t i = 0; i < hs.size(); ++i) current[hs[i]] = rs[i];
                search(g + 1);
                for (std::size_t h : hs) current[h].reset();
            }
        }
    };
    search(0);

    Alignment a;
    a.hyp_to_ref = best.empty() ? std::vector<std::optional<std::size_t>>(hyp.size()) : best;
    finish(a, ref.size());
    return a;
}

}  // namespace

std::size_t count_inversions(std::span<const std::size_t> seq) {
    std::vector<std::size_t> v(seq.begin(), seq.end());
    std::vector<std::size_t> scratch(v.size());
    std::size_t inversions = 0;
    merge_count(v, scratch, 0, v.size(), inversions);
    return inversions;
}

Alignment align_tokens(const Tokens& hyp, const Tokens& ref, AlignmentPolicy policy) {
    return policy == AlignmentPolicy::greedy ? greedy_alignment(hyp, ref) : exhaustive_alignment(hyp, ref);
}

TauResult kendall_tau(const Tokens& hyp, const Tokens& ref, AlignmentPolicy policy) {
    const Alignment a = align_tokens(hyp, ref, policy);
    const auto seq = a.ref_sequence();

    TauResult result;
    result.aligned = seq.size();
    result.unaligned_count = a.unaligned_hyp.size() + a.unaligned_ref.size();
    result.inversions = count_inversions(seq);
    if (seq.size() >= 2) {
        const double m = static_cast<double>(seq.size());
        const double pairs = m * (m - 1) / 2;
        result.tau = 1.0 - 2.0 * static_cast<double>(result.inversions) / pairs;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Rule compliance

void ComplianceWeights::validate() const {
    for (int r = 1; r <= kComplianceRules; ++r)
        if (!(weight(r) >= 0)) throw MetricError("compliance weight for rule " + std::to_string(r) + " is negative");
}

double ComplianceWeights::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double weighted_score(const RuleOutcome& passed, const ComplianceWeights& weights) {
    weights.validate();
    double score = 0;
    for (int r = 1; r <= kComplianceRules; ++r)
        if (passed[static_cast<std::size_t>(r - 1)]) score += weights.weight(r);
    return score;
}

namespace {

struct GoldView {
    const AnnotatedSentence& gold;
    const RuleProfile& profile;
    Alignment alignment;                            // hyp -> gold
    std::vector<std::optional<std::size_t>> pos;    // gold -> hyp position
    std::vector<std::optional<std::size_t>> governor;  // chunk head -> governing token
    std::vector<char> is_chunk_head;

    std::optional<std::size_t> gold_at(std::size_t hyp_pos) const { return alignment.hyp_to_ref[hyp_pos]; }

    // Nearest non-particle ancestor of a particle.
    std::size_t particle_anchor(std::size_t t) const {
        while (gold.tokens[t].role == Role::particle) t = *gold.tokens[t].head;
        return t;
    }

    // The head, its modifier subtree, nested argument phrases and attached
    // particles.
    std::set<std::size_t> phrase(std::size_t head) const {
        std::set<std::size_t> in{head};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& t : gold.tokens) {
                if (in.count(t.index)) continue;
                bool joins = false;
                if ((is_modifier(t.role) || t.role == Role::particle) && t.head && in.count(*t.head)) joins = true;
                if (is_chunk_head[t.index] && governor[t.index] && in.count(*governor[t.index])) joins = true;
                if (joins) {
                    in.insert(t.index);
                    grew = true;
                }
            }
        }
        return in;
    }
};

bool check_clause_order(const GoldView& v) {
    const auto& tokens = v.gold.tokens;
    std::map<std::string, std::size_t> clause_rank;
    const auto order = order_clauses(v.gold, v.profile);
    for (std::size_t i = 0; i < order.size(); ++i) clause_rank[order[i]] = i;

    std::size_t highest = 0;
    for (std::size_t h = 0; h < v.alignment.hyp_to_ref.size(); ++h) {
        const auto g = v.gold_at(h);
        if (!g || tokens[*g].role == Role::particle) continue;
        const std::size_t rank = clause_rank.at(tokens[*g].clause);
        if (rank < highest) return false;
        highest = rank;
    }

    const ClauseInfo* main = nullptr;
    for (const auto& c : v.gold.clauses)
        if (c.kind == ClauseKind::main) main = &c;
    for (const auto& t : tokens) {
        if (!(t.flags.main_verb && main && t.clause == main->id)) continue;
        if (!v.pos[t.index]) return false;
        for (std::size_t h = *v.pos[t.index] + 1; h < v.alignment.hyp_to_ref.size(); ++h) {
            const auto g = v.gold_at(h);
            if (!g || tokens[*g].role != Role::particle || v.particle_anchor(*g) != t.index) return false;
        }
    }
    return true;
}

bool check_chunking(const GoldView& v) {
    for (const auto& m : v.gold.tokens) {
        if (!is_modifier(m.role)) continue;
        const std::size_t head = *m.head;
        if (!v.pos[m.index] || !v.pos[head]) return false;
        const std::size_t pm = *v.pos[m.index];
        const std::size_t ph = *v.pos[head];
        const bool before = !is_appositive(m.role) || v.profile.appositive_placement == AppositivePlacement::before_head;
        if (before != (pm < ph)) return false;
        const auto allowed = v.phrase(head);
        for (std::size_t h = std::min(pm, ph) + 1; h < std::max(pm, ph); ++h) {
            const auto g = v.gold_at(h);
            if (!g || !allowed.count(*g)) return false;
        }
    }
    return true;
}

bool check_intra_order(const GoldView& v) {
    const auto& tokens = v.gold.tokens;
    // Groups: clause-level heads per clause, argument heads per governor.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (const auto& t : tokens) {
        if (!v.is_chunk_head[t.index]) continue;
        const std::string key = v.governor[t.index] ? "gov:" + std::to_string(*v.governor[t.index]) : "clause:" + t.clause;
        groups[key].push_back(t.index);
    }
    for (auto& [key, heads] : groups) {
        for (std::size_t h : heads)
            if (!v.pos[h]) return false;
        std::sort(heads.begin(), heads.end(), [&](std::size_t a, std::size_t b) { return *v.pos[a] < *v.pos[b]; });
        for (std::size_t i = 1; i < heads.size(); ++i)
            if (class_rank(tokens[heads[i - 1]], v.profile) > class_rank(tokens[heads[i]], v.profile)) return false;
    }
    return true;
}

bool check_particles(const GoldView& v) {
    const auto& tokens = v.gold.tokens;
    for (const auto& p : tokens) {
        if (p.role != Role::particle) continue;
        if (!v.pos[p.index] || *v.pos[p.index] == 0) return false;
        const auto prev = v.gold_at(*v.pos[p.index] - 1);
        if (!prev) return false;
        const bool after_head = *prev == *p.head;
        const bool after_sibling = tokens[*prev].role == Role::particle &&
                                   v.particle_anchor(*prev) == v.particle_anchor(p.index);
        if (!after_head && !after_sibling) return false;
    }
    return true;
}

}  // namespace

ComplianceResult compliance_score(const Tokens& hyp, const AnnotatedSentence& gold,
                                  const ComplianceWeights& weights, const RuleProfile& profile) {
    weights.validate();
    const auto chunks = build_chunks(gold, profile);  // validates gold

    const Tokens gold_tokens = gold.surfaces();
    GoldView view{gold, profile, align_tokens(hyp, gold_tokens), {}, {}, {}};
    if (view.alignment.aligned() == 0)
        throw MetricError("no hypothesis token occurs in the gold annotation");

    const std::size_t n = gold.tokens.size();
    view.pos.assign(n, std::nullopt);
    for (std::size_t h = 0; h < hyp.size(); ++h)
        if (const auto g = view.alignment.hyp_to_ref[h]) view.pos[*g] = h;
    view.governor.assign(n, std::nullopt);
    view.is_chunk_head.assign(n, 0);
    for (const auto& [clause, list] : chunks) {
        for (const auto& c : list) {
            view.is_chunk_head[c.head] = 1;
            view.governor[c.head] = argument_governor(gold, c.head);
        }
    }

    ComplianceResult result;
    Tokens sorted_hyp = hyp;
    Tokens sorted_gold = gold_tokens;
    std::sort(sorted_hyp.begin(), sorted_hyp.end());
    std::sort(sorted_gold.begin(), sorted_gold.end());
    result.passed[0] = sorted_hyp == sorted_gold;
    result.passed[1] = check_clause_order(view);
    result.passed[2] = check_chunking(view);
    result.passed[3] = check_intra_order(view);
    result.passed[4] = check_particles(view);
    result.score = weighted_score(result.passed, weights);
    return result;
}

}  // namespace anvaya
