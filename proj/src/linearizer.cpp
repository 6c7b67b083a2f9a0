#include "anvaya/linearizer.hpp"

#include "anvaya/error.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>

namespace anvaya {

namespace {

std::string describe(const AnnotatedToken& t) {
    return "token " + std::to_string(t.index) + " '" + t.surface + "'";
}

bool goes_before_head(Role role, const RuleProfile& profile) {
    if (!is_appositive(role)) return true;
    return profile.appositive_placement == AppositivePlacement::before_head;
}

// Direct modifier children per token, in source order.
std::vector<std::vector<std::size_t>> modifier_children(const AnnotatedSentence& sentence) {
    std::vector<std::vector<std::size_t>> children(sentence.tokens.size());
    for (const auto& t : sentence.tokens)
        if (is_modifier(t.role)) children[*t.head].push_back(t.index);
    return children;
}

void arrange(std::size_t token, const AnnotatedSentence& sentence,
             const std::vector<std::vector<std::size_t>>& children, const RuleProfile& profile,
             std::vector<std::size_t>& out) {
    std::vector<std::size_t> pre;
    std::vector<std::size_t> post;
    for (std::size_t c : children[token])
        (goes_before_head(sentence.tokens[c].role, profile) ? pre : post).push_back(c);
    std::stable_partition(pre.begin(), pre.end(),
                          [&](std::size_t c) { return sentence.tokens[c].role != Role::negation; });
    for (std::size_t c : pre) arrange(c, sentence, children, profile, out);
    out.push_back(token);
    for (std::size_t c : post) arrange(c, sentence, children, profile, out);
}

}  // namespace

ClauseChunks build_chunks(const AnnotatedSentence& sentence, const RuleProfile& profile) {
    validate_sentence(sentence);
    const auto& tokens = sentence.tokens;

    for (const auto& t : tokens) {
        if (!is_modifier(t.role)) continue;
        const auto& head = tokens[*t.head];
        if (head.clause != t.clause)
            throw LinearizeError("modifier " + describe(t) + " in clause '" + t.clause +
                                 "' has head " + describe(head) + " in clause '" + head.clause + "'");
        if (head.role == Role::particle)
            throw LinearizeError("modifier " + describe(t) + " is attached to particle " + describe(head));
    }

    const auto children = modifier_children(sentence);
    ClauseChunks chunks;
    for (const auto& c : sentence.clauses) chunks[c.id];
    for (const auto& t : tokens) {
        if (is_modifier(t.role) || t.role == Role::particle) continue;
        Chunk chunk{t.index, {}};
        arrange(t.index, sentence, children, profile, chunk.members);
        if (!profile.enabled(OrderingRule::chunk)) std::sort(chunk.members.begin(), chunk.members.end());
        chunks[t.clause].push_back(std::move(chunk));
    }
    return chunks;
}

int class_rank(const AnnotatedToken& token, const RuleProfile& profile) {
    constexpr int kOther = 70;
    switch (token.role) {
        case Role::sambodhya:
            return 0;
        case Role::kartr:
            return 10;
        case Role::karman:
        case Role::karana:
        case Role::sampradana:
        case Role::apadana:
        case Role::adhikarana: {
            const auto pos = std::find(profile.karaka_order.begin(), profile.karaka_order.end(), token.role) -
                             profile.karaka_order.begin();
            return 20 + 10 * static_cast<int>(pos);
        }
        case Role::nonfinite_verb:
            if (profile.nonfinite_placement == NonfinitePlacement::before_karman)
            {
                const auto pos = std::find(profile.karaka_order.begin(), profile.karaka_order.end(), Role::karman) -
                                 profile.karaka_order.begin();
                return 20 + 10 * static_cast<int>(pos) - 5;
            }
            return 75;
        case Role::finite_verb:
            return token.flags.main_verb ? 85 : 80;
        case Role::quotative_marker:
            return 90;
        default:
            return kOther;
    }
}

std::optional<std::size_t> argument_governor(const AnnotatedSentence& sentence, std::size_t chunk_head) {
    const auto& t = sentence.tokens.at(chunk_head);
    switch (t.role) {
        case Role::sambodhya:
        case Role::finite_verb:
        case Role::quotative_marker:
        case Role::particle:
            return std::nullopt;
        default:
            break;
    }
    if (is_modifier(t.role) || !t.head) return std::nullopt;
    const auto& g = sentence.tokens[*t.head];
    if (g.clause != t.clause) return std::nullopt;
    if (g.role == Role::finite_verb || g.role == Role::particle || g.role == Role::quotative_marker)
        return std::nullopt;
    return g.index;
}

std::vector<std::size_t> order_clause(const AnnotatedSentence& sentence, const std::string& clause_id,
                                      std::span<const Chunk> chunks, const RuleProfile& profile) {
    const auto& tokens = sentence.tokens;
    const std::size_t n = tokens.size();
    constexpr auto kNone = std::numeric_limits<std::size_t>::max();

    int main_verbs = 0;
    for (const auto& t : tokens)
        if (t.clause == clause_id && t.role == Role::finite_verb && t.flags.main_verb) ++main_verbs;
    if (main_verbs > 1)
        throw LinearizeError("clause '" + clause_id + "' has two finite verbs flagged is-main-verb");

    // Which chunk each token belongs to.
    std::vector<std::size_t> chunk_of(n, kNone);
    std::size_t member_total = 0;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        for (std::size_t m : chunks[c].members) {
            if (m >= n || chunk_of[m] != kNone)
                throw LinearizeError("chunks of clause '" + clause_id + "' do not partition its tokens");
            chunk_of[m] = c;
        }
        member_total += chunks[c].members.size();
    }

    // Argument chunks grouped under their governing token.
    std::vector<std::vector<std::size_t>> args(n);
    std::vector<std::size_t> top_level;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        const auto gov = argument_governor(sentence, chunks[c].head);
        if (gov && chunk_of[*gov] != kNone)
            args[*gov].push_back(c);
        else
            top_level.push_back(c);
    }

    const bool intra = profile.enabled(OrderingRule::intra_order);
    auto sorted_group = [&](std::vector<std::size_t> group) {
        std::stable_sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
            const auto& ta = tokens[chunks[a].head];
            const auto& tb = tokens[chunks[b].head];
            const int ra = intra ? class_rank(ta, profile) : 0;
            const int rb = intra ? class_rank(tb, profile) : 0;
            if (ra != rb) return ra < rb;
            return ta.index < tb.index;
        });
        return group;
    };

    std::vector<std::size_t> out;
    out.reserve(member_total);
    std::function<void(std::size_t)> emit = [&](std::size_t c) {
        const auto& chunk = chunks[c];
        const auto& members = chunk.members;
        // A governor's arguments go before the first member of its modifier
        // subtree; ancestors' arguments come before descendants'.
        struct Insertion {
            std::size_t position;
            std::size_t depth;
            std::size_t governor;
        };
        std::vector<Insertion> insertions;
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (args[members[i]].empty()) continue;
            Insertion ins{i, 0, members[i]};
            for (std::size_t j = 0; j < members.size(); ++j) {
                std::size_t cur = members[j];
                while (cur != members[i] && cur != chunk.head) cur = *tokens[cur].head;
                if (cur == members[i]) ins.position = std::min(ins.position, j);
            }
            for (std::size_t cur = members[i]; cur != chunk.head; cur = *tokens[cur].head) ++ins.depth;
            insertions.push_back(ins);
        }
        std::sort(insertions.begin(), insertions.end(), [](const Insertion& a, const Insertion& b) {
            return a.position != b.position ? a.position < b.position : a.depth < b.depth;
        });
        auto next = insertions.begin();
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (; next != insertions.end() && next->position == i; ++next)
                for (std::size_t a : sorted_group(args[next->governor])) emit(a);
            out.push_back(members[i]);
        }
    };

    for (std::size_t c : sorted_group(top_level)) emit(c);
    if (out.size() != member_total)
        throw LinearizeError("clause '" + clause_id + "': argument links leave chunks unreachable");
    return out;
}

std::vector<std::string> order_clauses(const AnnotatedSentence& sentence) {
    return order_clauses(sentence, RuleProfile{});
}

std::vector<std::string> order_clauses(const AnnotatedSentence& sentence, const RuleProfile& profile) {
    const auto& clauses = sentence.clauses;
    constexpr auto kNone = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> first_token(clauses.size(), kNone);
    for (std::size_t c = 0; c < clauses.size(); ++c)
        for (const auto& t : sentence.tokens)
            if (t.clause == clauses[c].id) first_token[c] = std::min(first_token[c], t.index);

    std::vector<std::size_t> idx(clauses.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto by_source = [&](std::size_t a, std::size_t b) { return first_token[a] < first_token[b]; };

    const bool all_ranked = std::all_of(clauses.begin(), clauses.end(),
                                        [](const ClauseInfo& c) { return c.order_rank.has_value(); });
    if (!profile.enabled(OrderingRule::clause)) {
        std::stable_sort(idx.begin(), idx.end(), by_source);
    } else if (all_ranked) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return *clauses[a].order_rank < *clauses[b].order_rank; });
    } else {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const bool ma = clauses[a].kind == ClauseKind::main;
            const bool mb = clauses[b].kind == ClauseKind::main;
            if (ma != mb) return mb;
            return by_source(a, b);
        });
    }

    std::vector<std::string> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(clauses[i].id);
    return out;
}

std::vector<std::size_t> place_particles(std::span<const std::size_t> order, const AnnotatedSentence& sentence) {
    const auto& tokens = sentence.tokens;
    const std::size_t n = tokens.size();

    std::vector<std::vector<std::size_t>> particles(n);
    std::size_t particle_count = 0;
    for (const auto& t : tokens) {
        if (t.role != Role::particle) continue;
        if (!t.head) throw LinearizeError("particle " + describe(t) + " has no head");
        particles[*t.head].push_back(t.index);
        ++particle_count;
    }

    std::vector<char> seen(n, 0);
    for (std::size_t i : order) {
        if (i >= n || tokens[i].role == Role::particle || seen[i])
            throw LinearizeError("order must list every non-particle token exactly once");
        seen[i] = 1;
    }
    if (order.size() + particle_count != n)
        throw LinearizeError("order must list every non-particle token exactly once");

    std::vector<std::size_t> out;
    out.reserve(n);
    std::function<void(std::size_t)> attach = [&](std::size_t head) {
        for (std::size_t p : particles[head]) {
            out.push_back(p);
            attach(p);
        }
    };
    for (std::size_t i : order) {
        out.push_back(i);
        attach(i);
    }
    return out;
}

namespace {

// R-particle disabled: a particle stays behind its nearest non-particle
// left neighbour in the source; leading particles open the output.
std::vector<std::size_t> keep_particles_in_place(const std::vector<std::size_t>& order,
                                                 const AnnotatedSentence& sentence) {
    const auto& tokens = sentence.tokens;
    std::vector<std::vector<std::size_t>> trailing(tokens.size());
    std::vector<std::size_t> leading;
    std::optional<std::size_t> anchor;
    for (const auto& t : tokens) {
        if (t.role != Role::particle) {
            anchor = t.index;
        } else if (anchor) {
            trailing[*anchor].push_back(t.index);
        } else {
            leading.push_back(t.index);
        }
    }
    std::vector<std::size_t> out = leading;
    for (std::size_t i : order) {
        out.push_back(i);
        out.insert(out.end(), trailing[i].begin(), trailing[i].end());
    }
    return out;
}

}  // namespace

std::vector<std::size_t> linearize_order(const AnnotatedSentence& sentence, const RuleProfile& profile) {
    profile.validate();
    const auto chunks = build_chunks(sentence, profile);

    std::vector<std::size_t> order;
    order.reserve(sentence.tokens.size());
    for (const auto& clause_id : order_clauses(sentence, profile)) {
        const auto it = chunks.find(clause_id);
        if (it == chunks.end()) continue;
        const auto clause_order = order_clause(sentence, clause_id, it->second, profile);
        order.insert(order.end(), clause_order.begin(), clause_order.end());
    }

    if (!profile.enabled(OrderingRule::particle)) return keep_particles_in_place(order, sentence);
    return place_particles(order, sentence);
}

std::string linearize(const AnnotatedSentence& sentence, const RuleProfile& profile) {
    std::string out;
    for (std::size_t i : linearize_order(sentence, profile)) {
        if (!out.empty()) out += ' ';
        out += sentence.tokens[i].surface;
    }
    return out;
}

}  // namespace anvaya
