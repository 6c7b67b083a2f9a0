#include "testkit.hpp"

#include "anvaya/linearizer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

using namespace anvaya;

namespace testkit {

namespace {

const std::vector<std::string> kVocab{"rāmaḥ", "vanam", "gacchati", "ca", "saḥ", "api", "na", "kālah",
                                      "sītā", "tu", "eva", "hi", "prajāḥ", "iti", "dṛṣṭvā", "mahān"};

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

struct Draft {
    Role role;
    std::optional<std::size_t> head;  // draft index
    std::string clause;
    bool main_verb = false;
    bool relative_pronoun = false;
};

}  // namespace

AnnotatedSentence random_sentence(std::mt19937& rng, std::size_t max_tokens) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int k = uni(1, 3);
    const int main_clause = uni(0, k - 1);
    std::vector<ClauseInfo> clauses;
    for (int c = 0; c < k; ++c) {
        ClauseInfo info;
        info.id = "C" + std::to_string(c);
        if (c == main_clause)
            info.kind = ClauseKind::main;
        else
            info.kind = pick(rng, std::vector<ClauseKind>{ClauseKind::relative, ClauseKind::quotative,
                                                          ClauseKind::absolutive});
        clauses.push_back(info);
    }
    if (uni(0, 1)) {
        std::vector<int> ranks(static_cast<std::size_t>(k - 1));
        std::iota(ranks.begin(), ranks.end(), 0);
        std::shuffle(ranks.begin(), ranks.end(), rng);
        for (int c = 0, r = 0; c < k; ++c)
            clauses[c].order_rank = c == main_clause ? k - 1 : ranks[static_cast<std::size_t>(r++)];
    }

    std::vector<Draft> d;
    std::vector<std::size_t> verb_of(static_cast<std::size_t>(k));
    verb_of[main_clause] = 0;
    d.push_back({Role::finite_verb, std::nullopt, clauses[main_clause].id, true});
    for (int c = 0; c < k; ++c) {
        if (c == main_clause) continue;
        verb_of[c] = d.size();
        d.push_back({Role::finite_verb, 0, clauses[c].id, uni(0, 1) == 1});
    }
    const std::size_t n = static_cast<std::size_t>(uni(k, static_cast<int>(max_tokens)));
    std::vector<bool> has_iti(static_cast<std::size_t>(k), false);
    const std::vector<Role> args{Role::kartr,      Role::karman,     Role::karana, Role::sampradana,
                                 Role::apadana,    Role::adhikarana, Role::other};
    const std::vector<Role> mods{Role::genitive_modifier,  Role::adjective,           Role::adverb,
                                 Role::negation,           Role::appositive_of_kartr, Role::appositive_of_karman};
    while (d.size() < n) {
        const int c = uni(0, k - 1);
        const auto& cid = clauses[c].id;
        auto in_clause = [&](auto pred) {
            std::vector<std::size_t> out;
            for (std::size_t i = 0; i < d.size(); ++i)
                if (d[i].clause == cid && pred(d[i])) out.push_back(i);
            return out;
        };
        const int kind = uni(0, 9);
        if (kind <= 3) {
            auto governors = in_clause([](const Draft& x) {
                return (x.role == Role::finite_verb && x.main_verb) || x.role == Role::nonfinite_verb ||
                       x.role == Role::adjective;
            });
            if (governors.empty()) governors.push_back(verb_of[c]);
            Draft t{pick(rng, args), pick(rng, governors), cid};
            t.relative_pronoun = clauses[c].kind == ClauseKind::relative && uni(0, 3) == 0;
            d.push_back(t);
        } else if (kind == 4) {
            auto governors = in_clause([](const Draft& x) { return x.role == Role::nonfinite_verb; });
            governors.push_back(verb_of[c]);
            d.push_back({Role::nonfinite_verb, pick(rng, governors), cid});
        } else if (kind == 5) {
            d.push_back({Role::sambodhya, verb_of[c], cid});
        } else if (kind <= 7) {
            const Role role = pick(rng, mods);
            auto heads = in_clause([role](const Draft& x) {
                if (role == Role::appositive_of_kartr) return x.role == Role::kartr;
                if (role == Role::appositive_of_karman) return x.role == Role::karman;
                return x.role != Role::particle && x.role != Role::quotative_marker;
            });
            if (!heads.empty()) d.push_back({role, pick(rng, heads), cid});
        } else if (kind == 8) {
            auto heads = in_clause([](const Draft&) { return true; });
            d.push_back({Role::particle, pick(rng, heads), cid});
        } else if (clauses[c].kind != ClauseKind::main && !has_iti[c]) {
            has_iti[c] = true;
            d.push_back({Role::quotative_marker, verb_of[c], cid});
        } else if (uni(0, 1)) {
            d.push_back({Role::finite_verb, verb_of[c], cid});
        }
    }

    std::vector<std::size_t> perm(d.size());  // draft index -> surface index
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    AnnotatedSentence s;
    s.clauses = clauses;
    s.tokens.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto& t = s.tokens[perm[i]];
        t.index = perm[i];
        t.surface = pick(rng, kVocab);
        t.role = d[i].role;
        if (d[i].head) t.head = perm[*d[i].head];
        t.clause = d[i].clause;
        t.flags.main_verb = d[i].main_verb;
        t.flags.relative_pronoun = d[i].relative_pronoun;
    }
    validate_sentence(s);
    return s;
}

AnnotatedSentence reorder(const AnnotatedSentence& s, const std::vector<std::size_t>& order) {
    std::vector<std::size_t> where(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) where[order[i]] = i;
    AnnotatedSentence out;
    out.clauses = s.clauses;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto t = s.tokens[order[i]];
        t.index = i;
        if (t.head) t.head = where[*t.head];
        out.tokens.push_back(std::move(t));
    }
    return out;
}

std::size_t main_verb(const AnnotatedSentence& s) {
    std::string main;
    for (const auto& c : s.clauses)
        if (c.kind == ClauseKind::main) main = c.id;
    for (const auto& t : s.tokens)
        if (t.clause == main && t.flags.main_verb) return t.index;
    throw std::logic_error("no main verb");
}

std::vector<std::string> linearizer_violations(const AnnotatedSentence& s, const RuleProfile& profile) {
    std::vector<std::string> bad;
    const auto order = linearize_order(s, profile);
    const std::size_t n = s.tokens.size();

    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) {
        bad.push_back("output is not a permutation of the input tokens");
        return bad;
    }
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;

    const auto mv = main_verb(s);
    for (std::size_t i = pos[mv] + 1; i < n; ++i) {
        auto t = order[i];
        while (s.tokens[t].role == Role::particle) t = *s.tokens[t].head;
        if (t != mv) bad.push_back("token " + std::to_string(order[i]) + " follows the main verb");
    }

    for (const auto& t : s.tokens) {
        if (t.role != Role::particle) continue;
        bool ok = false;
        if (pos[t.index] > 0) {
            auto a = order[pos[t.index] - 1];
            ok = a == *t.head;
            while (!ok && s.tokens[a].role == Role::particle) {
                a = *s.tokens[a].head;
                ok = a == *t.head;
            }
        }
        if (!ok) bad.push_back("particle " + std::to_string(t.index) + " is not adjacent to its head");
    }

    for (const auto& [cid, chunks] : build_chunks(s, profile)) {
        for (const auto& voc : chunks) {
            if (s.tokens[voc.head].role != Role::sambodhya) continue;
            for (const auto& other : chunks) {
                if (s.tokens[other.head].role == Role::sambodhya || argument_governor(s, other.head)) continue;
                if (pos[voc.members.front()] > pos[other.members.front()])
                    bad.push_back("vocative " + std::to_string(voc.head) + " follows chunk " +
                                  std::to_string(other.head));
            }
        }
    }

    if (linearize_order(s, profile) != order) bad.push_back("non-deterministic output");
    if (linearize_order(reorder(s, order), profile) != identity) bad.push_back("not idempotent");
    return bad;
}

BruteTau brute_greedy_tau(const Tokens& hyp, const Tokens& ref) {
    std::map<std::string, std::vector<std::size_t>> ref_positions;
    for (std::size_t j = 0; j < ref.size(); ++j) ref_positions[ref[j]].push_back(j);
    std::map<std::string, std::size_t> seen;
    std::vector<std::size_t> seq;
    for (const auto& w : hyp) {
        const auto k = seen[w]++;
        const auto& pos = ref_positions[w];
        if (k < pos.size()) seq.push_back(pos[k]);
    }
    BruteTau out;
    out.aligned = seq.size();
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = i + 1; j < seq.size(); ++j)
            if (seq[i] > seq[j]) ++out.inversions;
    if (seq.size() >= 2) {
        const double pairs = static_cast<double>(seq.size() * (seq.size() - 1) / 2);
        out.defined = true;
        out.tau = (pairs - 2.0 * static_cast<double>(out.inversions)) / pairs;
    }
    return out;
}

std::size_t brute_min_inversions(const Tokens& hyp, const Tokens& ref) {
    // Try every assignment of hyp positions to distinct ref positions (or
    // none); keep those with the maximum number of matches.
    std::size_t best_matches = 0;
    std::size_t best_inv = 0;
    std::vector<int> assign(hyp.size(), -1);
    std::vector<bool> used(ref.size(), false);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == hyp.size()) {
            std::vector<std::size_t> seq;
            for (int a : assign)
                if (a >= 0) seq.push_back(static_cast<std::size_t>(a));
            std::size_t inv = 0;
            for (std::size_t x = 0; x < seq.size(); ++x)
                for (std::size_t y = x + 1; y < seq.size(); ++y) inv += seq[x] > seq[y];
            if (seq.size() > best_matches || (seq.size() == best_matches && inv < best_inv)) {
                best_matches = seq.size();
                best_inv = inv;
            }
            return;
        }
        rec(i + 1);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (used[j] || ref[j] != hyp[i]) continue;
            used[j] = true;
            assign[i] = static_cast<int>(j);
            rec(i + 1);
            assign[i] = -1;
            used[j] = false;
        }
    };
    rec(0);
    return best_inv;
}

Tokens words(const std::string& text) {
    std::istringstream in(text);
    Tokens out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

}  // namespace testkit
