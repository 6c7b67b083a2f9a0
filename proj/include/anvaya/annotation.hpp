#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anvaya {

// Syntactic role of a segmented word. Kāraka names follow the traditional
// grammar: kartr = agent, karman = patient, karana = instrument,
// sampradana = recipient, apadana = source, adhikarana = locus.
enum class Role {
    sambodhya,
    kartr,
    karman,
    karana,
    sampradana,
    apadana,
    adhikarana,
    genitive_modifier,
    adjective,
    adverb,
    negation,
    appositive_of_kartr,
    appositive_of_karman,
    particle,
    nonfinite_verb,
    finite_verb,
    quotative_marker,
    other,
};

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

// Roles that attach to a head word and travel with it as one chunk.
bool is_modifier(Role role);
bool is_appositive(Role role);
bool is_karaka(Role role);

enum class ClauseKind { main, relative, quotative, absolutive };

std::string_view to_string(ClauseKind kind);
std::optional<ClauseKind> parse_clause_kind(std::string_view name);

struct TokenFlags {
    bool relative_pronoun = false;
    bool main_verb = false;

    bool operator==(const TokenFlags&) const = default;
};

struct AnnotatedToken {
    std::size_t index = 0;
    std::string surface;
    Role role = Role::other;
    std::optional<std::size_t> head;  // nullopt = root
    std::string clause;
    TokenFlags flags;

    bool operator==(const AnnotatedToken&) const = default;
};

struct ClauseInfo {
    std::string id;
    ClauseKind kind = ClauseKind::main;
    std::optional<int> order_rank;

    bool operator==(const ClauseInfo&) const = default;
};

struct AnnotatedSentence {
    std::vector<AnnotatedToken> tokens;
    std::vector<ClauseInfo> clauses;

    const ClauseInfo* find_clause(std::string_view id) const;
    std::vector<std::string> surfaces() const;

    bool operator==(const AnnotatedSentence&) const = default;
};

/// Throws AnnotationError on the first violated invariant:
///   - token indices are 0..n-1 in order
///   - heads are in range and never self-referential; head links are acyclic
///   - modifier, appositive and particle roles carry a head
///   - appositive-of-kartr / -karman heads are kartr / karman tokens
///   - at most one is-main-verb finite verb per clause
///   - every token's clause is declared; exactly one main clause
///   - order_rank values are pairwise distinct
void validate_sentence(const AnnotatedSentence& sentence);

void to_json(nlohmann::json& j, const AnnotatedToken& token);
void from_json(const nlohmann::json& j, AnnotatedToken& token);
void to_json(nlohmann::json& j, const ClauseInfo& clause);
void from_json(const nlohmann::json& j, ClauseInfo& clause);
void to_json(nlohmann::json& j, const AnnotatedSentence& sentence);
void from_json(const nlohmann::json& j, AnnotatedSentence& sentence);

}  // namespace anvaya
