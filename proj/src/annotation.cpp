#include "anvaya/annotation.hpp"

#include "anvaya/error.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <utility>

namespace anvaya {

namespace {

constexpr std::array<std::pair<Role, std::string_view>, 18> kRoleNames = {{
    {Role::sambodhya, "sambodhya"},
    {Role::kartr, "kartr"},
    {Role::karman, "karman"},
    {Role::karana, "karana"},
    {Role::sampradana, "sampradana"},
    {Role::apadana, "apadana"},
    {Role::adhikarana, "adhikarana"},
    {Role::genitive_modifier, "genitive-modifier"},
    {Role::adjective, "adjective"},
    {Role::adverb, "adverb"},
    {Role::negation, "negation"},
    {Role::appositive_of_kartr, "appositive-of-kartr"},
    {Role::appositive_of_karman, "appositive-of-karman"},
    {Role::particle, "particle"},
    {Role::nonfinite_verb, "nonfinite-verb"},
    {Role::finite_verb, "finite-verb"},
    {Role::quotative_marker, "quotative-marker"},
    {Role::other, "other"},
}};

constexpr std::array<std::pair<ClauseKind, std::string_view>, 4> kClauseKindNames = {{
    {ClauseKind::main, "main"},
    {ClauseKind::relative, "relative"},
    {ClauseKind::quotative, "quotative"},
    {ClauseKind::absolutive, "absolutive"},
}};

std::string describe(const AnnotatedToken& t) {
    return "token " + std::to_string(t.index) + " '" + t.surface + "'";
}

}  // namespace

std::string_view to_string(Role role) {
    for (const auto& [r, name] : kRoleNames)
        if (r == role) return name;
    return "other";
}

std::optional<Role> parse_role(std::string_view name) {
    for (const auto& [r, n] : kRoleNames)
        if (n == name) return r;
    return std::nullopt;
}

bool is_appositive(Role role) {
    return role == Role::appositive_of_kartr || role == Role::appositive_of_karman;
}

bool is_modifier(Role role) {
    switch (role) {
        case Role::genitive_modifier:
        case Role::adjective:
        case Role::adverb:
        case Role::negation:
        case Role::appositive_of_kartr:
        case Role::appositive_of_karman:
            return true;
        default:
            return false;
    }
}

bool is_karaka(Role role) {
    switch (role) {
        case Role::karman:
        case Role::karana:
        case Role::sampradana:
        case Role::apadana:
        case Role::adhikarana:
            return true;
        default:
            return false;
    }
}

std::string_view to_string(ClauseKind kind) {
    for (const auto& [k, name] : kClauseKindNames)
        if (k == kind) return name;
    return "main";
}

std::optional<ClauseKind> parse_clause_kind(std::string_view name) {
    for (const auto& [k, n] : kClauseKindNames)
        if (n == name) return k;
    return std::nullopt;
}

const ClauseInfo* AnnotatedSentence::find_clause(std::string_view id) const {
    for (const auto& c : clauses)
        if (c.id == id) return &c;
    return nullptr;
}

std::vector<std::string> AnnotatedSentence::surfaces() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.surface);
    return out;
}

void validate_sentence(const AnnotatedSentence& sentence) {
    const auto& tokens = sentence.tokens;
    const std::size_t n = tokens.size();

    std::set<std::string> clause_ids;
    std::set<int> ranks;
    int main_count = 0;
    for (const auto& c : sentence.clauses) {
        if (!clause_ids.insert(c.id).second)
            throw AnnotationError("duplicate clause id '" + c.id + "'");
        if (c.kind == ClauseKind::main) ++main_count;
        if (c.order_rank && !ranks.insert(*c.order_rank).second)
            throw AnnotationError("order_rank " + std::to_string(*c.order_rank) +
                                  " used by more than one clause");
    }
    if (main_count != 1)
        throw AnnotationError("expected exactly one main clause, found " +
                              std::to_string(main_count));

    std::map<std::string, int> main_verbs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = tokens[i];
        if (t.index != i)
            throw AnnotationError("token indices must be 0..n-1 in order; position " +
                                  std::to_string(i) + " has index " + std::to_string(t.index));
        if (!clause_ids.count(t.clause))
            throw AnnotationError(describe(t) + " names undeclared clause '" + t.clause + "'");
        if (t.head) {
            if (*t.head >= n)
                throw AnnotationError(describe(t) + " has out-of-range head " +
                                      std::to_string(*t.head));
            if (*t.head == i) throw AnnotationError(describe(t) + " is its own head");
            const Role head_role = tokens[*t.head].role;
            if ((t.role == Role::appositive_of_kartr && head_role != Role::kartr) ||
                (t.role == Role::appositive_of_karman && head_role != Role::karman))
                throw AnnotationError(describe(t) + " is an appositive of a " +
                                      std::string(to_string(head_role)) + " token");
        } else if (is_modifier(t.role) || t.role == Role::particle) {
            throw AnnotationError(describe(t) + " with role " + std::string(to_string(t.role)) +
                                  " requires a head");
        }
        if (t.flags.main_verb) {
            if (t.role != Role::finite_verb)
                throw AnnotationError(describe(t) + " is flagged is-main-verb but is not a finite verb");
            if (++main_verbs[t.clause] > 1)
                throw AnnotationError("clause '" + t.clause +
                                      "' has more than one is-main-verb finite verb");
        }
    }

    // Head links must be acyclic: walking up from any token terminates
    // within n steps.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t cur = i;
        for (std::size_t steps = 0; tokens[cur].head; ++steps) {
            if (steps > n) throw AnnotationError("head links form a cycle through " + describe(tokens[i]));
            cur = *tokens[cur].head;
        }
    }
}

void to_json(nlohmann::json& j, const AnnotatedToken& token) {
    nlohmann::json flags = nlohmann::json::array();
    if (token.flags.relative_pronoun) flags.push_back("is-relative-pronoun");
    if (token.flags.main_verb) flags.push_back("is-main-verb");
    j = nlohmann::json{{"index", token.index},
                       {"surface", token.surface},
                       {"role", to_string(token.role)},
                       {"clause", token.clause},
                       {"flags", flags}};
    if (token.head)
        j["head"] = *token.head;
    else
        j["head"] = "root";
}

void from_json(const nlohmann::json& j, AnnotatedToken& token) {
    token.index = j.at("index").get<std::size_t>();
    token.surface = j.at("surface").get<std::string>();
    const auto role_name = j.at("role").get<std::string>();
    const auto role = parse_role(role_name);
    if (!role) throw AnnotationError("unknown role '" + role_name + "'");
    token.role = *role;
    const auto& head = j.at("head");
    if (head.is_string()) {
        if (head.get<std::string>() != "root")
            throw AnnotationError("head must be an index or \"root\"");
        token.head.reset();
    } else {
        token.head = head.get<std::size_t>();
    }
    token.clause = j.at("clause").get<std::string>();
    token.flags = {};
    if (j.contains("flags")) {
        for (const auto& f : j.at("flags")) {
            const auto name = f.get<std::string>();
            if (name == "is-relative-pronoun")
                token.flags.relative_pronoun = true;
            else if (name == "is-main-verb")
                token.flags.main_verb = true;
            else
                throw AnnotationError("unknown flag '" + name + "'");
        }
    }
}

void to_json(nlohmann::json& j, const ClauseInfo& clause) {
    j = nlohmann::json{{"clause_id", clause.id}, {"kind", to_string(clause.kind)}};
    if (clause.order_rank) j["order_rank"] = *clause.order_rank;
}

void from_json(const nlohmann::json& j, ClauseInfo& clause) {
    clause.id = j.at("clause_id").get<std::string>();
    const auto kind_name = j.at("kind").get<std::string>();
    const auto kind = parse_clause_kind(kind_name);
    if (!kind) throw AnnotationError("unknown clause kind '" + kind_name + "'");
    clause.kind = *kind;
    if (j.contains("order_rank") && !j.at("order_rank").is_null())
        clause.order_rank = j.at("order_rank").get<int>();
    else
        clause.order_rank.reset();
}

void to_json(nlohmann::json& j, const AnnotatedSentence& sentence) {
    j = nlohmann::json{{"tokens", sentence.tokens}, {"clauses", sentence.clauses}};
}

void from_json(const nlohmann::json& j, AnnotatedSentence& sentence) {
    sentence.tokens = j.at("tokens").get<std::vector<AnnotatedToken>>();
    sentence.clauses = j.at("clauses").get<std::vector<ClauseInfo>>();
}

}  // namespace anvaya
