#pragma once

#include "anvaya/annotation.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <set>
#include <string>

namespace anvaya {

enum class NonfinitePlacement { before_karman, after_karakas };
enum class AppositivePlacement { before_head, after_head };

// Individually switchable reordering steps. A disabled step leaves the
// corresponding aspect of the source order untouched.
enum class OrderingRule { clause, chunk, intra_order, particle };

std::string_view to_string(OrderingRule rule);
std::string_view to_string(NonfinitePlacement placement);
std::string_view to_string(AppositivePlacement placement);

// Configuration shared by the linearizer and the compliance scorer.
struct RuleProfile {
    std::array<Role, 5> karaka_order{Role::adhikarana, Role::apadana, Role::sampradana,
                                     Role::karana, Role::karman};
    NonfinitePlacement nonfinite_placement = NonfinitePlacement::before_karman;
    AppositivePlacement appositive_placement = AppositivePlacement::after_head;
    std::set<OrderingRule> enabled_rules{OrderingRule::clause, OrderingRule::chunk,
                                         OrderingRule::intra_order, OrderingRule::particle};

    bool enabled(OrderingRule rule) const { return enabled_rules.count(rule) != 0; }

    // Throws Error unless karaka_order is a permutation of the five kārakas.
    void validate() const;

    nlohmann::json to_json() const;
    static RuleProfile from_json(const nlohmann::json& j);
    static RuleProfile load(const std::filesystem::path& path);

    // SHA-256 of the canonical json form; recorded in reports.
    std::string hash() const;

    bool operator==(const RuleProfile&) const = default;
};

}  // namespace anvaya
