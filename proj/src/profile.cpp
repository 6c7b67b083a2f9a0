#include "anvaya/profile.hpp"

#include "anvaya/error.hpp"
#include "anvaya/hash.hpp"

#include <algorithm>
#include <fstream>

namespace anvaya {

namespace {

constexpr std::array<std::pair<OrderingRule, std::string_view>, 4> kRuleNames = {{
    {OrderingRule::clause, "R-clause"},
    {OrderingRule::chunk, "R-chunk"},
    {OrderingRule::intra_order, "R-intra-order"},
    {OrderingRule::particle, "R-particle"},
}};

}  // namespace

std::string_view to_string(OrderingRule rule) {
    for (const auto& [r, name] : kRuleNames)
        if (r == rule) return name;
    return "";
}

std::string_view to_string(NonfinitePlacement placement) {
    return placement == NonfinitePlacement::before_karman ? "before-karman" : "after-karakas";
}

std::string_view to_string(AppositivePlacement placement) {
    return placement == AppositivePlacement::before_head ? "before-head" : "after-head";
}

void RuleProfile::validate() const {
    for (Role r : {Role::adhikarana, Role::apadana, Role::sampradana, Role::karana, Role::karman})
        if (std::count(karaka_order.begin(), karaka_order.end(), r) != 1)
            throw Error("karaka_order must contain '" + std::string(to_string(r)) +
                        "' exactly once");
}

nlohmann::json RuleProfile::to_json() const {
    nlohmann::json order = nlohmann::json::array();
    for (Role r : karaka_order) order.push_back(to_string(r));
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& [r, name] : kRuleNames)
        if (enabled(r)) rules.push_back(name);
    return {{"karaka_order", order},
            {"nonfinite_placement", to_string(nonfinite_placement)},
            {"appositive_placement", to_string(appositive_placement)},
            {"enabled_rules", rules}};
}

RuleProfile RuleProfile::from_json(const nlohmann::json& j) {
    RuleProfile p;
    try {
        if (j.contains("karaka_order")) {
            const auto& order = j.at("karaka_order");
            if (!order.is_array() || order.size() != 5)
                throw Error("karaka_order must list exactly five roles");
            for (std::size_t i = 0; i < 5; ++i) {
                const auto name = order[i].get<std::string>();
                const auto role = parse_role(name);
                if (!role || !is_karaka(*role)) throw Error("'" + name + "' is not a kāraka role");
                p.karaka_order[i] = *role;
            }
        }
        if (j.contains("nonfinite_placement")) {
            const auto v = j.at("nonfinite_placement").get<std::string>();
            if (v == "before-karman")
                p.nonfinite_placement = NonfinitePlacement::before_karman;
            else if (v == "after-karakas")
                p.nonfinite_placement = NonfinitePlacement::after_karakas;
            else
                throw Error("unknown nonfinite_placement '" + v + "'");
        }
        if (j.contains("appositive_placement")) {
            const auto v = j.at("appositive_placement").get<std::string>();
            if (v == "before-head")
                p.appositive_placement = AppositivePlacement::before_head;
            else if (v == "after-head")
                p.appositive_placement = AppositivePlacement::after_head;
            else
                throw Error("unknown appositive_placement '" + v + "'");
        }
        if (j.contains("enabled_rules")) {
            p.enabled_rules.clear();
            for (const auto& item : j.at("enabled_rules")) {
                const auto name = item.get<std::string>();
                auto it = std::find_if(kRuleNames.begin(), kRuleNames.end(),
                                       [&](const auto& e) { return e.second == name; });
                if (it == kRuleNames.end()) throw Error("unknown ordering rule '" + name + "'");
                p.enabled_rules.insert(it->first);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed rule profile: ") + e.what());
    }
    p.validate();
    return p;
}

RuleProfile RuleProfile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open rule profile " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("malformed rule profile " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::string RuleProfile::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace anvaya
