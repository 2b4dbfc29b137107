#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qber/catalog.hpp"
#include "qber/core.hpp"
#include "qber/json_io.hpp"
#include "qber/service/assessment.hpp"
#include "qber/service/config.hpp"

namespace qber {

namespace change {

struct AddControl {
    SegmentRef segment;
    std::string control_id;
    MaturityLevel maturity = MaturityLevel::Initial;
    std::optional<std::size_t> index;  ///< insert position; appended when absent

    friend bool operator==(const AddControl&, const AddControl&) = default;
};

struct RemoveControl {
    SegmentRef segment;
    std::string control_id;

    friend bool operator==(const RemoveControl&, const RemoveControl&) = default;
};

struct SetMaturity {
    SegmentRef segment;
    std::string control_id;
    MaturityLevel maturity = MaturityLevel::Initial;

    friend bool operator==(const SetMaturity&, const SetMaturity&) = default;
};

struct SetBudget {
    std::optional<Money> budget;  ///< nullopt restores the unconstrained default

    friend bool operator==(const SetBudget&, const SetBudget&) = default;
};

struct SetThreatRating {
    SegmentRef segment;
    std::string threat_id;
    std::optional<Rating> operational;
    std::optional<Rating> financial;
    std::optional<Weight> risk_w;

    friend bool operator==(const SetThreatRating&, const SetThreatRating&) = default;
};

} // namespace change

using Change = std::variant<change::AddControl, change::RemoveControl, change::SetMaturity, change::SetBudget,
                            change::SetThreatRating>;

struct WhatIfDelta {
    std::vector<Change> changes;

    friend bool operator==(const WhatIfDelta&, const WhatIfDelta&) = default;
};

/// Result of applying a delta: the mutated inputs plus the delta that undoes it.
struct AppliedDelta {
    BusinessProfile profile;
    EngineConfig config;
    WhatIfDelta inverse;
};

namespace detail {

inline Segment& segment_or_throw(BusinessProfile& p, const SegmentRef& ref) {
    if (auto* seg = find_segment(p, ref)) return *seg;
    throw Error(Errc::UnknownEntity, "no segment '" + ref.segment + "' in unit '" + ref.unit + "'",
                {ref.unit + "/" + ref.segment});
}

inline std::vector<ControlImplementation>::iterator control_or_throw(Segment& seg, const SegmentRef& ref,
                                                                     const std::string& id) {
    auto it = std::find_if(seg.implemented_controls.begin(), seg.implemented_controls.end(),
                           [&](const ControlImplementation& c) { return c.control_id == id; });
    if (it == seg.implemented_controls.end()) {
        throw Error(Errc::UnknownEntity, "control '" + id + "' is not implemented in " + ref.unit + "/" + ref.segment,
                    {id});
    }
    return it;
}

} // namespace detail

/// Applies changes in order. Every change must reference existing entities
/// (UnknownEntity otherwise); the returned inverse restores the inputs exactly.
inline AppliedDelta apply_delta(const BusinessProfile& profile, const EngineConfig& config, const WhatIfDelta& delta,
                                const Catalog& catalog) {
    AppliedDelta out{profile, config, {}};
    std::vector<Change> inverse;

    for (const auto& ch : delta.changes) {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, change::AddControl>) {
                    auto& seg = detail::segment_or_throw(out.profile, c.segment);
                    if (!catalog.find_control(c.control_id)) {
                        throw Error(Errc::UnknownEntity, "unknown control '" + c.control_id + "'", {c.control_id});
                    }
                    const bool present =
                        std::any_of(seg.implemented_controls.begin(), seg.implemented_controls.end(),
                                    [&](const ControlImplementation& i) { return i.control_id == c.control_id; });
                    if (present) {
                        throw Error(Errc::ValidationFailed, "control '" + c.control_id + "' already implemented",
                                    {c.control_id});
                    }
                    const std::size_t pos = std::min(c.index.value_or(seg.implemented_controls.size()),
                                                     seg.implemented_controls.size());
                    seg.implemented_controls.insert(seg.implemented_controls.begin() + static_cast<std::ptrdiff_t>(pos),
                                                    {c.control_id, c.maturity});
                    inverse.push_back(change::RemoveControl{c.segment, c.control_id});
                } else if constexpr (std::is_same_v<T, change::RemoveControl>) {
                    auto& seg = detail::segment_or_throw(out.profile, c.segment);
                    auto it = detail::control_or_throw(seg, c.segment, c.control_id);
                    const auto pos = static_cast<std::size_t>(it - seg.implemented_controls.begin());
                    inverse.push_back(change::AddControl{c.segment, c.control_id, it->maturity, pos});
                    seg.implemented_controls.erase(it);
                } else if constexpr (std::is_same_v<T, change::SetMaturity>) {
                    auto& seg = detail::segment_or_throw(out.profile, c.segment);
                    auto it = detail::control_or_throw(seg, c.segment, c.control_id);
                    inverse.push_back(change::SetMaturity{c.segment, c.control_id, it->maturity});
                    it->maturity = c.maturity;
                } else if constexpr (std::is_same_v<T, change::SetBudget>) {
                    inverse.push_back(change::SetBudget{out.config.budget});
                    out.config.budget = c.budget;
                } else if constexpr (std::is_same_v<T, change::SetThreatRating>) {
                    auto& seg = detail::segment_or_throw(out.profile, c.segment);
                    auto it = std::find_if(seg.threat_exposures.begin(), seg.threat_exposures.end(),
                                           [&](const ThreatExposure& t) { return t.threat_id == c.threat_id; });
                    if (it == seg.threat_exposures.end()) {
                        throw Error(Errc::UnknownEntity, "threat '" + c.threat_id + "' not exposed in segment",
                                    {c.threat_id});
                    }
                    change::SetThreatRating undo{c.segment, c.threat_id, {}, {}, {}};
                    if (c.operational) {
                        undo.operational = it->operational;
                        it->operational = *c.operational;
                    }
                    if (c.financial) {
                        undo.financial = it->financial;
                        it->financial = *c.financial;
                    }
                    if (c.risk_w) {
                        undo.risk_w = it->risk_w;
                        it->risk_w = *c.risk_w;
                    }
                    inverse.push_back(std::move(undo));
                }
            },
            ch);
    }
    out.inverse.changes.assign(inverse.rbegin(), inverse.rend());
    return out;
}

/// Re-runs the base report's inputs with the delta applied. The catalog must
/// be the one the base was computed against (StaleCatalog otherwise).
inline AssessmentReport whatif(const ReportInputs& base, const WhatIfDelta& delta, const Catalog& catalog) {
    if (catalog_version(catalog) != base.catalog_version) {
        throw Error(Errc::StaleCatalog, "report was computed against catalog " + base.catalog_version,
                    {base.catalog_version});
    }
    const auto applied = apply_delta(base.profile, base.config, delta, catalog);
    auto report = assess(applied.profile, catalog, applied.config);
    report.base_report_id = base.id;
    return report;
}

inline AssessmentReport whatif(const AssessmentReport& base, const WhatIfDelta& delta, const Catalog& catalog) {
    return whatif(ReportInputs{base.id, base.catalog_version, base.profile, base.config}, delta, catalog);
}

// ── JSON ─────────────────────────────────────────────────────────────────────

inline nlohmann::json to_json(const WhatIfDelta& delta) {
    using nlohmann::json;
    json changes = json::array();
    for (const auto& ch : delta.changes) {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                json j;
                if constexpr (std::is_same_v<T, change::AddControl>) {
                    j = {{"op", "add_control"},
                         {"unit", c.segment.unit},
                         {"segment", c.segment.segment},
                         {"control_id", c.control_id},
                         {"maturity", to_string(c.maturity)}};
                    if (c.index) j["index"] = *c.index;
                } else if constexpr (std::is_same_v<T, change::RemoveControl>) {
                    j = {{"op", "remove_control"},
                         {"unit", c.segment.unit},
                         {"segment", c.segment.segment},
                         {"control_id", c.control_id}};
                } else if constexpr (std::is_same_v<T, change::SetMaturity>) {
                    j = {{"op", "set_maturity"},
                         {"unit", c.segment.unit},
                         {"segment", c.segment.segment},
                         {"control_id", c.control_id},
                         {"maturity", to_string(c.maturity)}};
                } else if constexpr (std::is_same_v<T, change::SetBudget>) {
                    j = {{"op", "set_budget"}, {"budget", c.budget ? detail::money_json(*c.budget) : json(nullptr)}};
                } else {
                    j = {{"op", "set_threat_rating"},
                         {"unit", c.segment.unit},
                         {"segment", c.segment.segment},
                         {"threat_id", c.threat_id}};
                    if (c.operational) j["operational"] = to_string(*c.operational);
                    if (c.financial) j["financial"] = to_string(*c.financial);
                    if (c.risk_w) j["risk_w"] = c.risk_w->value();
                }
                changes.push_back(std::move(j));
            },
            ch);
    }
    return {{"changes", std::move(changes)}};
}

inline WhatIfDelta whatif_delta_from_json(const nlohmann::json& j) {
    const detail::Reader r(j, "");
    if (!j.is_object()) r.fail("expected delta object");
    WhatIfDelta delta;
    const auto changes = r.opt("changes");
    if (!changes) return delta;
    for (std::size_t i = 0; i < changes->size(); ++i) {
        const auto c = (*changes)[i];
        const auto op = c.at("op").str();
        auto seg = [&] { return SegmentRef{c.at("unit").str(), c.at("segment").str()}; };
        if (op == "add_control") {
            change::AddControl add{seg(), c.at("control_id").str(), c.at("maturity").maturity(), std::nullopt};
            if (auto idx = c.opt("index")) add.index = static_cast<std::size_t>(idx->integer());
            delta.changes.emplace_back(std::move(add));
        } else if (op == "remove_control") {
            delta.changes.emplace_back(change::RemoveControl{seg(), c.at("control_id").str()});
        } else if (op == "set_maturity") {
            delta.changes.emplace_back(
                change::SetMaturity{seg(), c.at("control_id").str(), c.at("maturity").maturity()});
        } else if (op == "set_budget") {
            change::SetBudget sb;
            if (auto b = c.opt("budget")) sb.budget = b->money();
            delta.changes.emplace_back(std::move(sb));
        } else if (op == "set_threat_rating") {
            change::SetThreatRating st{seg(), c.at("threat_id").str(), {}, {}, {}};
            if (auto v = c.opt("operational")) st.operational = v->rating();
            if (auto v = c.opt("financial")) st.financial = v->rating();
            if (auto v = c.opt("risk_w")) st.risk_w = v->weight();
            delta.changes.emplace_back(std::move(st));
        } else {
            c.at("op").fail("unknown change op '" + op + "'");
        }
    }
    return delta;
}

} // namespace qber
