#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qber/core.hpp"

namespace qber {

struct Threat {
    std::string id;
    std::string name;
    std::optional<std::string> taxonomy_ref;  ///< e.g. an ATT&CK technique id

    friend bool operator==(const Threat&, const Threat&) = default;
};

struct SecurityDomain {
    std::string id;
    std::string name;

    friend bool operator==(const SecurityDomain&, const SecurityDomain&) = default;
};

struct ControlDef {
    std::string id;
    std::string name;
    Money capex;
    Money opex_annual;
    std::map<std::string, UnitFraction> base_efficacy;  ///< threat id -> promised efficacy
    CiaPosture cia_contribution;
    std::vector<std::string> domains;

    UnitFraction efficacy_against(const std::string& threat_id) const {
        auto it = base_efficacy.find(threat_id);
        return it == base_efficacy.end() ? UnitFraction{} : it->second;
    }

    friend bool operator==(const ControlDef&, const ControlDef&) = default;
};

/// Per-maturity coefficient applied to promised control efficacy.
class MaturityTable {
public:
    static constexpr std::array<double, 6> kDefault{1.25, 0.65, 0.55, 0.45, 0.31, 0.25};

    MaturityTable() = default;
    explicit MaturityTable(std::array<double, 6> values) : values_(values) {}

    double operator[](MaturityLevel m) const noexcept { return values_[index_of(m)]; }
    const std::array<double, 6>& values() const noexcept { return values_; }

    friend bool operator==(const MaturityTable&, const MaturityTable&) = default;

private:
    std::array<double, 6> values_ = kDefault;
};

/// One row of the external RCVaR factor table.
struct RcvarRow {
    std::string sector;
    std::string country;
    std::string size_band;
    std::vector<UnitFraction> factors;

    friend bool operator==(const RcvarRow&, const RcvarRow&) = default;
};

inline constexpr std::string_view kCatalogSchemaVersion = "1.0.0";

/// The data layer: threats, domains, controls and their mappings. Immutable
/// after load; reloading produces a new value.
struct Catalog {
    std::string schema_version{kCatalogSchemaVersion};
    std::vector<Threat> threats;
    std::vector<SecurityDomain> domains;
    std::vector<ControlDef> controls;
    std::map<std::pair<std::string, std::string>, Weight> threat_domain_weights;  ///< (threat, domain)
    std::vector<RcvarRow> rcvar_rows;
    std::optional<std::vector<UnitFraction>> rcvar_default;
    MaturityTable maturity_multipliers;

    const Threat* find_threat(std::string_view id) const {
        for (const auto& t : threats)
            if (t.id == id) return &t;
        return nullptr;
    }
    const SecurityDomain* find_domain(std::string_view id) const {
        for (const auto& d : domains)
            if (d.id == id) return &d;
        return nullptr;
    }
    const ControlDef* find_control(std::string_view id) const {
        for (const auto& c : controls)
            if (c.id == id) return &c;
        return nullptr;
    }
    const ControlDef& control(std::string_view id) const {
        if (const auto* c = find_control(id)) return *c;
        throw Error(Errc::UnknownId, "unknown control '" + std::string(id) + "'", {std::string(id)});
    }

    friend bool operator==(const Catalog&, const Catalog&) = default;
};

inline double maturity_multiplier(MaturityLevel m, const Catalog& c) { return c.maturity_multipliers[m]; }

inline double maturity_multiplier(MaturityLevel m) { return MaturityTable{}[m]; }

/// Factor vector for the profile's (sector, country, size band), falling back
/// to the catalog default row. Throws NoFactorRow when neither exists.
inline std::vector<UnitFraction> rcvar_factors(const BusinessProfile& p, const Catalog& c) {
    const std::string band = size_band(p.yearly_revenue);
    for (const auto& row : c.rcvar_rows) {
        if (row.sector == p.sector && row.country == p.country && row.size_band == band) return row.factors;
    }
    if (c.rcvar_default) return *c.rcvar_default;
    throw Error(Errc::NoFactorRow, "no factor row for (" + p.sector + ", " + p.country + ", " + band + ")");
}

/// Stored relevance of a threat for a domain; 0 when unmapped.
inline Weight threat_domain_weight(std::string_view threat, std::string_view domain, const Catalog& c) {
    if (!c.find_threat(threat)) {
        throw Error(Errc::UnknownId, "unknown threat '" + std::string(threat) + "'", {std::string(threat)});
    }
    if (!c.find_domain(domain)) {
        throw Error(Errc::UnknownId, "unknown domain '" + std::string(domain) + "'", {std::string(domain)});
    }
    auto it = c.threat_domain_weights.find({std::string(threat), std::string(domain)});
    return it == c.threat_domain_weights.end() ? Weight{} : it->second;
}

} // namespace qber
