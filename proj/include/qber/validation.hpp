#pragma once

#include <set>
#include <string>
#include <vector>

#include "qber/catalog.hpp"
#include "qber/core.hpp"

namespace qber {

/// Violation codes reported by validate_profile.
namespace violation {
inline constexpr const char* kEmptyUnits = "EMPTY_UNITS";
inline constexpr const char* kNegativeRevenue = "NEGATIVE_REVENUE";
inline constexpr const char* kNegativeEmployees = "NEGATIVE_EMPLOYEES";
inline constexpr const char* kShareSumExceeded = "SHARE_SUM_EXCEEDED";
inline constexpr const char* kDuplicateUnit = "DUPLICATE_UNIT";
inline constexpr const char* kDuplicateSegment = "DUPLICATE_SEGMENT";
inline constexpr const char* kDuplicateControl = "DUPLICATE_CONTROL";
inline constexpr const char* kDuplicateThreat = "DUPLICATE_THREAT";
inline constexpr const char* kUnknownThreat = "UNKNOWN_THREAT";
inline constexpr const char* kUnknownControl = "UNKNOWN_CONTROL";
inline constexpr const char* kCurrencyMismatch = "CURRENCY_MISMATCH";
inline constexpr const char* kNoFactorRow = "NO_FACTOR_ROW";
inline constexpr const char* kSchemaVersion = "SCHEMA_VERSION_UNSUPPORTED";
} // namespace violation

struct Violation {
    std::string code;
    std::string path;  ///< JSON pointer into the profile document
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const {
        for (const auto& v : violations)
            if (v.code == code) return true;
        return false;
    }
};

// Shares are compared with a small slack so that e.g. 0.1 + 0.2 + 0.7 passes.
inline constexpr double kShareSlack = 1e-9;

/// Reports every violation; never throws.
inline ValidationReport validate_profile(const BusinessProfile& p, const Catalog& c) {
    ValidationReport report;
    auto add = [&](const char* code, std::string path, std::string message) {
        report.violations.push_back({code, std::move(path), std::move(message)});
    };

    if (p.schema_version.empty() || p.schema_version.front() != '1' ||
        (p.schema_version.size() > 1 && p.schema_version[1] != '.')) {
        add(violation::kSchemaVersion, "/schema_version", "unsupported schema_version " + p.schema_version);
    }
    if (p.units.empty()) add(violation::kEmptyUnits, "/units", "profile has no business units");
    if (!(p.yearly_revenue.amount() >= 0.0)) add(violation::kNegativeRevenue, "/yearly_revenue", "negative revenue");
    if (p.employee_count < 0) add(violation::kNegativeEmployees, "/employee_count", "negative employee count");

    for (const auto& ctl : c.controls) {
        if (ctl.capex.currency() != p.yearly_revenue.currency() ||
            ctl.opex_annual.currency() != p.yearly_revenue.currency()) {
            add(violation::kCurrencyMismatch, "/yearly_revenue/currency",
                "catalog control '" + ctl.id + "' is priced in " + ctl.capex.currency() + ", profile uses " +
                    p.yearly_revenue.currency());
            break;
        }
    }

    bool factor_row = c.rcvar_default.has_value();
    for (const auto& row : c.rcvar_rows) {
        factor_row = factor_row || (row.sector == p.sector && row.country == p.country &&
                                    row.size_band == size_band(p.yearly_revenue));
    }
    if (!factor_row) {
        add(violation::kNoFactorRow, "/sector",
            "no factor row for (" + p.sector + ", " + p.country + ", " + size_band(p.yearly_revenue) + ")");
    }

    double unit_share_sum = 0.0;
    std::set<std::string> unit_names;
    for (std::size_t ui = 0; ui < p.units.size(); ++ui) {
        const auto& unit = p.units[ui];
        const std::string upath = "/units/" + std::to_string(ui);
        unit_share_sum += unit.revenue_share.value();
        if (!unit_names.insert(unit.name).second) {
            add(violation::kDuplicateUnit, upath + "/name", "duplicate unit name '" + unit.name + "'");
        }

        double seg_share_sum = 0.0;
        std::set<std::string> seg_names;
        for (std::size_t si = 0; si < unit.segments.size(); ++si) {
            const auto& seg = unit.segments[si];
            const std::string spath = upath + "/segments/" + std::to_string(si);
            seg_share_sum += seg.revenue_share.value();
            if (!seg_names.insert(seg.name).second) {
                add(violation::kDuplicateSegment, spath + "/name", "duplicate segment name '" + seg.name + "'");
            }

            std::set<std::string> controls;
            for (std::size_t k = 0; k < seg.implemented_controls.size(); ++k) {
                const auto& impl = seg.implemented_controls[k];
                const std::string cpath = spath + "/implemented_controls/" + std::to_string(k) + "/control_id";
                if (!c.find_control(impl.control_id)) {
                    add(violation::kUnknownControl, cpath, "unknown control '" + impl.control_id + "'");
                }
                if (!controls.insert(impl.control_id).second) {
                    add(violation::kDuplicateControl, cpath, "control '" + impl.control_id + "' listed twice");
                }
            }

            std::set<std::string> threats;
            for (std::size_t k = 0; k < seg.threat_exposures.size(); ++k) {
                const auto& te = seg.threat_exposures[k];
                const std::string tpath = spath + "/threat_exposures/" + std::to_string(k) + "/threat_id";
                if (!c.find_threat(te.threat_id)) {
                    add(violation::kUnknownThreat, tpath, "unknown threat '" + te.threat_id + "'");
                }
                if (!threats.insert(te.threat_id).second) {
                    add(violation::kDuplicateThreat, tpath, "threat '" + te.threat_id + "' listed twice");
                }
            }
        }
        if (seg_share_sum > 1.0 + kShareSlack) {
            add(violation::kShareSumExceeded, upath + "/segments",
                "segment revenue shares of unit '" + unit.name + "' sum to " + std::to_string(seg_share_sum));
        }
    }
    if (unit_share_sum > 1.0 + kShareSlack) {
        add(violation::kShareSumExceeded, "/units", "unit revenue shares sum to " + std::to_string(unit_share_sum));
    }
    return report;
}

} // namespace qber
