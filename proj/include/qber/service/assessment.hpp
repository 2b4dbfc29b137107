#pragma once
/**
 * @file  assessment.hpp
 * @brief The assess pipeline and the AssessmentReport document.
 *
 * Pipeline: validate -> factors -> per segment (CIA posture, impacts, money
 * chain, exposure, ALE, economic score) -> domain ranking -> candidates ->
 * budgeted recommendation -> optional simulation.
 *
 * A report embeds its input profile and config, so it can be re-run (what-if)
 * without any other state. The body of a report (everything but id,
 * created_at and base_report_id) is a pure function of the inputs.
 */

#include <charconv>
#include <chrono>
#include <ctime>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qber/catalog.hpp"
#include "qber/core.hpp"
#include "qber/cost_engine.hpp"
#include "qber/json_io.hpp"
#include "qber/risk_engine.hpp"
#include "qber/service/config.hpp"
#include "qber/simulation.hpp"
#include "qber/validation.hpp"

namespace qber {

struct SegmentReport {
    SegmentAssessment assessment;
    EconomicRiskScore rs_economic;
};

struct AssessmentReport {
    std::string id;
    std::optional<std::string> base_report_id;
    std::string created_at;

    std::string profile_hash;
    std::string catalog_version;
    BusinessProfile profile;
    EngineConfig config;

    std::vector<UnitFraction> rcvar_factors;
    CiaPosture company_cia;  ///< revenue-weighted mean of segment postures
    EconomicRiskScore rs_economic;
    std::vector<SegmentReport> segments;
    std::vector<DomainPriority> domain_priorities;
    std::vector<ControlCandidate> candidates;
    RecommendationPlan recommendation;
    Money total_seg_risk;
    Money total_ale;
    std::optional<nlohmann::json> simulation;
};

namespace detail {

inline std::string new_id(std::string_view prefix) {
    static thread_local std::mt19937_64 gen{std::random_device{}() ^
                                            static_cast<std::uint64_t>(
                                                std::chrono::steady_clock::now().time_since_epoch().count())};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
    return std::string(prefix) + buf;
}

inline std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::vector<std::string> violation_details(const ValidationReport& report) {
    std::vector<std::string> out;
    for (const auto& v : report.violations) out.push_back(v.code + " " + v.path + ": " + v.message);
    return out;
}

} // namespace detail

inline std::string new_report_id() { return detail::new_id("rpt-"); }

inline AssessmentReport assess(const BusinessProfile& p, const Catalog& c, const EngineConfig& cfg = {}) {
    cfg.validate();
    if (auto report = validate_profile(p, c); !report.ok()) {
        throw Error(Errc::ValidationFailed, "profile failed validation", detail::violation_details(report));
    }
    const std::string& currency = p.yearly_revenue.currency();
    if (cfg.budget && cfg.budget->currency() != currency) {
        throw Error(Errc::CurrencyMismatch, "budget in " + cfg.budget->currency() + ", profile in " + currency);
    }

    AssessmentReport r;
    r.id = new_report_id();
    r.created_at = detail::utc_now_iso8601();
    r.profile_hash = profile_hash(p);
    r.catalog_version = catalog_version(c);
    r.profile = p;
    r.config = cfg;
    r.rcvar_factors = rcvar_factors(p, c);
    r.total_seg_risk = Money(0.0, currency);
    r.total_ale = Money(0.0, currency);

    const CandidatePolicy policy{cfg.candidate_maturity, cfg.cost_rate, cfg.amortization_years};
    std::vector<ThreatImpact> all_threats;
    double weight_sum = 0.0, wc = 0.0, wi = 0.0, wa = 0.0;
    for (const auto& unit : p.units) {
        for (const auto& seg : unit.segments) {
            SegmentReport sr;
            sr.assessment = assess_segment(p, {unit.name, seg.name}, c, cfg.rating_mapping);
            sr.rs_economic = economic_risk_score(r.rcvar_factors, sr.assessment.cia, cfg.use_exposure_in_rs);
            const auto& sa = sr.assessment;
            for (const auto& row : sa.threats) {
                all_threats.push_back({row.threat_id, row.impacts});
                r.total_seg_risk += row.seg_risk;
            }
            r.total_ale += sa.ale;
            const double w = sa.seg_revenue.amount();
            weight_sum += w;
            wc += w * sa.cia.confidentiality.value();
            wi += w * sa.cia.integrity.value();
            wa += w * sa.cia.availability.value();
            for (auto& cand : generate_candidates(sa, seg, c, policy)) r.candidates.push_back(std::move(cand));
            r.segments.push_back(std::move(sr));
        }
    }

    if (weight_sum > 0.0) {
        r.company_cia = {UnitFraction::clamped(wc / weight_sum), UnitFraction::clamped(wi / weight_sum),
                         UnitFraction::clamped(wa / weight_sum)};
    } else if (!r.segments.empty()) {
        double sc = 0.0, si = 0.0, sa = 0.0;
        for (const auto& s : r.segments) {
            sc += s.assessment.cia.confidentiality.value();
            si += s.assessment.cia.integrity.value();
            sa += s.assessment.cia.availability.value();
        }
        const double n = static_cast<double>(r.segments.size());
        r.company_cia = {UnitFraction::clamped(sc / n), UnitFraction::clamped(si / n), UnitFraction::clamped(sa / n)};
    }
    r.rs_economic = economic_risk_score(r.rcvar_factors, r.company_cia, cfg.use_exposure_in_rs);
    r.domain_priorities = domain_priorities(all_threats, c, cfg.alpha);

    Money budget(0.0, currency);
    if (cfg.budget) {
        budget = *cfg.budget;
    } else {
        for (const auto& cand : r.candidates) budget += cand.annualized_cost;
    }
    r.recommendation = recommend(r.candidates, budget, r.total_ale);
    std::sort(r.candidates.begin(), r.candidates.end(), candidate_before);

    if (cfg.simulation) {
        const auto dist = simulate_losses(p, c, *cfg.simulation, cfg.rating_mapping);
        r.simulation = simulation_summary(dist, cfg.simulation->confidence_levels);
    }
    return r;
}

/// Every monetary figure must satisfy 0 <= seg_risk <= seg_impact <= seg_revenue
/// <= company revenue and ale <= max seg_impact. Returns human-readable breaches.
inline std::vector<std::string> chain_bound_violations(const AssessmentReport& r) {
    std::vector<std::string> out;
    const double revenue = r.profile.yearly_revenue.amount();
    for (const auto& s : r.segments) {
        const auto& sa = s.assessment;
        const std::string where = sa.ref.unit + "/" + sa.ref.segment;
        if (sa.seg_revenue.amount() > revenue) out.push_back(where + ": seg_revenue > company revenue");
        double max_impact = 0.0;
        for (const auto& row : sa.threats) {
            if (row.seg_risk.amount() < 0.0) out.push_back(where + "/" + row.threat_id + ": seg_risk < 0");
            if (row.seg_risk.amount() > row.seg_impact.amount())
                out.push_back(where + "/" + row.threat_id + ": seg_risk > seg_impact");
            if (row.seg_impact.amount() > sa.seg_revenue.amount())
                out.push_back(where + "/" + row.threat_id + ": seg_impact > seg_revenue");
            max_impact = std::max(max_impact, row.seg_impact.amount());
        }
        if (sa.ale.amount() > max_impact) out.push_back(where + ": ale > max seg_impact");
    }
    return out;
}

// ── JSON ─────────────────────────────────────────────────────────────────────

inline nlohmann::json to_json(const CombinedImpact& ci) {
    return {{"value", ci.value.value()}, {"operational", ci.operational.value()}, {"financial", ci.financial.value()}};
}

inline nlohmann::json to_json(const EconomicRiskScore& rs) {
    return {{"value", rs.value.value()}, {"factor_mean", rs.factor_mean.value()}, {"cia_mean", rs.cia_mean.value()}};
}

inline nlohmann::json to_json(const ControlCandidate& cand) {
    return {{"control_id", cand.control_id},
            {"unit", cand.segment.unit},
            {"segment", cand.segment.segment},
            {"threat_id", cand.threat_id},
            {"target_maturity", to_string(cand.target_maturity)},
            {"annualized_cost", detail::money_json(cand.annualized_cost)},
            {"cost_rate", cand.cost_rate},
            {"base_efficacy", cand.base_efficacy.value()},
            {"actual_efficacy", cand.actual_efficacy.value()},
            {"efficacy_rating", to_string(efficacy_bucket(cand.actual_efficacy))},
            {"ale", detail::money_json(cand.ale)},
            {"z_rosi", cand.z_rosi}};
}

inline nlohmann::json to_json(const AssessmentReport& r) {
    using nlohmann::json;
    json segments = json::array();
    for (const auto& s : r.segments) {
        const auto& sa = s.assessment;
        json threats = json::array();
        for (const auto& row : sa.threats) {
            threats.push_back({{"threat_id", row.threat_id},
                               {"impacts", to_json(row.impacts)},
                               {"risk_w", row.risk_w.value()},
                               {"seg_impact", detail::money_json(row.seg_impact)},
                               {"seg_risk", detail::money_json(row.seg_risk)}});
        }
        segments.push_back({{"unit", sa.ref.unit},
                            {"segment", sa.ref.segment},
                            {"seg_revenue", detail::money_json(sa.seg_revenue)},
                            {"threats", std::move(threats)},
                            {"cia", detail::cia_json(sa.cia)},
                            {"exposure", sa.exposure.value()},
                            {"ale", detail::money_json(sa.ale)},
                            {"driving_threat", sa.driving_threat ? json(*sa.driving_threat) : json(nullptr)},
                            {"rs_economic", to_json(s.rs_economic)}});
    }
    json priorities = json::array();
    for (const auto& dp : r.domain_priorities) {
        json contribs = json::array();
        for (const auto& [tid, v] : dp.contributions) contribs.push_back({{"threat_id", tid}, {"contribution", v}});
        priorities.push_back({{"domain_id", dp.domain_id}, {"score", dp.score}, {"contributions", std::move(contribs)}});
    }
    json candidates = json::array();
    for (const auto& cand : r.candidates) candidates.push_back(to_json(cand));
    json chosen = json::array();
    for (const auto& cand : r.recommendation.chosen) chosen.push_back(to_json(cand));
    json factors = json::array();
    for (auto f : r.rcvar_factors) factors.push_back(f.value());

    return {{"id", r.id},
            {"base_report_id", r.base_report_id ? json(*r.base_report_id) : json(nullptr)},
            {"created_at", r.created_at},
            {"profile_hash", r.profile_hash},
            {"catalog_version", r.catalog_version},
            {"profile", to_json(r.profile)},
            {"config", to_json(r.config)},
            {"metadata", {{"ale_scope", "per_segment_worst_threat"}, {"size_band", size_band(r.profile.yearly_revenue)}}},
            {"rcvar_factors", std::move(factors)},
            {"company_cia", detail::cia_json(r.company_cia)},
            {"rs_economic", to_json(r.rs_economic)},
            {"segments", std::move(segments)},
            {"domain_priorities", std::move(priorities)},
            {"candidates", std::move(candidates)},
            {"recommendation",
             {{"budget", detail::money_json(r.recommendation.budget)},
              {"chosen", std::move(chosen)},
              {"total_cost", detail::money_json(r.recommendation.total_cost)},
              {"residual_risk_estimate", detail::money_json(r.recommendation.residual_risk_estimate)}}},
            {"totals", {{"seg_risk", detail::money_json(r.total_seg_risk)}, {"ale", detail::money_json(r.total_ale)}}},
            {"simulation", r.simulation ? *r.simulation : json(nullptr)}};
}

/// Report document minus identity fields; equal bodies mean equal results.
inline nlohmann::json report_body(nlohmann::json report) {
    report.erase("id");
    report.erase("created_at");
    report.erase("base_report_id");
    return report;
}

/// What a stored report needs to be re-run.
struct ReportInputs {
    std::string id;
    std::string catalog_version;
    BusinessProfile profile;
    EngineConfig config;
};

inline ReportInputs report_inputs_from_json(const nlohmann::json& j) {
    const detail::Reader r(j, "");
    if (!j.is_object()) r.fail("expected report object");
    ReportInputs in;
    in.id = r.at("id").str();
    in.catalog_version = r.at("catalog_version").str();
    in.profile = profile_from_json(r.at("profile").raw());
    in.config = engine_config_from_json(r.at("config").raw());
    return in;
}

// ── CSV ──────────────────────────────────────────────────────────────────────

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string csv_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

} // namespace detail

/// One row per (segment, threat) of a report document; segments without
/// threats get one row with empty threat fields.
inline void write_report_csv(std::ostream& out, const nlohmann::json& report) {
    using detail::csv_field;
    using detail::csv_number;
    out << "unit,segment,threat_id,seg_revenue,impact,risk_w,seg_impact,seg_risk,exposure,ale,currency\n";
    for (const auto& s : report.at("segments")) {
        const std::string prefix =
            csv_field(s.at("unit").get<std::string>()) + "," + csv_field(s.at("segment").get<std::string>()) + ",";
        const std::string suffix = csv_number(s.at("exposure").get<double>()) + "," +
                                   csv_number(s.at("ale").at("amount").get<double>()) + "," +
                                   csv_field(s.at("seg_revenue").at("currency").get<std::string>()) + "\n";
        const double rev = s.at("seg_revenue").at("amount").get<double>();
        if (s.at("threats").empty()) {
            out << prefix << "," << csv_number(rev) << ",,,,," << suffix;
            continue;
        }
        for (const auto& row : s.at("threats")) {
            out << prefix << csv_field(row.at("threat_id").get<std::string>()) << "," << csv_number(rev) << ","
                << csv_number(row.at("impacts").at("value").get<double>()) << ","
                << csv_number(row.at("risk_w").get<double>()) << ","
                << csv_number(row.at("seg_impact").at("amount").get<double>()) << ","
                << csv_number(row.at("seg_risk").at("amount").get<double>()) << "," << suffix;
        }
    }
}

inline void write_report_csv(std::ostream& out, const AssessmentReport& r) { write_report_csv(out, to_json(r)); }

} // namespace qber
