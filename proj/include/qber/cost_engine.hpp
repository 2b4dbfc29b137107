#pragma once
/**
 * @file  cost_engine.hpp
 * @brief Segment money figures, control efficacy, exposure/ALE and Z-ROSI.
 *
 * Chain per (segment, threat):
 *
 *   seg_revenue = company revenue * unit share * segment share
 *   seg_impact  = seg_revenue * impact
 *   seg_risk    = seg_impact * (impact * risk_w)
 *
 * Per segment:
 *
 *   exposure = 1 - avg(CIA)
 *   ale      = exposure * max over threats of seg_impact
 *
 * Per candidate control:
 *
 *   efficacy = base * (1.25 - maturity multiplier)            clamped to [0,1]
 *   z_rosi   = (ale * efficacy - cost * rate) / (cost * rate)
 *
 * Recommendation is a greedy pass by descending z_rosi under a budget; it is
 * not a knapsack optimum.
 */

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qber/catalog.hpp"
#include "qber/core.hpp"
#include "qber/risk_engine.hpp"

namespace qber {

inline Money segment_revenue(const BusinessProfile& p, const SegmentRef& ref) {
    const auto* unit = find_unit(p, ref.unit);
    const auto* seg = find_segment(p, ref);
    if (!unit || !seg) {
        throw Error(Errc::UnknownRef, "no segment '" + ref.segment + "' in unit '" + ref.unit + "'",
                    {ref.unit + "/" + ref.segment});
    }
    return p.yearly_revenue.scaled(unit->revenue_share.value()).scaled(seg->revenue_share.value());
}

inline Money segment_impact(const Money& seg_revenue, const CombinedImpact& impacts) {
    return seg_revenue.scaled(impacts.value.value());
}

inline Money segment_risk(const Money& seg_impact, const CombinedImpact& impacts, UnitFraction risk_w) {
    return seg_impact.scaled(impacts.value.value() * risk_w.value());
}

inline UnitFraction control_efficacy(UnitFraction base, MaturityLevel m, const Catalog& c) {
    return UnitFraction::clamped(base.value() * (1.25 - c.maturity_multipliers[m]));
}

/// Thirds of [0,1]: < 1/3 Low, < 2/3 Medium, otherwise High.
inline Rating efficacy_bucket(UnitFraction e) {
    if (e.value() < 1.0 / 3.0) return Rating::Low;
    if (e.value() < 2.0 / 3.0) return Rating::Medium;
    return Rating::High;
}

inline UnitFraction exposure(const CiaPosture& cia) { return UnitFraction::clamped(1.0 - cia.mean()); }

inline Money ale(UnitFraction exposure, const Money& seg_impact) { return seg_impact.scaled(exposure.value()); }

inline double z_rosi(const Money& ale, UnitFraction efficacy, const Money& cost, double cost_rate) {
    ale.require_same_currency(cost);
    if (!(cost_rate > 0.0)) throw Error(Errc::InvalidConfig, "cost_rate must be > 0");
    const double adjusted_cost = cost.amount() * cost_rate;
    if (!(adjusted_cost > 0.0)) throw Error(Errc::ZeroCost, "control cost must be > 0");
    return (ale.amount() * efficacy.value() - adjusted_cost) / adjusted_cost;
}

inline Money annualized_cost(const ControlDef& ctl, double amortization_years = 3.0) {
    if (!(amortization_years > 0.0)) throw Error(Errc::InvalidConfig, "amortization_years must be > 0");
    return ctl.opex_annual + ctl.capex.scaled(1.0 / amortization_years);
}

struct ThreatRow {
    std::string threat_id;
    CombinedImpact impacts;
    UnitFraction risk_w;
    Money seg_impact;
    Money seg_risk;
};

struct SegmentAssessment {
    SegmentRef ref;
    Money seg_revenue;
    std::vector<ThreatRow> threats;
    CiaPosture cia;
    UnitFraction exposure;
    Money ale;
    std::optional<std::string> driving_threat;  ///< threat with the largest seg_impact
};

inline SegmentAssessment assess_segment(const BusinessProfile& p, const SegmentRef& ref, const Catalog& c,
                                        const RatingMapping& mapping = {}) {
    SegmentAssessment sa;
    sa.ref = ref;
    sa.seg_revenue = segment_revenue(p, ref);
    const auto& seg = *find_segment(p, ref);

    const ThreatRow* worst = nullptr;
    for (const auto& te : seg.threat_exposures) {
        if (!c.find_threat(te.threat_id)) {
            throw Error(Errc::UnknownId, "unknown threat '" + te.threat_id + "'", {te.threat_id});
        }
        ThreatRow row;
        row.threat_id = te.threat_id;
        row.impacts = combined_impact(te.operational, te.financial, mapping);
        row.risk_w = normalize(te.risk_w);
        row.seg_impact = segment_impact(sa.seg_revenue, row.impacts);
        row.seg_risk = segment_risk(row.seg_impact, row.impacts, row.risk_w);
        sa.threats.push_back(std::move(row));
    }
    for (const auto& row : sa.threats) {
        if (!worst || row.seg_impact.amount() > worst->seg_impact.amount() ||
            (row.seg_impact.amount() == worst->seg_impact.amount() && row.threat_id < worst->threat_id)) {
            worst = &row;
        }
    }
    sa.cia = cia_posture(seg.implemented_controls, c);
    sa.exposure = exposure(sa.cia);
    sa.ale = Money(0.0, p.yearly_revenue.currency());
    if (worst) {
        sa.driving_threat = worst->threat_id;
        sa.ale = ale(sa.exposure, worst->seg_impact);
    }
    return sa;
}

struct ControlCandidate {
    std::string control_id;
    SegmentRef segment;
    std::string threat_id;
    MaturityLevel target_maturity = MaturityLevel::Initial;
    Money annualized_cost;
    double cost_rate = 1.0;
    UnitFraction base_efficacy;
    UnitFraction actual_efficacy;
    Money ale;  ///< ALE of the segment the candidate protects
    double z_rosi = 0.0;
};

struct CandidatePolicy {
    MaturityLevel target_maturity = MaturityLevel::Initial;
    double cost_rate = 1.0;
    double amortization_years = 3.0;
};

inline ControlCandidate make_candidate(const ControlDef& ctl, const SegmentAssessment& sa, const std::string& threat_id,
                                       const Catalog& c, const CandidatePolicy& policy) {
    ControlCandidate cand;
    cand.control_id = ctl.id;
    cand.segment = sa.ref;
    cand.threat_id = threat_id;
    cand.target_maturity = policy.target_maturity;
    cand.annualized_cost = annualized_cost(ctl, policy.amortization_years);
    cand.cost_rate = policy.cost_rate;
    cand.base_efficacy = ctl.efficacy_against(threat_id);
    cand.actual_efficacy = control_efficacy(cand.base_efficacy, policy.target_maturity, c);
    cand.ale = sa.ale;
    cand.z_rosi = z_rosi(sa.ale, cand.actual_efficacy, cand.annualized_cost, policy.cost_rate);
    return cand;
}

/// Catalog controls not yet implemented in the segment that promise some
/// efficacy against its driving threat, evaluated at the policy's target
/// maturity. Controls with zero annualized cost have no defined Z-ROSI and
/// are left out.
inline std::vector<ControlCandidate> generate_candidates(const SegmentAssessment& sa, const Segment& seg,
                                                         const Catalog& c, const CandidatePolicy& policy = {}) {
    std::vector<ControlCandidate> out;
    if (!sa.driving_threat) return out;
    for (const auto& ctl : c.controls) {
        const bool implemented = std::any_of(seg.implemented_controls.begin(), seg.implemented_controls.end(),
                                             [&](const ControlImplementation& i) { return i.control_id == ctl.id; });
        if (implemented || !(ctl.efficacy_against(*sa.driving_threat).value() > 0.0)) continue;
        if (!(annualized_cost(ctl, policy.amortization_years).amount() > 0.0)) continue;
        out.push_back(make_candidate(ctl, sa, *sa.driving_threat, c, policy));
    }
    return out;
}

struct RecommendationPlan {
    Money budget;
    std::vector<ControlCandidate> chosen;
    Money total_cost;
    Money residual_risk_estimate;
};

/// Eligibility and selection order: z_rosi > 0, z_rosi descending, then lower
/// cost, control id, segment.
inline bool candidate_before(const ControlCandidate& a, const ControlCandidate& b) {
    if (a.z_rosi != b.z_rosi) return a.z_rosi > b.z_rosi;
    if (a.annualized_cost.amount() != b.annualized_cost.amount())
        return a.annualized_cost.amount() < b.annualized_cost.amount();
    if (a.control_id != b.control_id) return a.control_id < b.control_id;
    return a.segment < b.segment;
}

/// Greedy budget-constrained selection. residual_risk_estimate is the ALE left
/// after chosen controls, combining several controls on one segment as
/// independent layers. `baseline_ale` defaults to the summed ALE of the
/// segments the candidates cover.
inline RecommendationPlan recommend(std::vector<ControlCandidate> candidates, const Money& budget,
                                    std::optional<Money> baseline_ale = std::nullopt) {
    for (const auto& cand : candidates) budget.require_same_currency(cand.annualized_cost);

    RecommendationPlan plan;
    plan.budget = budget;
    plan.total_cost = Money(0.0, budget.currency());

    std::sort(candidates.begin(), candidates.end(), candidate_before);
    for (const auto& cand : candidates) {
        if (!(cand.z_rosi > 0.0)) break;  // sorted: nothing eligible follows
        const double next = plan.total_cost.amount() + cand.annualized_cost.amount();
        if (next > budget.amount()) continue;
        plan.total_cost = Money(next, budget.currency());
        plan.chosen.push_back(cand);
    }

    std::map<SegmentRef, std::pair<double, double>> segments;  // ref -> (ale, remaining fraction)
    for (const auto& cand : candidates) segments.try_emplace(cand.segment, cand.ale.amount(), 1.0);
    for (const auto& cand : plan.chosen) segments[cand.segment].second *= 1.0 - cand.actual_efficacy.value();
    double covered = 0.0, reduction = 0.0;
    for (const auto& [ref, entry] : segments) {
        covered += entry.first;
        reduction += entry.first * (1.0 - entry.second);
    }
    const double baseline = baseline_ale ? baseline_ale->amount() : covered;
    plan.residual_risk_estimate = Money(std::max(0.0, baseline - reduction), budget.currency());
    return plan;
}

} // namespace qber
