#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qber/catalog.hpp"
#include "qber/core.hpp"

namespace qber {

/// Per-threat impact weight: normalized operational times normalized financial.
struct CombinedImpact {
    UnitFraction value;
    UnitFraction operational;
    UnitFraction financial;
};

inline CombinedImpact combined_impact(Weight operational, Weight financial) {
    const auto op = normalize(operational);
    const auto fin = normalize(financial);
    return {UnitFraction::clamped(op.value() * fin.value()), op, fin};
}

inline CombinedImpact combined_impact(Rating operational, Rating financial, const RatingMapping& mapping = {}) {
    return combined_impact(rating_to_weight(operational, mapping), rating_to_weight(financial, mapping));
}

/// Maturity-driven scaling of promised efficacy: (1.25 - multiplier), kept in [0,1].
inline double maturity_adjustment(MaturityLevel m, const Catalog& c) {
    const double adj = 1.25 - c.maturity_multipliers[m];
    return adj < 0.0 ? 0.0 : (adj > 1.0 ? 1.0 : adj);
}

/// CIA posture from implemented controls. Each control covers a dimension
/// with probability contribution * maturity adjustment; layers combine as
/// independent protections: posture = 1 - prod(1 - coverage).
inline CiaPosture cia_posture(std::span<const ControlImplementation> controls, const Catalog& c) {
    double gap_c = 1.0, gap_i = 1.0, gap_a = 1.0;
    for (const auto& impl : controls) {
        const auto& def = c.control(impl.control_id);
        const double adj = maturity_adjustment(impl.maturity, c);
        gap_c *= 1.0 - def.cia_contribution.confidentiality.value() * adj;
        gap_i *= 1.0 - def.cia_contribution.integrity.value() * adj;
        gap_a *= 1.0 - def.cia_contribution.availability.value() * adj;
    }
    return {UnitFraction::clamped(1.0 - gap_c), UnitFraction::clamped(1.0 - gap_i),
            UnitFraction::clamped(1.0 - gap_a)};
}

struct EconomicRiskScore {
    UnitFraction value;
    UnitFraction factor_mean;
    UnitFraction cia_mean;  ///< avg(CIA), or 1 - avg(CIA) when the exposure variant is enabled
};

/// mean(factors) * mean(CIA). With use_exposure the CIA term is replaced by
/// 1 - mean(CIA) so a stronger posture lowers the score.
inline EconomicRiskScore economic_risk_score(std::span<const UnitFraction> factors, const CiaPosture& cia,
                                             bool use_exposure = false) {
    if (factors.empty()) throw Error(Errc::EmptyFactors, "economic risk score needs at least one factor");
    double sum = 0.0;
    for (auto f : factors) sum += f.value();
    const auto factor_mean = UnitFraction::clamped(sum / static_cast<double>(factors.size()));
    const auto cia_term = UnitFraction::clamped(use_exposure ? 1.0 - cia.mean() : cia.mean());
    return {UnitFraction::clamped(factor_mean.value() * cia_term.value()), factor_mean, cia_term};
}

struct ThreatImpact {
    std::string threat_id;
    CombinedImpact impacts;
};

struct DomainPriority {
    std::string domain_id;
    double score = 0.0;
    std::vector<std::pair<std::string, double>> contributions;  ///< (threat id, contribution)
};

/// Ranks every catalog domain by sum over threats of normalize(T_w) * (alpha + impact),
/// descending, ties broken by domain id.
inline std::vector<DomainPriority> domain_priorities(std::span<const ThreatImpact> threats, const Catalog& c,
                                                     double alpha = 1.0) {
    if (!(alpha >= 0.0)) throw Error(Errc::InvalidConfig, "alpha must be >= 0");
    std::vector<DomainPriority> out;
    out.reserve(c.domains.size());
    for (const auto& d : c.domains) {
        DomainPriority dp{d.id, 0.0, {}};
        for (const auto& t : threats) {
            const double tw = normalize(threat_domain_weight(t.threat_id, d.id, c)).value();
            const double contribution = tw * (alpha + t.impacts.value.value());
            if (contribution > 0.0) {
                dp.contributions.emplace_back(t.threat_id, contribution);
                dp.score += contribution;
            }
        }
        out.push_back(std::move(dp));
    }
    std::sort(out.begin(), out.end(), [](const DomainPriority& a, const DomainPriority& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.domain_id < b.domain_id;
    });
    return out;
}

} // namespace qber
