#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qber/service/assessment.hpp"
#include "qber/service/whatif.hpp"

using namespace qber;

namespace {

const SegmentRef kSales{"Commerce", "Sales Platform"};

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::Internal;
}

} // namespace

TEST(Assess, WorkedTrace) {
    const auto c = fixtures::worked_catalog();
    const auto r = assess(fixtures::worked_profile(), c);
    ASSERT_EQ(r.segments.size(), 1u);
    const auto& sa = r.segments[0].assessment;
    EXPECT_NEAR(sa.seg_revenue.amount(), 6'000'000.0, 1e-9 * 6e6);
    EXPECT_NEAR(sa.threats[0].seg_impact.amount(), 3'840'000.0, 1e-9 * 3.84e6);
    EXPECT_NEAR(sa.threats[0].seg_risk.amount(), 1'228'800.0, 1e-9 * 1.2288e6);
    EXPECT_NEAR(sa.exposure.value(), 0.3, 1e-9);
    EXPECT_NEAR(sa.ale.amount(), 1'152'000.0, 1e-9 * 1.152e6);
    ASSERT_EQ(r.candidates.size(), 1u);
    EXPECT_NEAR(r.candidates[0].z_rosi, 4.5296, 1e-9);
    ASSERT_EQ(r.recommendation.chosen.size(), 1u);
    EXPECT_EQ(r.recommendation.chosen[0].control_id, "C-CAND");
    EXPECT_NEAR(r.total_ale.amount(), 1'152'000.0, 1e-3);
    EXPECT_NEAR(r.rs_economic.value.value(), oracle::rs_economic({0.7, 0.5, 0.6}, 0.9, 0.6, 0.6), 1e-12);
    EXPECT_EQ(r.domain_priorities.front().domain_id, "D-PEOPLE");
    EXPECT_TRUE(chain_bound_violations(r).empty());
    EXPECT_EQ(r.id.rfind("rpt-", 0), 0u);
}

TEST(Assess, ZeroThreatSegmentHasNoLoss) {
    auto p = fixtures::worked_profile();
    p.units[0].segments[0].threat_exposures.clear();
    const auto r = assess(p, fixtures::worked_catalog());
    EXPECT_EQ(r.total_ale.amount(), 0.0);
    EXPECT_EQ(r.total_seg_risk.amount(), 0.0);
    EXPECT_EQ(r.total_ale.currency(), "USD");
    EXPECT_TRUE(r.candidates.empty());
}

TEST(Assess, InvalidProfileListsViolations) {
    auto p = fixtures::worked_profile();
    p.units[0].segments[0].threat_exposures.push_back({"T-UNKNOWN", Weight(1), Rating::Low, Rating::Low});
    try {
        assess(p, fixtures::worked_catalog());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ValidationFailed);
        ASSERT_EQ(e.details().size(), 1u);
        EXPECT_EQ(e.details()[0].rfind("UNKNOWN_THREAT", 0), 0u);
    }
}

TEST(Assess, BudgetInOtherCurrency) {
    EngineConfig cfg;
    cfg.budget = Money(1000, "EUR");
    EXPECT_EQ(code_of([&] { assess(fixtures::worked_profile(), fixtures::worked_catalog(), cfg); }),
              Errc::CurrencyMismatch);
}

TEST(Assess, BudgetBelowCandidateCostChoosesNothing) {
    EngineConfig cfg;
    cfg.budget = Money(99'999, "USD");
    const auto r = assess(fixtures::worked_profile(), fixtures::worked_catalog(), cfg);
    EXPECT_TRUE(r.recommendation.chosen.empty());
    EXPECT_NEAR(r.recommendation.residual_risk_estimate.amount(), r.total_ale.amount(), 1e-6);
}

TEST(Assess, DeterministicBody) {
    const auto c = fixtures::shipped_catalog();
    const auto p = fixtures::example_profile();
    const auto a = to_json(assess(p, c));
    const auto b = to_json(assess(p, c));
    EXPECT_NE(a["id"], b["id"]);
    EXPECT_EQ(report_body(a).dump(), report_body(b).dump());
}

TEST(Assess, ChainBoundsOnRandomProfiles) {
    const auto c = fixtures::shipped_catalog();
    fixtures::ProfileGenerator gen(c, 77);
    for (int i = 0; i < 300; ++i) {
        const auto r = assess(gen.profile(), c);
        for (const auto& v : chain_bound_violations(r)) ADD_FAILURE() << v;
        EXPECT_LE(r.recommendation.residual_risk_estimate.amount(), r.total_ale.amount() + 1e-6);
    }
}

TEST(Assess, ReportJsonRoundTripsInputs) {
    const auto c = fixtures::shipped_catalog();
    EngineConfig cfg;
    cfg.alpha = 0.5;
    cfg.seed = 17;
    cfg.budget = Money(50'000, "USD");
    const auto r = assess(fixtures::example_profile(), c, cfg);
    const auto in = report_inputs_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(in.id, r.id);
    EXPECT_EQ(in.profile, r.profile);
    EXPECT_EQ(in.catalog_version, catalog_version(c));
    EXPECT_EQ(to_json(in.config), to_json(cfg));
}

TEST(ReportCsv, OneRowPerThreat) {
    const auto r = assess(fixtures::worked_profile(), fixtures::worked_catalog());
    std::ostringstream out;
    write_report_csv(out, r);
    std::istringstream in(out.str());
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_EQ(header, "unit,segment,threat_id,seg_revenue,impact,risk_w,seg_impact,seg_risk,exposure,ale,currency");
    EXPECT_EQ(row.rfind("Commerce,Sales Platform,T-PHISH,", 0), 0u);
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
}

TEST(ReportCsv, QuotesAwkwardNames) {
    auto p = fixtures::worked_profile();
    p.units[0].name = "R&D, \"Labs\"";
    const auto r = assess(p, fixtures::worked_catalog());
    std::ostringstream out;
    write_report_csv(out, r);
    EXPECT_NE(out.str().find("\"R&D, \"\"Labs\"\"\""), std::string::npos);
}

TEST(WhatIf, MaturityUpgradeScalesAle) {
    const auto c = fixtures::worked_catalog();
    auto p = fixtures::worked_profile();
    p.units[0].segments[0].implemented_controls = {{"C-CONF", MaturityLevel::Initial}};
    const auto base = assess(p, c);
    const WhatIfDelta delta{{change::SetMaturity{kSales, "C-CONF", MaturityLevel::Optimized}}};
    const auto after = whatif(base, delta, c);

    // C-CONF only covers confidentiality, at 0.75 * (1.25 - multiplier).
    const double before_exposure = oracle::exposure(0.75 * (1.25 - 0.65), 0, 0);
    const double after_exposure = oracle::exposure(0.75 * (1.25 - 0.25), 0, 0);
    EXPECT_NEAR(base.total_ale.amount(), oracle::ale(before_exposure, 3.84e6), 1e-6);
    EXPECT_NEAR(after.total_ale.amount(), oracle::ale(after_exposure, 3.84e6), 1e-6);
    EXPECT_NEAR(after.total_ale.amount() / base.total_ale.amount(), after_exposure / before_exposure, 1e-12);
    EXPECT_EQ(after.base_report_id, base.id);
}

TEST(WhatIf, EmptyDeltaReproducesBase) {
    const auto c = fixtures::shipped_catalog();
    const auto base = assess(fixtures::example_profile(), c);
    const auto again = whatif(base, {}, c);
    EXPECT_EQ(report_body(to_json(again)).dump(), report_body(to_json(base)).dump());
}

TEST(WhatIf, UnknownEntities) {
    const auto c = fixtures::worked_catalog();
    const auto base = assess(fixtures::worked_profile(), c);
    const std::vector<Change> bad{
        change::SetMaturity{kSales, "C-CAND", MaturityLevel::Managed},
        change::RemoveControl{{"Commerce", "Nope"}, "C-BASE"},
        change::AddControl{kSales, "C-NOPE", MaturityLevel::Initial, {}},
        change::SetThreatRating{kSales, "T-DDOS", Rating::High, {}, {}},
    };
    for (const auto& ch : bad) EXPECT_EQ(code_of([&] { whatif(base, WhatIfDelta{{ch}}, c); }), Errc::UnknownEntity);
}

TEST(WhatIf, StaleCatalog) {
    const auto c = fixtures::worked_catalog();
    const auto base = assess(fixtures::worked_profile(), c);
    auto changed = c;
    changed.controls[0].opex_annual = Money(1.0, "USD");
    EXPECT_EQ(code_of([&] { whatif(base, {}, changed); }), Errc::StaleCatalog);
}

TEST(WhatIf, BudgetChangeRerunsRecommendation) {
    const auto c = fixtures::worked_catalog();
    const auto base = assess(fixtures::worked_profile(), c);
    const auto after = whatif(base, WhatIfDelta{{change::SetBudget{Money(10, "USD")}}}, c);
    EXPECT_EQ(base.recommendation.chosen.size(), 1u);
    EXPECT_TRUE(after.recommendation.chosen.empty());
}

TEST(WhatIf, InverseRestoresInputsExactly) {
    const auto c = fixtures::shipped_catalog();
    fixtures::ProfileGenerator gen(c, 44);
    for (int i = 0; i < 200; ++i) {
        const auto p = gen.profile();
        EngineConfig cfg;
        if (i % 2) cfg.budget = Money(gen.uniform(0, 1e6), "USD");
        WhatIfDelta delta;
        for (int k = 0; k < 4; ++k) {
            const auto& unit = p.units[gen.index(p.units.size())];
            const auto& seg = unit.segments[gen.index(unit.segments.size())];
            const SegmentRef ref{unit.name, seg.name};
            switch (gen.index(4)) {
            case 0:
                if (!seg.implemented_controls.empty())
                    delta.changes.emplace_back(change::SetMaturity{
                        ref, seg.implemented_controls[gen.index(seg.implemented_controls.size())].control_id,
                        gen.maturity()});
                break;
            case 1:
                if (!seg.implemented_controls.empty())
                    delta.changes.emplace_back(change::RemoveControl{ref, seg.implemented_controls[0].control_id});
                break;
            case 2: delta.changes.emplace_back(change::SetBudget{Money(gen.uniform(0, 5e5), "USD")}); break;
            default:
                if (!seg.threat_exposures.empty())
                    delta.changes.emplace_back(change::SetThreatRating{
                        ref, seg.threat_exposures[0].threat_id, gen.rating(), std::nullopt, Weight(gen.uniform(0, 10))});
            }
        }
        AppliedDelta applied;
        try {
            applied = apply_delta(p, cfg, delta, c);
        } catch (const Error& e) {
            // A removal earlier in the delta can orphan a later change on the same control.
            EXPECT_EQ(e.code(), Errc::UnknownEntity);
            continue;
        }
        const auto restored = apply_delta(applied.profile, applied.config, applied.inverse, c);
        EXPECT_EQ(restored.profile, p);
        EXPECT_EQ(to_json(restored.config), to_json(cfg));
        // Inverse of the inverse re-applies the delta.
        const auto again = apply_delta(restored.profile, restored.config, restored.inverse, c);
        EXPECT_EQ(again.profile, applied.profile);
    }
}

TEST(WhatIf, DeltaJsonRoundTrip) {
    const WhatIfDelta delta{{
        change::AddControl{kSales, "C-CAND", MaturityLevel::Defined, 0},
        change::RemoveControl{kSales, "C-BASE"},
        change::SetMaturity{kSales, "C-CONF", MaturityLevel::Managed},
        change::SetBudget{Money(150'000, "USD")},
        change::SetBudget{std::nullopt},
        change::SetThreatRating{kSales, "T-PHISH", Rating::Low, Rating::Medium, Weight(3)},
    }};
    EXPECT_EQ(whatif_delta_from_json(nlohmann::json::parse(to_json(delta).dump())), delta);
    const auto bad = nlohmann::json::parse(R"({"changes":[{"op":"explode"}]})");
    EXPECT_EQ(code_of([&] { whatif_delta_from_json(bad); }), Errc::Malformed);
}

TEST(EngineConfig, JsonRoundTripAndValidation) {
    EngineConfig cfg;
    cfg.alpha = 2.5;
    cfg.candidate_maturity = MaturityLevel::Defined;
    cfg.simulation = SimulationConfig{};
    cfg.simulation->iterations = 500;
    const auto again = engine_config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
    EXPECT_EQ(to_json(again), to_json(cfg));
    EXPECT_EQ(code_of([] { engine_config_from_json({{"alpha", -1}}); }), Errc::InvalidConfig);
    EXPECT_EQ(code_of([] { engine_config_from_json({{"cost_rate", 0}}); }), Errc::InvalidConfig);
    EXPECT_NO_THROW(engine_config_from_json(nullptr));
}
