#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "qber/core.hpp"
#include "qber/json_io.hpp"
#include "qber/simulation.hpp"

namespace qber {

/// Everything besides profile and catalog that determines a report. Echoed
/// in every report so results can be reproduced.
struct EngineConfig {
    double alpha = 1.0;
    RatingMapping rating_mapping;
    double cost_rate = 1.0;
    double amortization_years = 3.0;
    std::uint64_t seed = 0;
    bool use_exposure_in_rs = false;
    MaturityLevel candidate_maturity = MaturityLevel::Initial;
    std::optional<Money> budget;  ///< absent: every positive-Z-ROSI candidate is affordable
    std::optional<SimulationConfig> simulation;

    void validate() const {
        if (!(alpha >= 0.0)) throw Error(Errc::InvalidConfig, "alpha must be >= 0");
        rating_mapping.validate();
        if (!(cost_rate > 0.0)) throw Error(Errc::InvalidConfig, "cost_rate must be > 0");
        if (!(amortization_years > 0.0)) throw Error(Errc::InvalidConfig, "amortization_years must be > 0");
        if (simulation) simulation->validate();
    }
};

inline nlohmann::json to_json(const SimulationConfig& s) {
    return {{"iterations", s.iterations},
            {"seed", s.seed},
            {"confidence_levels", s.confidence_levels},
            {"impact_spread", s.impact_spread}};
}

/// Missing keys keep defaults; "seed" falls back to `default_seed`.
inline SimulationConfig simulation_config_from_json(const nlohmann::json& j, std::uint64_t default_seed = 0) {
    const detail::Reader r(j, "");
    if (!j.is_object()) r.fail("expected simulation config object");
    SimulationConfig s;
    s.seed = default_seed;
    try {
        if (auto v = r.opt("iterations")) {
            if (!v->raw().is_number_unsigned()) v->fail("expected positive integer");
            s.iterations = v->raw().get<std::uint64_t>();
        }
        if (auto v = r.opt("seed")) {
            if (!v->raw().is_number_unsigned()) v->fail("expected unsigned integer");
            s.seed = v->raw().get<std::uint64_t>();
        }
        if (auto v = r.opt("confidence_levels")) {
            s.confidence_levels.clear();
            for (std::size_t i = 0; i < v->size(); ++i) s.confidence_levels.push_back((*v)[i].number());
        }
        if (auto v = r.opt("impact_spread")) s.impact_spread = v->number();
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.message(), e.details());
    }
    s.validate();
    return s;
}

inline nlohmann::json to_json(const EngineConfig& c) {
    nlohmann::json j = {{"alpha", c.alpha},
                        {"rating_mapping",
                         {{"low", c.rating_mapping.low},
                          {"medium", c.rating_mapping.medium},
                          {"high", c.rating_mapping.high}}},
                        {"cost_rate", c.cost_rate},
                        {"amortization_years", c.amortization_years},
                        {"seed", c.seed},
                        {"use_exposure_in_rs", c.use_exposure_in_rs},
                        {"candidate_maturity", to_string(c.candidate_maturity)},
                        {"budget", nullptr},
                        {"simulation", nullptr}};
    if (c.budget) j["budget"] = detail::money_json(*c.budget);
    if (c.simulation) j["simulation"] = to_json(*c.simulation);
    return j;
}

/// Missing keys keep defaults. Any problem is reported as InvalidConfig.
inline EngineConfig engine_config_from_json(const nlohmann::json& j) {
    EngineConfig c;
    if (j.is_null()) return c;
    const detail::Reader r(j, "");
    try {
        if (!j.is_object()) r.fail("expected config object");
        if (auto v = r.opt("alpha")) c.alpha = v->number();
        if (auto v = r.opt("rating_mapping")) {
            if (auto x = v->opt("low")) c.rating_mapping.low = x->number();
            if (auto x = v->opt("medium")) c.rating_mapping.medium = x->number();
            if (auto x = v->opt("high")) c.rating_mapping.high = x->number();
        }
        if (auto v = r.opt("cost_rate")) c.cost_rate = v->number();
        if (auto v = r.opt("amortization_years")) c.amortization_years = v->number();
        if (auto v = r.opt("seed")) {
            if (!v->raw().is_number_unsigned()) v->fail("expected unsigned integer");
            c.seed = v->raw().get<std::uint64_t>();
        }
        if (auto v = r.opt("use_exposure_in_rs")) c.use_exposure_in_rs = v->boolean();
        if (auto v = r.opt("candidate_maturity")) c.candidate_maturity = v->maturity();
        if (auto v = r.opt("budget")) c.budget = v->money();
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.message(), e.details());
    }
    if (j.contains("simulation") && !j["simulation"].is_null()) {
        c.simulation = simulation_config_from_json(j["simulation"], c.seed);
    }
    c.validate();
    return c;
}

} // namespace qber
