#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "qber/catalog.hpp"
#include "qber/core.hpp"
#include "qber/json_io.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return QBER_TEST_SOURCE_DIR; }

inline qber::Catalog shipped_catalog() { return qber::load_catalog_path(source_dir() / "data" / "catalog"); }

inline qber::Catalog worked_catalog() {
    return qber::load_catalog_path(source_dir() / "tests" / "data" / "worked_catalog.json");
}

inline qber::BusinessProfile worked_profile() {
    return qber::load_profile_file(source_dir() / "tests" / "data" / "worked_profile.json");
}

inline qber::BusinessProfile example_profile() {
    return qber::load_profile_file(source_dir() / "data" / "examples" / "profile.json");
}

/// Random profiles that always pass validation against `catalog`.
class ProfileGenerator {
public:
    ProfileGenerator(const qber::Catalog& catalog, std::uint64_t seed) : catalog_(catalog), rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    qber::Rating rating() { return qber::kAllRatings[index(3)]; }
    qber::MaturityLevel maturity() { return qber::kAllMaturityLevels[index(6)]; }

    /// Splits `total` into `n` non-negative shares summing to at most total.
    std::vector<double> shares(std::size_t n, double total) {
        std::vector<double> w(n);
        double s = 0.0;
        for (auto& x : w) s += (x = uniform(0.0, 1.0));
        for (auto& x : w) x = std::min(1.0, x / s * total * 0.999);
        return w;
    }

    qber::BusinessProfile profile() {
        qber::BusinessProfile p;
        p.name = "Generated";
        p.sector = "BFSI";
        p.country = "India";
        p.yearly_revenue = qber::Money(uniform(1e5, 5e9), "USD");
        p.employee_count = static_cast<std::int64_t>(index(5000));
        const std::size_t units = 1 + index(3);
        const auto unit_shares = shares(units, uniform(0.1, 1.0));
        for (std::size_t u = 0; u < units; ++u) {
            qber::BusinessUnit unit;
            unit.name = "unit-" + std::to_string(u);
            unit.revenue_share = qber::UnitFraction(unit_shares[u]);
            const std::size_t segs = 1 + index(3);
            const auto seg_shares = shares(segs, uniform(0.1, 1.0));
            for (std::size_t s = 0; s < segs; ++s) {
                qber::Segment seg;
                seg.name = "seg-" + std::to_string(s);
                seg.revenue_share = qber::UnitFraction(seg_shares[s]);
                for (const auto& ctl : catalog_.controls) {
                    if (uniform(0, 1) < 0.3) seg.implemented_controls.push_back({ctl.id, maturity()});
                }
                for (const auto& t : catalog_.threats) {
                    if (uniform(0, 1) < 0.5) {
                        seg.threat_exposures.push_back({t.id, qber::Weight(uniform(0.0, 10.0)), rating(), rating()});
                    }
                }
                unit.segments.push_back(std::move(seg));
            }
            p.units.push_back(std::move(unit));
        }
        return p;
    }

private:
    const qber::Catalog& catalog_;
    std::mt19937_64 rng_;
};

} // namespace fixtures
