#pragma once
/**
 * @file  simulation.hpp
 * @brief Monte Carlo annual-loss distribution and Cyber-VaR / CVaR.
 *
 * Each (iteration, segment, threat) cell draws from its own Philox counter
 * (iteration, segment index, threat index) under the run seed, so the sample
 * does not depend on thread count or evaluation order.
 *
 * Per cell: the threat occurs when u0 < risk_w; on occurrence the impact
 * fraction is drawn from a symmetric triangular distribution centred on the
 * deterministic impact with half-width spread * impact, truncated to [0,1]
 * by inverse-CDF sampling of the truncated law. Iteration loss is the sum of
 * seg_revenue * fraction over occurring cells.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qber/catalog.hpp"
#include "qber/core.hpp"
#include "qber/cost_engine.hpp"
#include "qber/rng.hpp"

namespace qber {

struct SimulationConfig {
    std::uint64_t iterations = 10'000;
    std::uint64_t seed = 0;
    std::vector<double> confidence_levels{0.95, 0.99};
    double impact_spread = 0.25;
    unsigned threads = 1;

    void validate() const {
        if (iterations < 1) throw Error(Errc::InvalidConfig, "iterations must be >= 1");
        if (!(impact_spread >= 0.0 && impact_spread < 1.0)) {
            throw Error(Errc::InvalidConfig, "impact_spread must be in [0,1)");
        }
        for (std::size_t i = 0; i < confidence_levels.size(); ++i) {
            const double c = confidence_levels[i];
            if (!(c > 0.0 && c < 1.0)) throw Error(Errc::InvalidConfig, "confidence levels must lie in (0,1)");
            if (i > 0 && !(c > confidence_levels[i - 1])) {
                throw Error(Errc::InvalidConfig, "confidence levels must be strictly ascending");
            }
        }
        if (threads < 1) throw Error(Errc::InvalidConfig, "threads must be >= 1");
    }
};

struct SegmentLossMean {
    SegmentRef segment;
    double mean = 0.0;
};

/// Sorted annual-loss sample plus per-segment attribution.
struct LossDistribution {
    std::vector<double> sample;  ///< ascending, one value per iteration
    std::string currency = "USD";
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;
    std::vector<SegmentLossMean> segment_means;

    double mean() const {
        double sum = 0.0;
        for (double v : sample) sum += v;
        return sample.empty() ? 0.0 : sum / static_cast<double>(sample.size());
    }
};

namespace detail {

/// Truncated symmetric triangular quantile: centre c, half-width h, support cut at 1.
inline double triangular_truncated(double u, double c, double h) {
    if (h <= 0.0) return c;
    const double lo = c - h, hi = c + h;
    auto cdf = [&](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        if (x <= c) return (x - lo) * (x - lo) / (2.0 * h * h);
        return 1.0 - (hi - x) * (hi - x) / (2.0 * h * h);
    };
    const double v = u * (hi > 1.0 ? cdf(1.0) : 1.0);
    const double x = v < 0.5 ? lo + h * std::sqrt(2.0 * v) : hi - h * std::sqrt(2.0 * (1.0 - v));
    return std::clamp(x, 0.0, 1.0);
}

struct Cell {
    double seg_revenue;
    double impact;
    double risk_w;
    std::uint32_t segment;
    std::uint32_t threat;
};

} // namespace detail

inline LossDistribution simulate_losses(const BusinessProfile& p, const Catalog& c, const SimulationConfig& cfg,
                                        const RatingMapping& mapping = {}) {
    cfg.validate();

    std::vector<detail::Cell> cells;
    LossDistribution dist;
    dist.currency = p.yearly_revenue.currency();
    dist.iterations = cfg.iterations;
    dist.seed = cfg.seed;
    std::uint32_t seg_index = 0;
    for (const auto& unit : p.units) {
        for (const auto& seg : unit.segments) {
            const SegmentRef ref{unit.name, seg.name};
            const auto sa = assess_segment(p, ref, c, mapping);
            for (std::uint32_t t = 0; t < sa.threats.size(); ++t) {
                cells.push_back({sa.seg_revenue.amount(), sa.threats[t].impacts.value.value(),
                                 sa.threats[t].risk_w.value(), seg_index, t});
            }
            dist.segment_means.push_back({ref, 0.0});
            ++seg_index;
        }
    }

    const std::size_t n = cfg.iterations;
    const std::size_t nseg = dist.segment_means.size();
    std::vector<double> losses(n, 0.0);
    std::vector<double> per_segment(n * nseg, 0.0);
    const rng::Philox4x32 gen(cfg.seed);

    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double total = 0.0;
            for (const auto& cell : cells) {
                const auto w = gen({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32), cell.segment,
                                    cell.threat});
                if (!(rng::to_unit(w[0], w[1]) < cell.risk_w)) continue;
                const double fraction =
                    detail::triangular_truncated(rng::to_unit(w[2], w[3]), cell.impact, cfg.impact_spread * cell.impact);
                const double loss = cell.seg_revenue * fraction;
                total += loss;
                per_segment[i * nseg + cell.segment] += loss;
            }
            losses[i] = total;
        }
    };

    const std::size_t workers = std::min<std::size_t>(cfg.threads, n);
    if (workers <= 1) {
        run(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
            if (begin < end) pool.emplace_back(run, begin, end);
        }
    }

    for (std::size_t s = 0; s < nseg; ++s) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += per_segment[i * nseg + s];
        dist.segment_means[s].mean = sum / static_cast<double>(n);
    }
    std::sort(losses.begin(), losses.end());
    dist.sample = std::move(losses);
    return dist;
}

/// Zero-based nearest-rank index ceil(confidence * n) - 1, robust to
/// representation noise in confidence * n (0.07 * 100 is not above 7).
inline std::size_t nearest_rank_index(std::size_t n, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error(Errc::OutOfRange, "confidence must lie in (0,1)");
    }
    if (n == 0) throw Error(Errc::OutOfRange, "empty sample");
    const double r = confidence * static_cast<double>(n);
    double k = std::ceil(r);
    if (k - r > 1.0 - 1e-12 * std::max(1.0, r)) k -= 1.0;
    const auto rank = static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(n)));
    return rank - 1;
}

inline Money value_at_risk(const LossDistribution& d, double confidence) {
    return Money(d.sample[nearest_rank_index(d.sample.size(), confidence)], d.currency);
}

/// Mean of the sorted sample from the VaR rank upward.
inline Money cvar(const LossDistribution& d, double confidence) {
    const std::size_t k = nearest_rank_index(d.sample.size(), confidence);
    double sum = 0.0;
    for (std::size_t i = k; i < d.sample.size(); ++i) sum += d.sample[i];
    const double tail = sum / static_cast<double>(d.sample.size() - k);
    // The tail mean cannot fall below its first element; guard summation rounding.
    return Money(std::max(tail, d.sample[k]), d.currency);
}

inline nlohmann::json simulation_summary(const LossDistribution& d, std::span<const double> confidence_levels) {
    nlohmann::json var = nlohmann::json::array();
    nlohmann::json tail = nlohmann::json::array();
    for (double conf : confidence_levels) {
        var.push_back({{"confidence", conf}, {"value", value_at_risk(d, conf).amount()}});
        tail.push_back({{"confidence", conf}, {"value", cvar(d, conf).amount()}});
    }
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : d.segment_means) {
        segs.push_back({{"unit", s.segment.unit}, {"segment", s.segment.segment}, {"mean", s.mean}});
    }
    return {{"iterations", d.iterations}, {"seed", d.seed},  {"currency", d.currency}, {"mean", d.mean()},
            {"var", std::move(var)},      {"cvar", std::move(tail)}, {"segment_means", std::move(segs)}};
}

/// One loss per line, shortest round-trip decimal form.
inline void write_losses_csv(std::ostream& out, const LossDistribution& d) {
    char buf[64];
    for (double v : d.sample) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, end - buf);
        out.put('\n');
    }
}

} // namespace qber
