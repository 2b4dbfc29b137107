#pragma once
/**
 * @file  core.hpp
 * @brief Rating scales, money and the business profile value types.
 *
 * Every weight entered by an analyst lives on a 0..10 scale (Weight). All
 * equation arithmetic runs on the normalized 0..1 form (UnitFraction), so
 * products of weights stay inside [0,1] and monetary outputs never exceed
 * the revenue they scale.
 *
 * All types here are immutable values once constructed; range checks happen
 * in the constructors and throw Error{OutOfRange}.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qber/error.hpp"

namespace qber {

namespace detail {

inline double checked_range(double v, double lo, double hi, std::string_view what) {
    if (!(v >= lo && v <= hi)) {  // also rejects NaN
        throw Error(Errc::OutOfRange,
                    std::string(what) + " " + std::to_string(v) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

} // namespace detail

/// Analyst-facing weight on the 0..10 scale.
class Weight {
public:
    constexpr Weight() = default;
    explicit Weight(double value) : value_(detail::checked_range(value, 0.0, 10.0, "weight")) {}

    constexpr double value() const noexcept { return value_; }
    friend constexpr auto operator<=>(const Weight&, const Weight&) = default;

private:
    double value_ = 0.0;
};

/// Normalized weight, efficacy, exposure or factor in [0,1].
class UnitFraction {
public:
    constexpr UnitFraction() = default;
    explicit UnitFraction(double value) : value_(detail::checked_range(value, 0.0, 1.0, "fraction")) {}

    /// Clamps instead of throwing; used where a formula may overshoot by rounding
    /// or by an edited catalog table.
    static UnitFraction clamped(double value) {
        if (std::isnan(value)) throw Error(Errc::OutOfRange, "fraction is NaN");
        return UnitFraction(value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value));
    }

    constexpr double value() const noexcept { return value_; }
    friend constexpr auto operator<=>(const UnitFraction&, const UnitFraction&) = default;

private:
    double value_ = 0.0;
};

enum class Rating { Low, Medium, High };

inline constexpr std::array<Rating, 3> kAllRatings{Rating::Low, Rating::Medium, Rating::High};

/// Numeric anchors for the three qualitative levels on the 0..10 scale.
struct RatingMapping {
    double low = 2.5;
    double medium = 5.0;
    double high = 8.0;

    /// Throws InvalidConfig unless 0 <= low < medium < high <= 10.
    void validate() const {
        if (!(low >= 0.0 && low < medium && medium < high && high <= 10.0)) {
            throw Error(Errc::InvalidConfig, "rating mapping must satisfy 0 <= low < medium < high <= 10");
        }
    }

    friend bool operator==(const RatingMapping&, const RatingMapping&) = default;
};

inline Weight rating_to_weight(Rating rating, const RatingMapping& mapping = {}) {
    switch (rating) {
    case Rating::Low: return Weight(mapping.low);
    case Rating::Medium: return Weight(mapping.medium);
    case Rating::High: return Weight(mapping.high);
    }
    return Weight(mapping.low);
}

inline UnitFraction normalize(Weight w) { return UnitFraction::clamped(w.value() / 10.0); }

enum class MaturityLevel { NotImplemented, Initial, Repeatable, Defined, Managed, Optimized };

inline constexpr std::array<MaturityLevel, 6> kAllMaturityLevels{
    MaturityLevel::NotImplemented, MaturityLevel::Initial, MaturityLevel::Repeatable,
    MaturityLevel::Defined,        MaturityLevel::Managed, MaturityLevel::Optimized};

constexpr std::size_t index_of(MaturityLevel m) noexcept { return static_cast<std::size_t>(m); }

constexpr std::string_view to_string(MaturityLevel m) noexcept {
    switch (m) {
    case MaturityLevel::NotImplemented: return "not_implemented";
    case MaturityLevel::Initial: return "initial";
    case MaturityLevel::Repeatable: return "repeatable";
    case MaturityLevel::Defined: return "defined";
    case MaturityLevel::Managed: return "managed";
    case MaturityLevel::Optimized: return "optimized";
    }
    return "not_implemented";
}

constexpr std::string_view to_string(Rating r) noexcept {
    switch (r) {
    case Rating::Low: return "low";
    case Rating::Medium: return "medium";
    case Rating::High: return "high";
    }
    return "low";
}

inline MaturityLevel parse_maturity(std::string_view s) {
    for (auto m : kAllMaturityLevels) {
        if (to_string(m) == s) return m;
    }
    throw Error(Errc::Malformed, "unknown maturity level '" + std::string(s) + "'");
}

inline Rating parse_rating(std::string_view s) {
    for (auto r : kAllRatings) {
        if (to_string(r) == s) return r;
    }
    throw Error(Errc::Malformed, "unknown rating '" + std::string(s) + "'");
}

/// Non-negative amount in one ISO-4217 currency. Arithmetic across
/// currencies throws CurrencyMismatch; there is no FX conversion.
class Money {
public:
    Money() = default;
    Money(double amount, std::string currency) : amount_(amount), currency_(std::move(currency)) {
        if (!(amount_ >= 0.0) || !std::isfinite(amount_)) {
            throw Error(Errc::OutOfRange, "money amount must be finite and non-negative");
        }
        if (currency_.size() != 3) {
            throw Error(Errc::Malformed, "currency must be a 3-letter ISO-4217 code, got '" + currency_ + "'");
        }
    }

    double amount() const noexcept { return amount_; }
    const std::string& currency() const noexcept { return currency_; }

    void require_same_currency(const Money& other) const {
        if (currency_ != other.currency_) {
            throw Error(Errc::CurrencyMismatch, currency_ + " vs " + other.currency_);
        }
    }

    friend Money operator+(const Money& a, const Money& b) {
        a.require_same_currency(b);
        return Money(a.amount_ + b.amount_, a.currency_);
    }
    Money& operator+=(const Money& other) { return *this = *this + other; }

    /// Scales by a non-negative factor (fraction, ratio, rescaling constant).
    Money scaled(double factor) const { return Money(amount_ * factor, currency_); }

    friend bool operator==(const Money&, const Money&) = default;

private:
    double amount_ = 0.0;
    std::string currency_ = "USD";
};

struct CiaPosture {
    UnitFraction confidentiality;
    UnitFraction integrity;
    UnitFraction availability;

    double mean() const noexcept {
        return (confidentiality.value() + integrity.value() + availability.value()) / 3.0;
    }

    friend bool operator==(const CiaPosture&, const CiaPosture&) = default;
};

struct ControlImplementation {
    std::string control_id;
    MaturityLevel maturity = MaturityLevel::NotImplemented;

    friend bool operator==(const ControlImplementation&, const ControlImplementation&) = default;
};

/// Risk_w is kept per (threat, segment).
struct ThreatExposure {
    std::string threat_id;
    Weight risk_w;
    Rating operational = Rating::Low;
    Rating financial = Rating::Low;

    friend bool operator==(const ThreatExposure&, const ThreatExposure&) = default;
};

struct Segment {
    std::string name;
    UnitFraction revenue_share;  ///< fraction of the unit's revenue
    std::vector<ControlImplementation> implemented_controls;
    std::vector<ThreatExposure> threat_exposures;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct BusinessUnit {
    std::string name;
    UnitFraction revenue_share;  ///< fraction of company revenue
    std::vector<Segment> segments;
    std::vector<std::string> regulations;

    friend bool operator==(const BusinessUnit&, const BusinessUnit&) = default;
};

inline constexpr std::string_view kProfileSchemaVersion = "1.0.0";

struct BusinessProfile {
    std::string schema_version{kProfileSchemaVersion};
    std::string name;
    std::string sector;
    std::string country;
    Money yearly_revenue;
    std::int64_t employee_count = 0;
    std::vector<BusinessUnit> units;
    /// Reserved extension for publicly listed companies; carried verbatim.
    std::optional<nlohmann::json> listed_company;

    friend bool operator==(const BusinessProfile&, const BusinessProfile&) = default;
};

/// Addresses one segment inside a profile.
struct SegmentRef {
    std::string unit;
    std::string segment;

    friend auto operator<=>(const SegmentRef&, const SegmentRef&) = default;
};

inline const BusinessUnit* find_unit(const BusinessProfile& p, std::string_view name) {
    for (const auto& u : p.units) {
        if (u.name == name) return &u;
    }
    return nullptr;
}

inline const Segment* find_segment(const BusinessProfile& p, const SegmentRef& ref) {
    const auto* unit = find_unit(p, ref.unit);
    if (!unit) return nullptr;
    for (const auto& s : unit->segments) {
        if (s.name == ref.segment) return &s;
    }
    return nullptr;
}

inline Segment* find_segment(BusinessProfile& p, const SegmentRef& ref) {
    return const_cast<Segment*>(find_segment(static_cast<const BusinessProfile&>(p), ref));
}

/// Revenue size band used to key external factor rows.
/// small: < 5M, medium: 5M..<100M, large: >= 100M (amount, any currency).
inline std::string size_band(const Money& revenue) {
    const double a = revenue.amount();
    if (a < 5'000'000.0) return "small";
    if (a < 100'000'000.0) return "medium";
    return "large";
}

} // namespace qber
