#pragma once
/**
 * @file  json_io.hpp
 * @brief Versioned JSON documents for BusinessProfile and Catalog.
 *
 * Field names are snake_case and match the C++ members. Weights are numbers
 * on 0..10, fractions numbers on 0..1, money is {"amount", "currency"}.
 * Enumerations are lower snake_case strings ("high", "not_implemented").
 *
 * Any structural problem raises Error{Malformed} whose details carry the
 * JSON pointer of the offending value (or the byte offset for syntax errors).
 */

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <istream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qber/catalog.hpp"
#include "qber/core.hpp"

namespace qber {

using nlohmann::json;

namespace detail {

/// Cursor over a parsed document that remembers its JSON pointer.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(Errc::Malformed, (path_.empty() ? "/" : path_) + ": " + msg, {path_.empty() ? "/" : path_});
    }

    const json& raw() const { return *node_; }
    const std::string& path() const { return path_; }

    Reader at(std::string_view key) const {
        if (!node_->is_object()) fail("expected object");
        auto it = node_->find(key);
        if (it == node_->end()) fail("missing key '" + std::string(key) + "'");
        return {*it, path_ + "/" + std::string(key)};
    }

    std::optional<Reader> opt(std::string_view key) const {
        if (!node_->is_object()) fail("expected object");
        auto it = node_->find(key);
        if (it == node_->end() || it->is_null()) return std::nullopt;
        return Reader{*it, path_ + "/" + std::string(key)};
    }

    std::size_t size() const {
        if (!node_->is_array()) fail("expected array");
        return node_->size();
    }

    Reader operator[](std::size_t i) const { return {(*node_)[i], path_ + "/" + std::to_string(i)}; }

    std::string str() const {
        if (!node_->is_string()) fail("expected string");
        return node_->get<std::string>();
    }

    double number() const {
        if (!node_->is_number()) fail("expected number");
        return node_->get<double>();
    }

    std::int64_t integer() const {
        if (!node_->is_number_integer()) fail("expected integer");
        return node_->get<std::int64_t>();
    }

    bool boolean() const {
        if (!node_->is_boolean()) fail("expected boolean");
        return node_->get<bool>();
    }

    /// Runs a value constructor, re-tagging range errors with this path.
    template <typename F>
    auto guarded(F&& make) const -> decltype(make()) {
        try {
            return make();
        } catch (const Error& e) {
            if (e.code() == Errc::Malformed && !e.details().empty()) throw;
            fail(e.message());
        }
    }

    Weight weight() const {
        return guarded([&] { return Weight(number()); });
    }
    UnitFraction fraction() const {
        return guarded([&] { return UnitFraction(number()); });
    }
    Money money() const {
        return guarded([&] { return Money(at("amount").number(), at("currency").str()); });
    }
    Rating rating() const {
        return guarded([&] { return parse_rating(str()); });
    }
    MaturityLevel maturity() const {
        return guarded([&] { return parse_maturity(str()); });
    }

private:
    const json* node_;
    std::string path_;
};

/// Accepts any "1.x.y" semantic version.
inline void check_schema_version(const Reader& doc, std::string_view kind) {
    const auto version = doc.at("schema_version").str();
    unsigned major = 0, minor = 0, patch = 0;
    char tail = 0;
    if (std::sscanf(version.c_str(), "%u.%u.%u%c", &major, &minor, &patch, &tail) != 3) {
        doc.at("schema_version").fail("not a semantic version: '" + version + "'");
    }
    if (major != 1) {
        throw Error(Errc::SchemaVersionUnsupported,
                    std::string(kind) + " schema_version " + version + " is not supported (expected 1.x.y)", {version});
    }
}

inline json parse_document(std::string_view bytes) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(Errc::Malformed, "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                    {"byte:" + std::to_string(e.byte)});
    }
}

inline std::string slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string(), {path.string()});
    return slurp(in);
}

inline json money_json(const Money& m) { return {{"amount", m.amount()}, {"currency", m.currency()}}; }

inline json cia_json(const CiaPosture& c) {
    return {{"confidentiality", c.confidentiality.value()},
            {"integrity", c.integrity.value()},
            {"availability", c.availability.value()}};
}

inline CiaPosture read_cia(const Reader& r) {
    return {r.at("confidentiality").fraction(), r.at("integrity").fraction(), r.at("availability").fraction()};
}

} // namespace detail

// ── BusinessProfile ──────────────────────────────────────────────────────────

inline json to_json(const BusinessProfile& p) {
    json units = json::array();
    for (const auto& u : p.units) {
        json segments = json::array();
        for (const auto& s : u.segments) {
            json controls = json::array();
            for (const auto& c : s.implemented_controls) {
                controls.push_back({{"control_id", c.control_id}, {"maturity", to_string(c.maturity)}});
            }
            json threats = json::array();
            for (const auto& t : s.threat_exposures) {
                threats.push_back({{"threat_id", t.threat_id},
                                   {"risk_w", t.risk_w.value()},
                                   {"operational", to_string(t.operational)},
                                   {"financial", to_string(t.financial)}});
            }
            segments.push_back({{"name", s.name},
                                {"revenue_share", s.revenue_share.value()},
                                {"implemented_controls", std::move(controls)},
                                {"threat_exposures", std::move(threats)}});
        }
        units.push_back({{"name", u.name},
                         {"revenue_share", u.revenue_share.value()},
                         {"segments", std::move(segments)},
                         {"regulations", u.regulations}});
    }
    json doc = {{"schema_version", p.schema_version},
                {"name", p.name},
                {"sector", p.sector},
                {"country", p.country},
                {"yearly_revenue", detail::money_json(p.yearly_revenue)},
                {"employee_count", p.employee_count},
                {"units", std::move(units)}};
    if (p.listed_company) doc["listed_company"] = *p.listed_company;
    return doc;
}

inline BusinessProfile profile_from_json(const json& doc) {
    const detail::Reader r(doc, "");
    if (!doc.is_object()) r.fail("expected profile object");
    detail::check_schema_version(r, "profile");

    BusinessProfile p;
    p.schema_version = r.at("schema_version").str();
    p.name = r.at("name").str();
    p.sector = r.at("sector").str();
    p.country = r.at("country").str();
    p.yearly_revenue = r.at("yearly_revenue").money();
    p.employee_count = r.at("employee_count").integer();
    const auto units = r.at("units");
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto ur = units[i];
        BusinessUnit unit;
        unit.name = ur.at("name").str();
        unit.revenue_share = ur.at("revenue_share").fraction();
        if (auto regs = ur.opt("regulations")) {
            for (std::size_t k = 0; k < regs->size(); ++k) unit.regulations.push_back((*regs)[k].str());
        }
        const auto segs = ur.at("segments");
        for (std::size_t j = 0; j < segs.size(); ++j) {
            const auto sr = segs[j];
            Segment seg;
            seg.name = sr.at("name").str();
            seg.revenue_share = sr.at("revenue_share").fraction();
            if (auto ctrls = sr.opt("implemented_controls")) {
                for (std::size_t k = 0; k < ctrls->size(); ++k) {
                    const auto cr = (*ctrls)[k];
                    seg.implemented_controls.push_back({cr.at("control_id").str(), cr.at("maturity").maturity()});
                }
            }
            if (auto threats = sr.opt("threat_exposures")) {
                for (std::size_t k = 0; k < threats->size(); ++k) {
                    const auto tr = (*threats)[k];
                    seg.threat_exposures.push_back({tr.at("threat_id").str(), tr.at("risk_w").weight(),
                                                    tr.at("operational").rating(), tr.at("financial").rating()});
                }
            }
            unit.segments.push_back(std::move(seg));
        }
        p.units.push_back(std::move(unit));
    }
    if (auto listed = r.opt("listed_company")) {
        if (!listed->raw().is_object()) listed->fail("expected object");
        p.listed_company = listed->raw();
    }
    return p;
}

inline BusinessProfile load_profile(std::string_view bytes) { return profile_from_json(detail::parse_document(bytes)); }

inline BusinessProfile load_profile(std::istream& in) { return load_profile(detail::slurp(in)); }

inline BusinessProfile load_profile_file(const std::filesystem::path& path) { return load_profile(detail::read_file(path)); }

// ── Catalog ──────────────────────────────────────────────────────────────────

inline json to_json(const Catalog& c) {
    json threats = json::array();
    for (const auto& t : c.threats) {
        json tj = {{"id", t.id}, {"name", t.name}};
        if (t.taxonomy_ref) tj["taxonomy_ref"] = *t.taxonomy_ref;
        threats.push_back(std::move(tj));
    }
    json domains = json::array();
    for (const auto& d : c.domains) domains.push_back({{"id", d.id}, {"name", d.name}});
    json controls = json::array();
    for (const auto& ctl : c.controls) {
        json eff = json::object();
        for (const auto& [tid, e] : ctl.base_efficacy) eff[tid] = e.value();
        controls.push_back({{"id", ctl.id},
                            {"name", ctl.name},
                            {"capex", detail::money_json(ctl.capex)},
                            {"opex_annual", detail::money_json(ctl.opex_annual)},
                            {"base_efficacy", std::move(eff)},
                            {"cia_contribution", detail::cia_json(ctl.cia_contribution)},
                            {"domains", ctl.domains}});
    }
    json weights = json::array();
    for (const auto& [key, w] : c.threat_domain_weights) {
        weights.push_back({{"threat", key.first}, {"domain", key.second}, {"weight", w.value()}});
    }
    auto factor_array = [](const std::vector<UnitFraction>& fs) {
        json a = json::array();
        for (auto f : fs) a.push_back(f.value());
        return a;
    };
    json rows = json::array();
    for (const auto& row : c.rcvar_rows) {
        rows.push_back({{"sector", row.sector},
                        {"country", row.country},
                        {"size_band", row.size_band},
                        {"factors", factor_array(row.factors)}});
    }
    if (c.rcvar_default) rows.push_back({{"default", true}, {"factors", factor_array(*c.rcvar_default)}});
    json mult = json::object();
    for (auto m : kAllMaturityLevels) mult[std::string(to_string(m))] = c.maturity_multipliers[m];

    return {{"schema_version", c.schema_version},
            {"threats", std::move(threats)},
            {"domains", std::move(domains)},
            {"controls", std::move(controls)},
            {"threat_domain_weights", std::move(weights)},
            {"rcvar_factors", std::move(rows)},
            {"maturity_multipliers", std::move(mult)}};
}

inline Catalog catalog_from_json(const json& doc) {
    const detail::Reader r(doc, "");
    if (!doc.is_object()) r.fail("expected catalog object");
    detail::check_schema_version(r, "catalog");

    Catalog c;
    c.schema_version = r.at("schema_version").str();

    std::set<std::string> seen;
    auto unique = [&seen](const detail::Reader& at, const std::string& id) {
        if (!seen.insert(id).second) at.fail("duplicate id '" + id + "'");
    };

    const auto threats = r.at("threats");
    for (std::size_t i = 0; i < threats.size(); ++i) {
        const auto t = threats[i];
        Threat th{t.at("id").str(), t.at("name").str(), std::nullopt};
        if (auto ref = t.opt("taxonomy_ref")) th.taxonomy_ref = ref->str();
        unique(t.at("id"), th.id);
        c.threats.push_back(std::move(th));
    }
    seen.clear();
    const auto domains = r.at("domains");
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const auto d = domains[i];
        c.domains.push_back({d.at("id").str(), d.at("name").str()});
        unique(d.at("id"), c.domains.back().id);
    }

    auto dangling = [](const std::string& id, const std::string& where) {
        throw Error(Errc::DanglingReference, "'" + id + "' referenced at " + where + " does not exist", {id});
    };

    seen.clear();
    const auto controls = r.at("controls");
    for (std::size_t i = 0; i < controls.size(); ++i) {
        const auto cr = controls[i];
        ControlDef ctl;
        ctl.id = cr.at("id").str();
        unique(cr.at("id"), ctl.id);
        ctl.name = cr.at("name").str();
        ctl.capex = cr.at("capex").money();
        ctl.opex_annual = cr.at("opex_annual").money();
        const auto eff = cr.at("base_efficacy");
        if (!eff.raw().is_object()) eff.fail("expected object");
        for (const auto& [tid, value] : eff.raw().items()) {
            if (!c.find_threat(tid)) dangling(tid, eff.path());
            ctl.base_efficacy.emplace(tid, detail::Reader(value, eff.path() + "/" + tid).fraction());
        }
        ctl.cia_contribution = detail::read_cia(cr.at("cia_contribution"));
        const auto doms = cr.at("domains");
        for (std::size_t k = 0; k < doms.size(); ++k) {
            auto id = doms[k].str();
            if (!c.find_domain(id)) dangling(id, doms[k].path());
            ctl.domains.push_back(std::move(id));
        }
        c.controls.push_back(std::move(ctl));
    }

    const auto weights = r.at("threat_domain_weights");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto w = weights[i];
        auto tid = w.at("threat").str();
        auto did = w.at("domain").str();
        if (!c.find_threat(tid)) dangling(tid, w.path());
        if (!c.find_domain(did)) dangling(did, w.path());
        if (!c.threat_domain_weights.emplace(std::pair{tid, did}, w.at("weight").weight()).second) {
            w.fail("duplicate weight row (" + tid + ", " + did + ")");
        }
    }

    const auto rows = r.at("rcvar_factors");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i];
        std::vector<UnitFraction> factors;
        const auto fr = row.at("factors");
        for (std::size_t k = 0; k < fr.size(); ++k) factors.push_back(fr[k].fraction());
        if (factors.empty()) fr.fail("factor list must not be empty");
        const auto is_default = row.opt("default");
        if (is_default && is_default->boolean()) {
            if (c.rcvar_default) row.fail("more than one default factor row");
            c.rcvar_default = std::move(factors);
        } else {
            c.rcvar_rows.push_back(
                {row.at("sector").str(), row.at("country").str(), row.at("size_band").str(), std::move(factors)});
        }
    }

    const auto mult = r.at("maturity_multipliers");
    std::array<double, 6> table{};
    for (auto m : kAllMaturityLevels) {
        const auto v = mult.at(to_string(m)).number();
        if (!(v >= 0.0)) mult.at(to_string(m)).fail("multiplier must be non-negative");
        table[index_of(m)] = v;
    }
    c.maturity_multipliers = MaturityTable(table);
    return c;
}

inline Catalog load_catalog(std::string_view bytes) { return catalog_from_json(detail::parse_document(bytes)); }

inline Catalog load_catalog(std::istream& in) { return load_catalog(detail::slurp(in)); }

/// Accepts a catalog file or a directory holding catalog.json.
inline Catalog load_catalog_path(const std::filesystem::path& path) {
    const auto file = std::filesystem::is_directory(path) ? path / "catalog.json" : path;
    return load_catalog(detail::read_file(file));
}

// ── Hashing ──────────────────────────────────────────────────────────────────

inline std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Content hash of the canonical document; identifies a profile snapshot.
inline std::string profile_hash(const BusinessProfile& p) { return "fnv1a64:" + fnv1a64_hex(to_json(p).dump()); }

/// Content-derived catalog version; used to detect stale what-if requests.
inline std::string catalog_version(const Catalog& c) { return "fnv1a64:" + fnv1a64_hex(to_json(c).dump()); }

} // namespace qber
