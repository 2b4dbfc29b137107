#pragma once
/**
 * @file  http_api.hpp
 * @brief v1 HTTP/JSON API over a DocumentStore.
 *
 *   POST /v1/profiles                      create (201) or, with ?id=X and
 *                                          If-Match: <version>, update (200)
 *   GET  /v1/profiles[/{id}]
 *   GET  /v1/catalog
 *   POST /v1/assessments                   {profile_id, config} -> report (201)
 *   GET  /v1/assessments[/{id}]
 *   POST /v1/assessments/{id}/whatif       {delta} -> new report (201)
 *   POST /v1/assessments/{id}/simulate     simulation config -> summary (200)
 *   GET  /v1/assessments/{id}/report.csv
 *
 * Every failure answers with {code, message, details[]}.
 */

#include <functional>
#include <sstream>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "qber/catalog.hpp"
#include "qber/json_io.hpp"
#include "qber/service/assessment.hpp"
#include "qber/service/config.hpp"
#include "qber/service/store.hpp"
#include "qber/service/whatif.hpp"
#include "qber/simulation.hpp"
#include "qber/validation.hpp"

namespace qber {

inline int http_status(Errc code) noexcept {
    switch (code) {
    case Errc::NotFound: return 404;
    case Errc::VersionConflict:
    case Errc::StaleCatalog: return 409;
    case Errc::ValidationFailed:
    case Errc::UnknownEntity:
    case Errc::UnknownRef:
    case Errc::UnknownId:
    case Errc::NoFactorRow: return 422;
    case Errc::Io:
    case Errc::Internal: return 500;
    default: return 400;
    }
}

inline nlohmann::json error_envelope(Errc code, const std::string& message, const std::vector<std::string>& details) {
    return {{"code", code_name(code)}, {"message", message}, {"details", details}};
}

inline constexpr const char* kProfiles = "profiles";
inline constexpr const char* kAssessments = "assessments";

class ApiService {
public:
    ApiService(Catalog catalog, DocumentStore& store)
        : catalog_(std::move(catalog)), catalog_version_(catalog_version(catalog_)), store_(store) {}

    const Catalog& catalog() const noexcept { return catalog_; }

    void mount(httplib::Server& server) {
        server.Post("/v1/profiles", wrap([this](const auto& req, auto& res) { post_profile(req, res); }));
        server.Get("/v1/profiles", wrap([this](const auto&, auto& res) { list(kProfiles, res); }));
        server.Get(R"(/v1/profiles/([A-Za-z0-9_-]+))",
                   wrap([this](const auto& req, auto& res) { get_profile(req.matches[1], res); }));
        server.Get("/v1/catalog", wrap([this](const auto&, auto& res) {
                       res.set_header("ETag", "\"" + catalog_version_ + "\"");
                       send_json(res, 200, to_json(catalog_));
                   }));
        server.Post("/v1/assessments", wrap([this](const auto& req, auto& res) { post_assessment(req, res); }));
        server.Get("/v1/assessments", wrap([this](const auto&, auto& res) { list(kAssessments, res); }));
        server.Get(R"(/v1/assessments/([A-Za-z0-9_-]+))", wrap([this](const auto& req, auto& res) {
                       send_json(res, 200, store_.get(kAssessments, req.matches[1]).document);
                   }));
        server.Post(R"(/v1/assessments/([A-Za-z0-9_-]+)/whatif)",
                    wrap([this](const auto& req, auto& res) { post_whatif(req.matches[1], req, res); }));
        server.Post(R"(/v1/assessments/([A-Za-z0-9_-]+)/simulate)",
                    wrap([this](const auto& req, auto& res) { post_simulate(req.matches[1], req, res); }));
        server.Get(R"(/v1/assessments/([A-Za-z0-9_-]+)/report\.csv)", wrap([this](const auto& req, auto& res) {
                       std::ostringstream csv;
                       write_report_csv(csv, store_.get(kAssessments, req.matches[1]).document);
                       res.status = 200;
                       res.set_content(csv.str(), "text/csv");
                   }));
    }

private:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static Handler wrap(Handler inner) {
        return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
            try {
                inner(req, res);
            } catch (const Error& e) {
                send_json(res, http_status(e.code()), error_envelope(e.code(), e.message(), e.details()));
            } catch (const std::exception& e) {
                send_json(res, 500, error_envelope(Errc::Internal, e.what(), {}));
            }
        };
    }

    static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static nlohmann::json parse_body(const httplib::Request& req) {
        if (req.body.empty()) throw Error(Errc::Malformed, "request body is empty");
        return detail::parse_document(req.body);
    }

    static std::optional<std::uint64_t> if_match(const httplib::Request& req) {
        if (!req.has_header("If-Match")) return std::nullopt;
        std::string v = req.get_header_value("If-Match");
        v.erase(std::remove(v.begin(), v.end(), '"'), v.end());
        try {
            std::size_t used = 0;
            const auto n = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return n;
        } catch (const std::exception&) {
            throw Error(Errc::Malformed, "If-Match must carry a numeric version, got '" + v + "'");
        }
    }

    static nlohmann::json profile_envelope(const StoredDocument& doc) {
        return {{"id", doc.id}, {"version", doc.version}, {"profile", doc.document}};
    }

    void list(const char* collection, httplib::Response& res) {
        send_json(res, 200, {{"ids", store_.list(collection)}});
    }

    void post_profile(const httplib::Request& req, httplib::Response& res) {
        const auto profile = profile_from_json(parse_body(req));
        if (auto report = validate_profile(profile, catalog_); !report.ok()) {
            throw Error(Errc::ValidationFailed, "profile failed validation", detail::violation_details(report));
        }
        const bool update = req.has_param("id");
        const std::string id = update ? req.get_param_value("id") : detail::new_id("prf-");
        // A named id without If-Match is a create: it conflicts if the id exists.
        const auto expected = if_match(req).value_or(0);
        const auto stored = store_.put(kProfiles, id, to_json(profile), expected);
        res.set_header("ETag", "\"" + std::to_string(stored.version) + "\"");
        send_json(res, stored.version == 1 ? 201 : 200, profile_envelope(stored));
    }

    void get_profile(const std::string& id, httplib::Response& res) {
        const auto stored = store_.get(kProfiles, id);
        res.set_header("ETag", "\"" + std::to_string(stored.version) + "\"");
        send_json(res, 200, profile_envelope(stored));
    }

    void post_assessment(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const detail::Reader r(body, "");
        const auto profile_id = r.at("profile_id").str();
        const auto config = engine_config_from_json(body.value("config", nlohmann::json(nullptr)));
        const auto profile = profile_from_json(store_.get(kProfiles, profile_id).document);
        const auto report = assess(profile, catalog_, config);
        auto doc = to_json(report);
        store_.put(kAssessments, report.id, doc, 0);
        send_json(res, 201, doc);
    }

    void post_whatif(const std::string& base_id, const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto base = report_inputs_from_json(store_.get(kAssessments, base_id).document);
        const auto delta = whatif_delta_from_json(body.contains("delta") ? body["delta"] : body);
        const auto report = whatif(base, delta, catalog_);
        auto doc = to_json(report);
        store_.put(kAssessments, report.id, doc, 0);
        send_json(res, 201, doc);
    }

    void post_simulate(const std::string& id, const httplib::Request& req, httplib::Response& res) {
        const auto stored = store_.get(kAssessments, id);
        const auto base = report_inputs_from_json(stored.document);
        if (base.catalog_version != catalog_version_) {
            throw Error(Errc::StaleCatalog, "report was computed against catalog " + base.catalog_version);
        }
        const auto body = req.body.empty() ? nlohmann::json::object() : parse_body(req);
        const auto cfg = simulation_config_from_json(body, base.config.seed);
        const auto dist = simulate_losses(base.profile, catalog_, cfg, base.config.rating_mapping);
        const auto summary = simulation_summary(dist, cfg.confidence_levels);
        auto doc = stored.document;
        doc["simulation"] = summary;
        store_.put(kAssessments, id, doc, stored.version);
        send_json(res, 200, summary);
    }

    Catalog catalog_;
    std::string catalog_version_;
    DocumentStore& store_;
};

} // namespace qber
