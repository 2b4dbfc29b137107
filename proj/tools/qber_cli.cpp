// qber: command-line front end for the cyber-risk quantification engine.
//
//   qber assess   --profile F --catalog DIR [--alpha X] [--seed N] --out report.json
//   qber whatif   --report F --delta F [--catalog DIR] [--out F]
//   qber simulate --report F --iterations N --seed S --confidence 0.95,0.99
//   qber validate --profile F --catalog DIR
//   qber serve    --port P --data DIR
//
// Exit codes: 0 ok, 2 validation failure, 3 I/O error, 4 config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "qber/catalog.hpp"
#include "qber/json_io.hpp"
#include "qber/service/assessment.hpp"
#include "qber/service/http_api.hpp"
#include "qber/service/store.hpp"
#include "qber/service/whatif.hpp"
#include "qber/simulation.hpp"
#include "qber/validation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kIo = 3;
constexpr int kConfig = 4;

/// Thrown for failures whose exit code is fixed by where they happened
/// (a malformed catalog is a config error, a malformed profile a validation one).
struct Exit {
    int code;
    std::string message;
};

int exit_code(qber::Errc code) {
    switch (code) {
    case qber::Errc::Io:
    case qber::Errc::NotFound: return kIo;
    case qber::Errc::ValidationFailed:
    case qber::Errc::Malformed:
    case qber::Errc::SchemaVersionUnsupported:
    case qber::Errc::UnknownEntity:
    case qber::Errc::UnknownRef:
    case qber::Errc::UnknownId:
    case qber::Errc::OutOfRange: return kValidation;
    default: return kConfig;
    }
}

fs::path default_catalog() {
    if (const char* dir = std::getenv("QBER_DATA_DIR")) {
        if (fs::exists(fs::path(dir) / "catalog" / "catalog.json")) return fs::path(dir) / "catalog";
    }
    return QBER_DEFAULT_CATALOG_DIR;
}

qber::Catalog load_catalog_or_exit(const fs::path& path) {
    try {
        return qber::load_catalog_path(path);
    } catch (const qber::Error& e) {
        throw Exit{e.code() == qber::Errc::Io ? kIo : kConfig, "catalog: " + std::string(e.what())};
    }
}

void write_output(const std::optional<std::string>& out, const std::string& text) {
    if (!out) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream f(*out, std::ios::binary | std::ios::trunc);
    if (!f) throw Exit{kIo, "cannot write " + *out};
    f << text << '\n';
    if (!f) throw Exit{kIo, "short write to " + *out};
}

void print_violations(const qber::ValidationReport& report) {
    for (const auto& v : report.violations) std::cerr << v.code << ' ' << v.path << ": " << v.message << '\n';
}

std::string money(const qber::Money& m) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << m.amount() << ' ' << m.currency();
    return s.str();
}

void print_summary(const qber::AssessmentReport& r) {
    std::cout << "report " << r.id << "  RS_economic " << r.rs_economic.value.value() << '\n';
    for (const auto& s : r.segments) {
        const auto& sa = s.assessment;
        std::cout << "  " << sa.ref.unit << " / " << sa.ref.segment << ": revenue " << money(sa.seg_revenue)
                  << ", exposure " << sa.exposure.value() << ", ALE " << money(sa.ale) << '\n';
    }
    std::cout << "total seg_risk " << money(r.total_seg_risk) << ", total ALE " << money(r.total_ale) << '\n';
    std::cout << "recommended (" << money(r.recommendation.total_cost) << " of " << money(r.recommendation.budget)
              << "):\n";
    for (const auto& c : r.recommendation.chosen) {
        std::cout << "  " << c.control_id << " @ " << c.segment.unit << " / " << c.segment.segment << "  z_rosi "
                  << c.z_rosi << "  cost " << money(c.annualized_cost) << '\n';
    }
}

std::vector<double> parse_levels(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Exit{kConfig, "bad confidence level '" + item + "'"};
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyber-risk quantification engine"};
    app.require_subcommand(1);

    std::string profile_path, catalog_path, report_path, delta_path, data_dir = ".";
    std::optional<std::string> out_path, csv_path;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::uint64_t iterations = 10'000;
    std::string confidence = "0.95,0.99";
    double spread = 0.25;
    int port = 8080;

    auto* assess_cmd = app.add_subcommand("assess", "Run a full assessment");
    assess_cmd->add_option("--profile", profile_path, "Business profile JSON")->required();
    assess_cmd->add_option("--catalog", catalog_path, "Catalog directory or file");
    assess_cmd->add_option("--alpha", alpha, "Domain prioritization coefficient");
    assess_cmd->add_option("--seed", seed, "Seed echoed into the report and used by simulation");
    assess_cmd->add_option("--out", out_path, "Report JSON output")->required();

    auto* whatif_cmd = app.add_subcommand("whatif", "Re-run a report with a change set");
    whatif_cmd->add_option("--report", report_path, "Base report JSON")->required();
    whatif_cmd->add_option("--delta", delta_path, "Delta JSON")->required();
    whatif_cmd->add_option("--catalog", catalog_path, "Catalog directory or file");
    whatif_cmd->add_option("--out", out_path, "Output report JSON (stdout when absent)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo annual-loss simulation");
    sim_cmd->add_option("--report", report_path, "Base report JSON")->required();
    sim_cmd->add_option("--iterations", iterations, "Iterations")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", seed, "Seed (defaults to the report's)");
    sim_cmd->add_option("--confidence", confidence, "Comma-separated confidence levels");
    sim_cmd->add_option("--spread", spread, "Impact spread in [0,1)");
    sim_cmd->add_option("--catalog", catalog_path, "Catalog directory or file");
    sim_cmd->add_option("--csv", csv_path, "Write the loss sample, one value per line");
    sim_cmd->add_option("--out", out_path, "Summary JSON output (stdout when absent)");

    auto* validate_cmd = app.add_subcommand("validate", "Validate a profile against a catalog");
    validate_cmd->add_option("--profile", profile_path, "Business profile JSON")->required();
    validate_cmd->add_option("--catalog", catalog_path, "Catalog directory or file");

    auto* serve_cmd = app.add_subcommand("serve", "Serve the v1 HTTP API");
    serve_cmd->add_option("--port", port, "Port")->envname("QBER_PORT");
    serve_cmd->add_option("--data", data_dir, "Data directory (document store)")->envname("QBER_DATA_DIR");
    serve_cmd->add_option("--catalog", catalog_path, "Catalog directory or file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        const fs::path catalog_dir = catalog_path.empty() ? default_catalog() : fs::path(catalog_path);

        if (*assess_cmd) {
            const auto catalog = load_catalog_or_exit(catalog_dir);
            const auto profile = qber::load_profile_file(profile_path);
            qber::EngineConfig cfg;
            if (alpha) cfg.alpha = *alpha;
            if (seed) cfg.seed = *seed;
            const auto report = qber::assess(profile, catalog, cfg);
            write_output(out_path, qber::to_json(report).dump(2));
            print_summary(report);
            return kOk;
        }

        if (*validate_cmd) {
            const auto catalog = load_catalog_or_exit(catalog_dir);
            const auto profile = qber::load_profile_file(profile_path);
            const auto report = qber::validate_profile(profile, catalog);
            if (!report.ok()) {
                print_violations(report);
                return kValidation;
            }
            std::cout << "profile is valid\n";
            return kOk;
        }

        if (*whatif_cmd) {
            const auto catalog = load_catalog_or_exit(catalog_dir);
            const auto base = qber::report_inputs_from_json(qber::detail::parse_document(qber::detail::read_file(report_path)));
            const auto delta = qber::whatif_delta_from_json(qber::detail::parse_document(qber::detail::read_file(delta_path)));
            const auto report = qber::whatif(base, delta, catalog);
            write_output(out_path, qber::to_json(report).dump(2));
            if (out_path) print_summary(report);
            return kOk;
        }

        if (*sim_cmd) {
            const auto catalog = load_catalog_or_exit(catalog_dir);
            const auto base = qber::report_inputs_from_json(qber::detail::parse_document(qber::detail::read_file(report_path)));
            qber::SimulationConfig cfg;
            cfg.iterations = iterations;
            cfg.seed = seed.value_or(base.config.seed);
            cfg.confidence_levels = parse_levels(confidence);
            cfg.impact_spread = spread;
            const auto dist = qber::simulate_losses(base.profile, catalog, cfg, base.config.rating_mapping);
            if (csv_path) {
                std::ofstream csv(*csv_path, std::ios::binary | std::ios::trunc);
                if (!csv) throw Exit{kIo, "cannot write " + *csv_path};
                qber::write_losses_csv(csv, dist);
            }
            write_output(out_path, qber::simulation_summary(dist, cfg.confidence_levels).dump(2));
            return kOk;
        }

        if (*serve_cmd) {
            const fs::path catalog_source =
                !catalog_path.empty()                                 ? fs::path(catalog_path)
                : fs::exists(fs::path(data_dir) / "catalog" / "catalog.json") ? fs::path(data_dir) / "catalog"
                                                                      : fs::path(QBER_DEFAULT_CATALOG_DIR);
            auto catalog = load_catalog_or_exit(catalog_source);
            qber::FileStore store(data_dir);
            qber::ApiService api(std::move(catalog), store);
            httplib::Server server;
            api.mount(server);
            std::cerr << "listening on 0.0.0.0:" << port << ", data in " << fs::absolute(data_dir) << '\n';
            if (!server.listen("0.0.0.0", port)) {
                std::cerr << "cannot bind port " << port << '\n';
                return kIo;
            }
            return kOk;
        }
    } catch (const Exit& e) {
        std::cerr << e.message << '\n';
        return e.code;
    } catch (const qber::Error& e) {
        std::cerr << e.what() << '\n';
        for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kIo;
    }
    return kConfig;
}
