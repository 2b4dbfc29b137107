#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qber/service/http_api.hpp"

using namespace qber;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class ApiTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("qber-api-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        store_ = std::make_unique<FileStore>(root_);
        api_ = std::make_unique<ApiService>(fixtures::worked_catalog(), *store_);
        api_->mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override {
        server_.stop();
        if (thread_.joinable()) thread_.join();
        fs::remove_all(root_);
    }

    httplib::Result post(const std::string& path, const json& body, const httplib::Headers& headers = {}) {
        return client_->Post(path, headers, body.dump(), "application/json");
    }

    std::string create_profile() {
        auto res = post("/v1/profiles", to_json(fixtures::worked_profile()));
        EXPECT_EQ(res->status, 201);
        return json::parse(res->body)["id"];
    }

    std::string create_assessment(const json& config = nullptr) {
        auto res = post("/v1/assessments", {{"profile_id", create_profile()}, {"config", config}});
        EXPECT_EQ(res->status, 201) << res->body;
        return json::parse(res->body)["id"];
    }

    static void expect_envelope(const httplib::Result& res, int status, const std::string& code) {
        ASSERT_TRUE(res);
        EXPECT_EQ(res->status, status) << res->body;
        const auto body = json::parse(res->body);
        EXPECT_EQ(body["code"], code);
        EXPECT_TRUE(body["message"].is_string());
        EXPECT_TRUE(body["details"].is_array());
    }

    fs::path root_;
    std::unique_ptr<FileStore> store_;
    std::unique_ptr<ApiService> api_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
};

} // namespace

TEST_F(ApiTest, ProfileCreateGetList) {
    auto res = post("/v1/profiles", to_json(fixtures::worked_profile()));
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["version"], 1);
    EXPECT_EQ(res->get_header_value("ETag"), "\"1\"");
    const std::string id = body["id"];

    auto got = client_->Get("/v1/profiles/" + id);
    EXPECT_EQ(got->status, 200);
    EXPECT_EQ(load_profile(json::parse(got->body)["profile"].dump()), fixtures::worked_profile());

    auto list = client_->Get("/v1/profiles");
    EXPECT_EQ(json::parse(list->body)["ids"], json::array({id}));
}

TEST_F(ApiTest, InvalidProfileIs422) {
    auto p = to_json(fixtures::worked_profile());
    p["units"][0]["segments"][0]["threat_exposures"][0]["threat_id"] = "T-UNKNOWN";
    auto res = post("/v1/profiles", p);
    expect_envelope(res, 422, "VALIDATION_FAILED");
    EXPECT_EQ(json::parse(res->body)["details"].size(), 1u);
}

TEST_F(ApiTest, MalformedBodyIs400) {
    auto res = client_->Post("/v1/profiles", "{not json", "application/json");
    expect_envelope(res, 400, "MALFORMED");
}

TEST_F(ApiTest, UnknownIdsAre404) {
    expect_envelope(client_->Get("/v1/profiles/nope"), 404, "NOT_FOUND");
    expect_envelope(client_->Get("/v1/assessments/nope"), 404, "NOT_FOUND");
    expect_envelope(post("/v1/assessments", {{"profile_id", "nope"}}), 404, "NOT_FOUND");
    expect_envelope(post("/v1/assessments/nope/whatif", {{"delta", {{"changes", json::array()}}}}), 404, "NOT_FOUND");
    expect_envelope(client_->Post("/v1/assessments/nope/simulate", "", "application/json"), 404, "NOT_FOUND");
}

TEST_F(ApiTest, ProfileUpdateWithIfMatch) {
    const auto id = create_profile();
    auto p = to_json(fixtures::worked_profile());
    p["name"] = "Renamed";
    auto ok = post("/v1/profiles?id=" + id, p, {{"If-Match", "\"1\""}});
    EXPECT_EQ(ok->status, 200);
    EXPECT_EQ(json::parse(ok->body)["version"], 2);

    auto stale = post("/v1/profiles?id=" + id, p, {{"If-Match", "\"1\""}});
    expect_envelope(stale, 409, "VERSION_CONFLICT");
    auto no_match = post("/v1/profiles?id=" + id, p);
    expect_envelope(no_match, 409, "VERSION_CONFLICT");
}

TEST_F(ApiTest, CatalogEndpoint) {
    auto res = client_->Get("/v1/catalog");
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(load_catalog(res->body), fixtures::worked_catalog());
    EXPECT_EQ(res->get_header_value("ETag"), "\"" + catalog_version(fixtures::worked_catalog()) + "\"");
}

TEST_F(ApiTest, AssessmentFlow) {
    const auto id = create_assessment();
    auto got = client_->Get("/v1/assessments/" + id);
    ASSERT_EQ(got->status, 200);
    const auto report = json::parse(got->body);
    EXPECT_NEAR(report["totals"]["ale"]["amount"].get<double>(), 1'152'000.0, 1e-3);
    EXPECT_NEAR(report["candidates"][0]["z_rosi"].get<double>(), 4.5296, 1e-9);

    auto csv = client_->Get("/v1/assessments/" + id + "/report.csv");
    EXPECT_EQ(csv->status, 200);
    EXPECT_EQ(csv->get_header_value("Content-Type"), "text/csv");
    EXPECT_EQ(csv->body.rfind("unit,segment,threat_id,", 0), 0u);

    auto list = client_->Get("/v1/assessments");
    EXPECT_EQ(json::parse(list->body)["ids"], json::array({id}));
}

TEST_F(ApiTest, AssessmentConfigErrors) {
    const auto pid = create_profile();
    expect_envelope(post("/v1/assessments", {{"profile_id", pid}, {"config", {{"alpha", -1}}}}), 400,
                    "INVALID_CONFIG");
    expect_envelope(post("/v1/assessments", {{"config", nullptr}}), 400, "MALFORMED");
}

TEST_F(ApiTest, WhatIfCreatesLinkedReport) {
    const auto id = create_assessment();
    const json delta = {{"changes", {{{"op", "set_maturity"}, {"unit", "Commerce"}, {"segment", "Sales Platform"},
                                      {"control_id", "C-BASE"}, {"maturity", "optimized"}}}}};
    auto res = post("/v1/assessments/" + id + "/whatif", {{"delta", delta}});
    ASSERT_EQ(res->status, 201) << res->body;
    const auto report = json::parse(res->body);
    EXPECT_EQ(report["base_report_id"], id);
    EXPECT_EQ(client_->Get("/v1/assessments/" + report["id"].get<std::string>())->status, 200);

    const json bad = {{"changes", {{{"op", "remove_control"}, {"unit", "Commerce"}, {"segment", "Sales Platform"},
                                    {"control_id", "C-CAND"}}}}};
    expect_envelope(post("/v1/assessments/" + id + "/whatif", {{"delta", bad}}), 422, "UNKNOWN_ENTITY");
}

TEST_F(ApiTest, SimulateIsReproducible) {
    const auto id = create_assessment();
    const json cfg = {{"iterations", 2000}, {"seed", 5}, {"confidence_levels", {0.95, 0.99}}};
    auto a = post("/v1/assessments/" + id + "/simulate", cfg);
    auto b = post("/v1/assessments/" + id + "/simulate", cfg);
    ASSERT_EQ(a->status, 200) << a->body;
    EXPECT_EQ(a->body, b->body);
    const auto s = json::parse(a->body);
    EXPECT_EQ(s["iterations"], 2000);
    EXPECT_LE(s["var"][0]["value"].get<double>(), s["var"][1]["value"].get<double>());
    EXPECT_EQ(json::parse(client_->Get("/v1/assessments/" + id)->body)["simulation"], s);

    expect_envelope(post("/v1/assessments/" + id + "/simulate", {{"iterations", 0}}), 400, "INVALID_CONFIG");
}
