#include <sys/resource.h>

#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "fuzzcare/diagnosis.hpp"
#include "fuzzcare/service.hpp"
#include "httplib.h"
#include "temp_dir.hpp"

using namespace fuzzcare;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json patient(const LabeledRecord& row) { return record_to_json(row.record); }

struct ServiceFixture {
  TempDir dir;
  std::shared_ptr<DiagnosisStore> store = std::make_shared<DiagnosisStore>(dir / "store.jsonl");
  DiagnosisService service{load_default_kb(), store};
};

}  // namespace

TEST_SUITE("service") {
  TEST_CASE_FIXTURE(ServiceFixture, "diagnose a reference patient") {
    const auto res = service.diagnose(patient(reference_cohort()[7]).dump());
    REQUIRE(res.status == 200);
    const Json j = Json::parse(res.body);
    CHECK(j["label"] == "High");
    CHECK(j["dosage"]["level"] == "High");
    CHECK(j["session"]["state"] == "Recommended");
    CHECK(j["session"]["result"] == true);
    CHECK(j["id"].get<std::string>().size() == 16);
    CHECK(store->size() == 1);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "diagnose rejects bad bodies naming the field") {
    Json body = patient(reference_cohort()[0]);
    body.erase("heart_rate");
    auto res = service.diagnose(body.dump());
    CHECK(res.status == 422);
    CHECK(Json::parse(res.body)["field"] == "heart_rate");

    body = patient(reference_cohort()[0]);
    body["blood_pressure"] = 999;
    res = service.diagnose(body.dump());
    CHECK(res.status == 422);
    CHECK(Json::parse(res.body)["error"] == "OutOfUniverse");
    CHECK(Json::parse(res.body)["field"] == "blood_pressure");

    CHECK(service.diagnose("{not json").status == 422);
    CHECK(service.diagnose("[1,2]").status == 422);
    CHECK(store->size() == 0);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "no body reports a true result without a recommendation") {
    Json body = patient(reference_cohort()[0]);
    body["age"] = -3;
    const auto res = service.diagnose(body.dump());
    CHECK(res.status == 422);
    CHECK(res.body.find("\"result\":true") == std::string::npos);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "rules trace by id") {
    const Json d = Json::parse(service.diagnose(patient(reference_cohort()[0]).dump()).body);
    const auto res = service.rules(d["id"].get<std::string>());
    REQUIRE(res.status == 200);
    const Json trace = Json::parse(res.body);
    REQUIRE_FALSE(trace["fired_rules"].empty());
    // strongest rule first
    CHECK(trace["fired_rules"][0]["consequent"] == "Low");
    CHECK(trace["score"] == d["score"]);
    CHECK(service.rules("ffffffffffffffff").status == 404);
    CHECK(service.rules("").status == 422);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "batch") {
    const auto res = service.batch(slurp(FUZZCARE_DATA_DIR "/table2_batch.csv"));
    REQUIRE(res.status == 200);
    const Json reports = Json::parse(res.body);
    REQUIRE(reports.size() == 10);
    std::size_t matches = 0;
    const auto cohort = reference_cohort();
    for (std::size_t i = 0; i < 10; ++i) matches += reports[i]["label"] == cohort[i].expected_label ? 1 : 0;
    CHECK(matches >= 9);
    CHECK(store->size() == 10);

    const std::string header = "ecg,chest_pain,blood_sugar,cholesterol,blood_pressure,age,heart_rate\n";
    const auto empty = service.batch(header);
    CHECK(empty.status == 200);
    CHECK(Json::parse(empty.body).empty());
  }

  TEST_CASE_FIXTURE(ServiceFixture, "batch is all or nothing") {
    const std::string header = "ecg,chest_pain,blood_sugar,cholesterol,blood_pressure,age,heart_rate\n";
    auto res = service.batch(header + "1,1,100,150,120,40,100\n1,abc,100,150,120,40,100\n");
    CHECK(res.status == 422);
    Json j = Json::parse(res.body);
    CHECK(j["findings"][0]["row"] == 2);
    CHECK(j["findings"][0]["field"] == "chest_pain");

    res = service.batch(header + "1,1,100,150,120,40,100\n1,1,100,150,999,40,100\n");
    CHECK(res.status == 422);
    j = Json::parse(res.body);
    CHECK(j["findings"][0]["row"] == 2);
    CHECK(store->size() == 0);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "eval") {
    const auto res = service.eval(slurp(FUZZCARE_DATA_DIR "/table2.csv"));
    REQUIRE(res.status == 200);
    const Json j = Json::parse(res.body);
    CHECK(j["summary"]["n"] == 10);
    CHECK(j["summary"]["matches"].get<int>() >= 9);
    CHECK(std::abs(j["summary"]["mean_probability"].get<double>() - 0.955) < 1e-12);
    CHECK(service.eval(slurp(FUZZCARE_DATA_DIR "/table2.csv")).body == res.body);
    CHECK(service.eval("ecg\n").status == 422);
    CHECK(store->size() == 0);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "kb and health") {
    CHECK(service.kb().body == std::string(default_kb_document()));
    const Json h = Json::parse(service.healthz().body);
    CHECK(h["status"] == "ok");
    CHECK(h["rules"] == 3888);
  }

  TEST_CASE("storage failure surfaces as 503") {
    TempDir dir;
    auto store = std::make_shared<DiagnosisStore>(dir / "store.jsonl");
    DiagnosisService service(load_default_kb(), store);
    REQUIRE(service.diagnose(patient(reference_cohort()[0]).dump()).status == 200);
    const auto size = std::filesystem::file_size(dir / "store.jsonl");

    // Cap the file size so the next append fails with EFBIG.
    rlimit old{};
    getrlimit(RLIMIT_FSIZE, &old);
    auto old_handler = std::signal(SIGXFSZ, SIG_IGN);
    rlimit capped = old;
    capped.rlim_cur = size;
    setrlimit(RLIMIT_FSIZE, &capped);
    const auto res = service.diagnose(patient(reference_cohort()[1]).dump());
    setrlimit(RLIMIT_FSIZE, &old);
    std::signal(SIGXFSZ, old_handler);

    CHECK(res.status == 503);
    CHECK(Json::parse(res.body)["error"] == "StorageUnavailable");
    CHECK(service.diagnose(patient(reference_cohort()[1]).dump()).status == 200);
  }

  TEST_CASE("listen address parsing") {
    CHECK(parse_listen("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
    CHECK(parse_listen(":9000") == std::pair<std::string, int>{"127.0.0.1", 9000});
    CHECK_THROWS_AS(parse_listen("localhost"), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen("localhost:99999"), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen("localhost:http"), std::invalid_argument);
  }

  TEST_CASE("over HTTP") {
    TempDir dir;
    auto store = std::make_shared<DiagnosisStore>(dir / "store.jsonl");
    DiagnosisService service(load_default_kb(), store);
    HttpServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto d = client.Post("/v1/diagnose", patient(reference_cohort()[3]).dump(), "application/json");
    REQUIRE(d);
    CHECK(d->status == 200);
    const Json report = Json::parse(d->body);
    CHECK(report["label"] == "High");

    auto rules = client.Get("/v1/rules?fired_for=" + report["id"].get<std::string>());
    REQUIRE(rules);
    CHECK(rules->status == 200);
    CHECK(client.Get("/v1/rules?fired_for=nope")->status == 404);

    auto batch = client.Post("/v1/patients/batch", slurp(FUZZCARE_DATA_DIR "/table2_batch.csv"), "text/csv");
    REQUIRE(batch);
    CHECK(Json::parse(batch->body).size() == 10);

    auto eval = client.Post("/v1/eval", slurp(FUZZCARE_DATA_DIR "/table2.csv"), "text/csv");
    REQUIRE(eval);
    CHECK(eval->status == 200);

    auto kb = client.Get("/v1/kb");
    REQUIRE(kb);
    CHECK(kb->body == std::string(default_kb_document()));

    server.stop();
    t.join();
    CHECK(store->size() == 11);
  }
}
