#include "fuzzcare/service.hpp"

#include <charconv>
#include <stdexcept>

#include "fuzzcare/diagnosis.hpp"
#include "fuzzcare/eval.hpp"
#include "fuzzcare/patient_csv.hpp"
#include "httplib.h"

namespace fuzzcare {

namespace {

HttpResponse json_response(int status, const Json& j) { return {status, j.dump(), "application/json"}; }

HttpResponse error_response(int status, std::string_view kind, std::string_view message, std::string_view field = {}) {
  Json j = {{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  return json_response(status, j);
}

HttpResponse csv_error(const CsvError& e) {
  Json findings = Json::array();
  for (const auto& f : e.findings()) findings.push_back({{"row", f.row}, {"field", f.field}, {"message", f.message}});
  return json_response(422, {{"error", "InvalidCsv"}, {"message", e.what()}, {"findings", std::move(findings)}});
}

HttpResponse row_out_of_universe(std::size_t row, const OutOfUniverse& e) {
  Json findings = Json::array({{{"row", row}, {"field", e.variable()}, {"message", e.what()}}});
  return json_response(422, {{"error", "OutOfUniverse"}, {"message", "row " + std::to_string(row) + ": " + e.what()},
                             {"findings", std::move(findings)}});
}

Json stored_report(const StoredDiagnosis& s) {
  Json j = s.report;
  j["id"] = s.id;
  j["stored_at"] = s.timestamp;
  return j;
}

}  // namespace

DiagnosisService::DiagnosisService(KnowledgeBase kb, std::shared_ptr<DiagnosisStore> store, std::size_t resolution)
    : kb_(std::move(kb)),
      base_(build_rule_base(kb_)),
      kb_document_(dump_kb(kb_)),
      store_(std::move(store)),
      resolution_(resolution) {}

HttpResponse DiagnosisService::diagnose(std::string_view body) {
  const Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) return error_response(422, "InvalidJson", "request body is not valid JSON");
  try {
    const PatientRecord record = record_from_json(j);
    DiagnosisSession session;
    const auto values = record.values();
    for (std::size_t i = 0; i < values.size(); ++i) session.set_input(kCardioInputs[i], values[i]);
    session.set_gender(record.gender);
    const DiagnosisReport& report = session.diagnose(base_, kb_, resolution_);
    session.recommend();

    Json out = report_to_json(report);
    out["session"] = {{"state", to_string(session.state())}, {"result", session.result()}};
    if (store_) {
      const StoredDiagnosis s = store_->append(out["record"], out, kb_.version);
      out["id"] = s.id;
      out["stored_at"] = s.timestamp;
    }
    return json_response(200, out);
  } catch (const FieldError& e) {
    return error_response(422, "InvalidField", e.what(), e.field());
  } catch (const OutOfUniverse& e) {
    return error_response(422, "OutOfUniverse", e.what(), e.variable());
  } catch (const StorageError& e) {
    return error_response(503, "StorageUnavailable", e.what());
  }
}

HttpResponse DiagnosisService::rules(std::string_view fired_for) const {
  if (fired_for.empty()) return error_response(422, "InvalidQuery", "fired_for is required", "fired_for");
  std::optional<StoredDiagnosis> s;
  if (store_) s = store_->find(std::string(fired_for));
  if (!s) return error_response(404, "NotFound", "no stored diagnosis with id '" + std::string(fired_for) + "'");
  Json trace = s->report.value("trace", Json::object());
  trace["id"] = s->id;
  return json_response(200, trace);
}

HttpResponse DiagnosisService::batch(std::string_view csv) {
  std::vector<PatientRecord> records;
  try {
    records = parse_patient_csv(csv);
  } catch (const CsvError& e) {
    return csv_error(e);
  }
  // Every row is diagnosed before anything is written, so a bad row leaves
  // the store untouched.
  std::vector<Json> reports;
  reports.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      reports.push_back(report_to_json(evaluate_crisp(base_, kb_, records[i], resolution_)));
    } catch (const OutOfUniverse& e) {
      return row_out_of_universe(i + 1, e);
    }
  }
  Json out = Json::array();
  try {
    for (auto& r : reports) {
      if (store_) {
        out.push_back(stored_report(store_->append(r["record"], r, kb_.version)));
      } else {
        out.push_back(std::move(r));
      }
    }
  } catch (const StorageError& e) {
    return error_response(503, "StorageUnavailable", e.what());
  }
  return json_response(200, out);
}

HttpResponse DiagnosisService::eval(std::string_view csv) const {
  std::vector<LabeledRecord> rows;
  try {
    rows = parse_labeled_csv(csv);
  } catch (const CsvError& e) {
    return csv_error(e);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& var : kb_.inputs) {
      const double x = rows[i].record.value(var.name());
      if (!var.universe().contains(x)) {
        return row_out_of_universe(i + 1, OutOfUniverse(var.name(), x, var.universe().lo, var.universe().hi));
      }
    }
  }
  return json_response(200, eval_to_json(run_eval(base_, kb_, rows, resolution_)));
}

HttpResponse DiagnosisService::kb() const { return {200, kb_document_, "application/json"}; }

HttpResponse DiagnosisService::healthz() const {
  return json_response(200, {{"status", "ok"}, {"kb_version", kb_.version}, {"rules", base_.size()}});
}

std::pair<std::string, int> parse_listen(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("listen address must be host:port");
  std::string host(address.substr(0, colon));
  if (host.empty()) host = "127.0.0.1";
  const std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("invalid port '" + std::string(port_text) + "'");
  }
  return {host, port};
}

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(DiagnosisService& service) : impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.Post("/v1/diagnose",
         [&service](const httplib::Request& req, httplib::Response& res) { send(res, service.diagnose(req.body)); });
  s.Get("/v1/rules", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.rules(req.get_param_value("fired_for")));
  });
  s.Post("/v1/patients/batch",
         [&service](const httplib::Request& req, httplib::Response& res) { send(res, service.batch(req.body)); });
  s.Post("/v1/eval",
         [&service](const httplib::Request& req, httplib::Response& res) { send(res, service.eval(req.body)); });
  s.Get("/v1/kb", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.kb()); });
  s.Get("/healthz", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.healthz()); });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "InternalError", message));
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fuzzcare
