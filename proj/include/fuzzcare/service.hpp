#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "fuzzcare/cardio_kb.hpp"
#include "fuzzcare/store.hpp"

namespace fuzzcare {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handlers, independent of the HTTP transport. The kb and rule base
/// are fixed at construction; only the store changes afterwards.
class DiagnosisService {
 public:
  /// store may be null, in which case nothing is persisted and
  /// /v1/rules always answers 404.
  DiagnosisService(KnowledgeBase kb, std::shared_ptr<DiagnosisStore> store,
                   std::size_t resolution = kDefaultResolution);

  HttpResponse diagnose(std::string_view body);
  HttpResponse rules(std::string_view fired_for) const;
  HttpResponse batch(std::string_view csv);
  HttpResponse eval(std::string_view csv) const;
  HttpResponse kb() const;
  HttpResponse healthz() const;

  const KnowledgeBase& knowledge_base() const noexcept { return kb_; }

 private:
  KnowledgeBase kb_;
  RuleBase base_;
  std::string kb_document_;
  std::shared_ptr<DiagnosisStore> store_;
  std::size_t resolution_;
};

/// "host:port" or ":port"; throws std::invalid_argument.
std::pair<std::string, int> parse_listen(std::string_view address);

/// Thin HTTP/1.1 front end over DiagnosisService.
class HttpServer {
 public:
  explicit HttpServer(DiagnosisService& service);
  ~HttpServer();

  /// Binds without serving; port 0 picks a free port. Returns the bound port
  /// or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a successful bind.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fuzzcare
