#pragma once

// Line-delimited JSON append log of diagnoses. Each line is one object
//   {"timestamp": ..., "kb_version": ..., "record": {...}, "report": {...}}
// and its id is the first 16 hex digits of the SHA-256 of the line bytes.

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fuzzcare/error.hpp"
#include "fuzzcare/kb_json.hpp"

namespace fuzzcare {

class StorageError : public Error {
 public:
  using Error::Error;
};

struct StoredDiagnosis {
  std::string id;
  std::string timestamp;  // RFC 3339, UTC, microseconds
  std::string kb_version;
  Json record;
  Json report;
};

std::string content_id(std::string_view line);

/// Formats microseconds since the epoch as 2024-01-02T03:04:05.000006Z.
std::string format_timestamp(long long micros);

class DiagnosisStore {
 public:
  /// Creates the file if needed and replays existing lines. Throws StorageError.
  explicit DiagnosisStore(std::filesystem::path path);
  ~DiagnosisStore();
  DiagnosisStore(const DiagnosisStore&) = delete;
  DiagnosisStore& operator=(const DiagnosisStore&) = delete;

  /// Appends and fsyncs one entry. Timestamps strictly increase within the
  /// file even if the clock steps back. Throws StorageError.
  StoredDiagnosis append(const Json& record, const Json& report, const std::string& kb_version);

  std::optional<StoredDiagnosis> find(const std::string& id) const;
  std::vector<StoredDiagnosis> entries() const;
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void replay();

  std::filesystem::path path_;
  int fd_ = -1;
  long long last_micros_ = 0;
  bool needs_newline_ = false;

  mutable std::shared_mutex mutex_;
  std::vector<StoredDiagnosis> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace fuzzcare
