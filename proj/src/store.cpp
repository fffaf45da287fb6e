#include "fuzzcare/store.hpp"

#include <fcntl.h>
#include <openssl/sha.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace fuzzcare {

namespace {

long long now_micros() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

// Parses the format produced by format_timestamp; nullopt on anything else.
std::optional<long long> parse_timestamp(const std::string& s) {
  std::tm tm{};
  int micros = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%6dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &micros) != 7) {
    return std::nullopt;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return static_cast<long long>(secs) * 1000000 + micros;
}

std::string errno_message(const std::string& what, const std::filesystem::path& path) {
  return what + " " + path.string() + ": " + std::strerror(errno);
}

void write_all(int fd, std::string_view bytes, const std::filesystem::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError(errno_message("cannot write", path));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string content_id(std::string_view line) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(line.data()), line.size(), digest);
  static constexpr char hex[] = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 8; ++i) {
    id += hex[digest[i] >> 4];
    id += hex[digest[i] & 0xf];
  }
  return id;
}

std::string format_timestamp(long long micros) {
  const std::time_t secs = static_cast<std::time_t>(micros / 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(micros % 1000000));
  return buf;
}

DiagnosisStore::DiagnosisStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StorageError(errno_message("cannot open store", path_));
  replay();
}

DiagnosisStore::~DiagnosisStore() {
  if (fd_ >= 0) ::close(fd_);
}

void DiagnosisStore::replay() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw StorageError(errno_message("cannot read store", path_));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  needs_newline_ = !text.empty() && text.back() != '\n';

  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    // a torn final line from an interrupted write is skipped
    if (end == std::string::npos) break;
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("timestamp") || !j["timestamp"].is_string()) continue;

    StoredDiagnosis entry{content_id(line), j["timestamp"].get<std::string>(), j.value("kb_version", ""),
                          j.value("record", Json::object()), j.value("report", Json::object())};
    if (auto t = parse_timestamp(entry.timestamp); t && *t > last_micros_) last_micros_ = *t;
    by_id_.emplace(entry.id, entries_.size());
    entries_.push_back(std::move(entry));
  }
}

StoredDiagnosis DiagnosisStore::append(const Json& record, const Json& report, const std::string& kb_version) {
  std::unique_lock lock(mutex_);
  const long long micros = std::max(now_micros(), last_micros_ + 1);

  StoredDiagnosis entry{"", format_timestamp(micros), kb_version, record, report};
  const Json j = {{"timestamp", entry.timestamp},
                  {"kb_version", entry.kb_version},
                  {"record", entry.record},
                  {"report", entry.report}};
  const std::string line = j.dump();
  entry.id = content_id(line);

  std::string bytes;
  if (needs_newline_) bytes += '\n';
  bytes += line;
  bytes += '\n';
  try {
    write_all(fd_, bytes, path_);
  } catch (const StorageError&) {
    // part of the line may have landed; start the next entry on a fresh line
    needs_newline_ = true;
    throw;
  }
  needs_newline_ = false;
  if (::fsync(fd_) != 0) throw StorageError(errno_message("cannot sync", path_));
  last_micros_ = micros;

  by_id_.emplace(entry.id, entries_.size());
  entries_.push_back(entry);
  return entry;
}

std::optional<StoredDiagnosis> DiagnosisStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return entries_[it->second];
}

std::vector<StoredDiagnosis> DiagnosisStore::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::size_t DiagnosisStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace fuzzcare
