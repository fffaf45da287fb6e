#include "fuzzcare/patient_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>

#include "fuzzcare/diagnosis.hpp"

namespace fuzzcare {

namespace {

std::string join_findings(const std::vector<CsvFinding>& findings) {
  std::string out = "malformed CSV";
  for (const auto& f : findings) {
    out += "; row " + std::to_string(f.row);
    if (!f.field.empty()) out += " (" + f.field + ")";
    out += ": " + f.message;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  // trailing blank lines carry no rows
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::optional<double> parse_number(std::string_view cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty() || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct Layout {
  bool gender = false;
  std::optional<std::size_t> gender_col;
  std::optional<std::size_t> expected_col;
  std::optional<std::size_t> probability_col;
  std::optional<std::size_t> human_col;
  std::size_t columns = 7;
};

// Parses the seven inputs and optional gender of one row, appending problems.
std::optional<PatientRecord> parse_record(const std::vector<std::string_view>& cells, const Layout& layout,
                                          std::size_t row, std::vector<CsvFinding>& findings) {
  const std::size_t before = findings.size();
  std::array<double, 7> vals{};
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    auto v = parse_number(cells[i]);
    if (!v) {
      findings.push_back({row, std::string(kCardioInputs[i]), "'" + std::string(cells[i]) + "' is not a number"});
    } else {
      vals[i] = *v;
    }
  }
  PatientRecord r{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], Gender::unspecified};
  if (layout.gender_col) {
    auto g = gender_from_string(cells[*layout.gender_col]);
    if (!g) {
      findings.push_back({row, "gender", "gender must be male, female or unspecified"});
    } else {
      r.gender = *g;
    }
  }
  if (findings.size() != before) return std::nullopt;
  if (auto problem = check_record(r)) {
    findings.push_back({row, problem->field, problem->message});
    return std::nullopt;
  }
  return r;
}

bool inputs_header_ok(const std::vector<std::string_view>& header) {
  if (header.size() < kCardioInputs.size()) return false;
  return std::equal(kCardioInputs.begin(), kCardioInputs.end(), header.begin());
}

std::string expected_header() {
  std::string h;
  for (auto name : kCardioInputs) {
    if (!h.empty()) h += ',';
    h += name;
  }
  return h;
}

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

CsvError::CsvError(std::vector<CsvFinding> findings) : Error(join_findings(findings)), findings_(std::move(findings)) {}

std::vector<PatientRecord> parse_patient_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw CsvError({{0, "", "missing header"}});
  const auto header = split(lines[0]);
  Layout layout;
  const bool ok = inputs_header_ok(header) &&
                  (header.size() == 7 || (header.size() == 8 && header[7] == "gender"));
  if (!ok) throw CsvError({{0, "", "header must be " + expected_header() + "[,gender]"}});
  if (header.size() == 8) layout.gender_col = 7;
  layout.columns = header.size();

  std::vector<PatientRecord> records;
  std::vector<CsvFinding> findings;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != layout.columns) {
      findings.push_back({i, "", "expected " + std::to_string(layout.columns) + " fields, found " +
                                     std::to_string(cells.size())});
      continue;
    }
    if (auto r = parse_record(cells, layout, i, findings)) records.push_back(*r);
  }
  if (!findings.empty()) throw CsvError(std::move(findings));
  return records;
}

std::vector<LabeledRecord> parse_labeled_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw CsvError({{0, "", "missing header"}});
  const auto header = split(lines[0]);
  if (!inputs_header_ok(header)) throw CsvError({{0, "", "header must start with " + expected_header()}});
  Layout layout;
  layout.columns = header.size();
  for (std::size_t c = 7; c < header.size(); ++c) {
    std::optional<std::size_t>* slot = nullptr;
    if (header[c] == "gender") slot = &layout.gender_col;
    if (header[c] == "expected_label") slot = &layout.expected_col;
    if (header[c] == "probability") slot = &layout.probability_col;
    if (header[c] == "human_decision") slot = &layout.human_col;
    if (slot == nullptr) throw CsvError({{0, std::string(header[c]), "unknown column"}});
    if (*slot) throw CsvError({{0, std::string(header[c]), "repeated column"}});
    *slot = c;
  }
  if (!layout.expected_col) throw CsvError({{0, "expected_label", "missing column"}});

  std::vector<LabeledRecord> rows;
  std::vector<CsvFinding> findings;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != layout.columns) {
      findings.push_back({i, "", "expected " + std::to_string(layout.columns) + " fields, found " +
                                     std::to_string(cells.size())});
      continue;
    }
    const std::size_t before = findings.size();
    auto record = parse_record(cells, layout, i, findings);
    LabeledRecord row;
    row.expected_label = std::string(cells[*layout.expected_col]);
    if (row.expected_label != "Low" && row.expected_label != "Medium" && row.expected_label != "High") {
      findings.push_back({i, "expected_label", "expected_label must be Low, Medium or High"});
    }
    if (layout.probability_col && !cells[*layout.probability_col].empty()) {
      auto p = parse_number(cells[*layout.probability_col]);
      if (!p || *p < 0.0 || *p > 1.0) {
        findings.push_back({i, "probability", "probability must be a number in [0, 1]"});
      } else {
        row.probability = *p;
      }
    }
    if (layout.human_col && !cells[*layout.human_col].empty()) {
      row.human_decision = std::string(cells[*layout.human_col]);
    }
    if (record && findings.size() == before) {
      row.record = *record;
      rows.push_back(std::move(row));
    }
  }
  if (!findings.empty()) throw CsvError(std::move(findings));
  return rows;
}

std::string labeled_to_csv(const std::vector<LabeledRecord>& rows) {
  std::string out = expected_header() + ",expected_label,probability,human_decision\n";
  for (const auto& row : rows) {
    for (double v : row.record.values()) out += format_number(v) + ",";
    out += row.expected_label + ",";
    if (row.probability) out += format_number(*row.probability);
    out += ",";
    if (row.human_decision) out += *row.human_decision;
    out += "\n";
  }
  return out;
}

}  // namespace fuzzcare
