#pragma once

// Knowledge-base document format (UTF-8 JSON):
//
//   { "version": "...",
//     "calibration": {"procedure", "rows", "matches"},      (optional)
//     "variables": [ {"name", "units", "universe": [lo, hi], "anchored",
//                     "terms": [ {"label", "kind", "params": [...]} ]} ],
//     "output": { same shape as a variable },
//     "pinned_rules": "<rule-language text>",
//     "policy": {"id", "weights": [...], "thresholds": [lo, hi]} }

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fuzzcare/cardio_kb.hpp"

namespace fuzzcare {

using Json = nlohmann::ordered_json;

Json variable_to_json(const LinguisticVariable& variable);
LinguisticVariable variable_from_json(const Json& j);

Json kb_to_json(const KnowledgeBase& kb);
/// Throws KbError (or ParseError for the embedded rules) on a malformed document.
KnowledgeBase kb_from_json(const Json& j);

/// Canonical serialisation: two-space indent, trailing newline.
std::string dump_kb(const KnowledgeBase& kb);
KnowledgeBase kb_from_document(std::string_view text);

KnowledgeBase load_kb_file(const std::filesystem::path& path);
/// Throws std::runtime_error when the file cannot be written.
void save_kb_file(const KnowledgeBase& kb, const std::filesystem::path& path);

}  // namespace fuzzcare
