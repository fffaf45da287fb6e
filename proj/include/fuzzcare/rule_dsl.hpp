#pragma once

// Line-oriented rule language, one statement per line:
//
//   [RULE <id> [PINNED|GENERATED] :] IF <var> IS <Term> [AND <var> IS <Term>]... THEN <var> IS <Term>
//
// Keywords are case-insensitive; identifiers and term labels keep their case.
// `#` starts a comment that runs to the end of the line. Statements without a
// RULE header get the id "r<n>" (n counts statements from 1) and generated
// provenance. OR is reserved and rejected.

#include <string>
#include <string_view>
#include <vector>

#include "fuzzcare/rules.hpp"

namespace fuzzcare {

/// Throws ParseError(line, column, message) on malformed input. Variables
/// and terms are not checked here; RuleBase::make resolves them.
std::vector<Rule> parse_rules(std::string_view text);

/// One statement, no trailing newline.
std::string render_rule(const Rule& rule);

/// Every rule on its own line with an explicit RULE header, so that
/// parse_rules(render_rules(rules)) == rules.
std::string render_rules(const std::vector<Rule>& rules);

/// The IF ... THEN ... part only, as shown in reports.
std::string render_condition(const Rule& rule);

}  // namespace fuzzcare
