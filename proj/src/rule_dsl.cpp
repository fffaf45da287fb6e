#include "fuzzcare/rule_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "fuzzcare/error.hpp"

namespace fuzzcare {

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '.' || c == '-' || c >= 0x80;
}

bool keyword_is(const Token& tok, std::string_view kw) {
  return tok.text.size() == kw.size() &&
         std::equal(tok.text.begin(), tok.text.end(), kw.begin(), [](char a, char b) {
           return std::toupper(static_cast<unsigned char>(a)) == b;
         });
}

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const auto c = static_cast<unsigned char>(line[i]);
    if (c == '#') break;
    if (std::isspace(c)) {
      ++i;
    } else if (c == ':') {
      tokens.push_back({":", i + 1});
      ++i;
    } else if (is_word_char(c)) {
      const std::size_t start = i;
      while (i < line.size() && is_word_char(static_cast<unsigned char>(line[i]))) ++i;
      tokens.push_back({std::string(line.substr(start, i - start)), start + 1});
    } else {
      throw ParseError(line_no, i + 1, std::string("unexpected character '") + line[i] + "'");
    }
  }
  return tokens;
}

bool is_reserved(const Token& tok) {
  for (std::string_view kw : {"RULE", "PINNED", "GENERATED", "IF", "AND", "OR", "THEN", "IS"}) {
    if (keyword_is(tok, kw)) return true;
  }
  return false;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, std::size_t line_no, std::size_t line_len)
      : tokens_(std::move(tokens)), line_no_(line_no), end_column_(line_len + 1) {}

  Rule parse(std::size_t statement_no) {
    Rule rule;
    rule.id = "r" + std::to_string(statement_no);
    if (peek_keyword("RULE")) {
      ++pos_;
      rule.id = expect_word("rule id");
      if (peek_keyword("PINNED")) {
        rule.provenance = Provenance::pinned;
        ++pos_;
      } else if (peek_keyword("GENERATED")) {
        ++pos_;
      }
      expect_symbol(":");
    }
    expect_keyword("IF");
    rule.antecedent.clauses.push_back(parse_clause());
    while (!at_end() && !peek_keyword("THEN")) {
      if (peek_keyword("OR")) fail("OR is reserved; only AND conjunctions are supported");
      expect_keyword("AND");
      rule.antecedent.clauses.push_back(parse_clause());
    }
    expect_keyword("THEN");
    const Clause out = parse_clause();
    rule.consequent = {out.variable, out.term};
    if (!at_end()) fail("unexpected '" + tokens_[pos_].text + "' after the consequent");
    return rule;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  bool peek_keyword(std::string_view kw) const { return !at_end() && keyword_is(tokens_[pos_], kw); }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_no_, at_end() ? end_column_ : tokens_[pos_].column, message);
  }

  std::string found() const { return at_end() ? "end of line" : "'" + tokens_[pos_].text + "'"; }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) fail("expected " + std::string(kw) + ", found " + found());
    ++pos_;
  }

  void expect_symbol(std::string_view sym) {
    if (at_end() || tokens_[pos_].text != sym) fail("expected '" + std::string(sym) + "', found " + found());
    ++pos_;
  }

  std::string expect_word(const char* what) {
    if (at_end() || tokens_[pos_].text == ":") fail(std::string("expected ") + what + ", found " + found());
    return tokens_[pos_++].text;
  }

  Clause parse_clause() {
    if (!at_end() && is_reserved(tokens_[pos_])) fail("expected a variable name, found " + found());
    Clause clause;
    clause.variable = expect_word("a variable name");
    expect_keyword("IS");
    clause.term = expect_word("a term label");
    return clause;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  std::size_t end_column_;
};

}  // namespace

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::set<std::string, std::less<>> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;

    auto tokens = tokenize(line, line_no);
    if (!tokens.empty()) {
      const std::size_t first_column = tokens.front().column;
      Rule rule = LineParser(std::move(tokens), line_no, line.size()).parse(rules.size() + 1);
      if (!ids.insert(rule.id).second) throw ParseError(line_no, first_column, "duplicate rule id '" + rule.id + "'");
      rules.push_back(std::move(rule));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return rules;
}

std::string render_condition(const Rule& rule) {
  std::string out = "IF ";
  for (std::size_t i = 0; i < rule.antecedent.clauses.size(); ++i) {
    if (i > 0) out += " AND ";
    out += rule.antecedent.clauses[i].variable + " IS " + rule.antecedent.clauses[i].term;
  }
  out += " THEN " + rule.consequent.variable + " IS " + rule.consequent.term;
  return out;
}

std::string render_rule(const Rule& rule) {
  std::string out = "RULE " + rule.id;
  if (rule.provenance == Provenance::pinned) out += " PINNED";
  out += ": ";
  out += render_condition(rule);
  return out;
}

std::string render_rules(const std::vector<Rule>& rules) {
  std::string out;
  for (const auto& rule : rules) {
    out += render_rule(rule);
    out += '\n';
  }
  return out;
}

}  // namespace fuzzcare
