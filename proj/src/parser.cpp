// Recursive-descent parser for the rule language:
//
//   Head(col {, col}) :- Atom {, Atom} {, Pred}.
//   col  := name | fn(name) as name
//   Atom := Rel[@alias] | Rel[@alias](name [as name] {, ...})
//   Pred := operand op operand
//
// `%` starts a comment that runs to the end of the line.

#include <cctype>
#include <map>
#include <set>

#include "provex/ir.hpp"

namespace provex {

namespace {

enum class Tok { Ident, Int, Dec, Str, LParen, RParen, Comma, Dot, Turnstile, At, Op, End };

struct Token {
  Tok type;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      int l = line_, c = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", l, c});
        return out;
      }
      char ch = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::string s;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          s += advance();
        out.push_back({Tok::Ident, s, l, c});
      } else if (std::isdigit(static_cast<unsigned char>(ch)) ||
                 (ch == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        std::string s;
        s += advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) s += advance();
        bool dec = false;
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          dec = true;
          s += advance();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) s += advance();
        }
        out.push_back({dec ? Tok::Dec : Tok::Int, s, l, c});
      } else if (ch == '\'' || ch == '"') {
        char quote = advance();
        std::string s;
        while (pos_ < src_.size() && src_[pos_] != quote) {
          if (src_[pos_] == '\n') throw ParseError("unterminated string literal", l, c);
          s += advance();
        }
        if (pos_ >= src_.size()) throw ParseError("unterminated string literal", l, c);
        advance();
        out.push_back({Tok::Str, s, l, c});
      } else if (ch == '(') {
        out.push_back({Tok::LParen, std::string(1, advance()), l, c});
      } else if (ch == ')') {
        out.push_back({Tok::RParen, std::string(1, advance()), l, c});
      } else if (ch == ',') {
        out.push_back({Tok::Comma, std::string(1, advance()), l, c});
      } else if (ch == '.') {
        out.push_back({Tok::Dot, std::string(1, advance()), l, c});
      } else if (ch == '@') {
        out.push_back({Tok::At, std::string(1, advance()), l, c});
      } else if (ch == ':' && peek(1) == '-') {
        advance();
        advance();
        out.push_back({Tok::Turnstile, ":-", l, c});
      } else if (ch == '<' || ch == '>' || ch == '=' || ch == '!') {
        std::string s(1, advance());
        if (pos_ < src_.size() && (src_[pos_] == '=' || (s == "<" && src_[pos_] == '>'))) s += advance();
        if (s == "!") throw ParseError("expected '!='", l, c);
        out.push_back({Tok::Op, s, l, c});
      } else {
        throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
      }
    }
  }

 private:
  char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  char advance() {
    char ch = src_[pos_++];
    if (ch == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return ch;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::optional<AggFn> agg_from_name(const std::string& s) {
  if (s == "sum") return AggFn::Sum;
  if (s == "count") return AggFn::Count;
  if (s == "min") return AggFn::Min;
  if (s == "max") return AggFn::Max;
  if (s == "avg") return AggFn::Avg;
  return std::nullopt;
}

CmpOp op_from_text(const Token& t) {
  if (t.text == "<") return CmpOp::Lt;
  if (t.text == "<=") return CmpOp::Le;
  if (t.text == "=" || t.text == "==") return CmpOp::Eq;
  if (t.text == "!=" || t.text == "<>") return CmpOp::Ne;
  if (t.text == ">=") return CmpOp::Ge;
  if (t.text == ">") return CmpOp::Gt;
  throw ParseError("unknown comparison '" + t.text + "'", t.line, t.column);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    Program p;
    while (cur().type != Tok::End) p.rules.push_back(rule());
    if (p.rules.empty()) throw ParseError("program has no rules", cur().line, cur().column);
    check_structure(p);
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& next() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string found = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.line, t.column);
  }

  Token expect(Tok type, const char* what) {
    if (cur().type != type) fail(std::string("expected ") + what);
    return toks_[pos_++];
  }

  bool accept(Tok type) {
    if (cur().type != type) return false;
    ++pos_;
    return true;
  }

  bool accept_keyword(const char* kw) {
    if (cur().type == Tok::Ident && cur().text == kw) {
      ++pos_;
      return true;
    }
    return false;
  }

  Rule rule() {
    Rule r;
    Token head = expect(Tok::Ident, "rule head name");
    r.head = head.text;
    r.line = head.line;
    head_line_[r.head] = {head.line, head.column};
    expect(Tok::LParen, "'(' after head name");
    do r.head_columns.push_back(head_column());
    while (accept(Tok::Comma));
    expect(Tok::RParen, "')' closing the head");
    expect(Tok::Turnstile, "':-'");
    do body_item(r);
    while (accept(Tok::Comma));
    expect(Tok::Dot, "'.' ending the rule");
    if (r.atoms.empty()) throw ParseError("rule for " + r.head + " has no body atom", head.line, head.column);
    return r;
  }

  HeadColumn head_column() {
    Token name = expect(Tok::Ident, "head column");
    if (cur().type == Tok::LParen) {
      auto fn = agg_from_name(name.text);
      if (!fn) throw ParseError("unknown aggregate '" + name.text + "'", name.line, name.column);
      ++pos_;
      Token arg = expect(Tok::Ident, "aggregate argument");
      expect(Tok::RParen, "')' after aggregate argument");
      if (!accept_keyword("as")) fail("expected 'as' naming the aggregate");
      Token out = expect(Tok::Ident, "aggregate output name");
      return HeadColumn{fn, arg.text, out.text};
    }
    return HeadColumn{std::nullopt, name.text, name.text};
  }

  Operand operand() {
    const Token& t = cur();
    switch (t.type) {
      case Tok::Ident:
        ++pos_;
        return AttrRef{t.text};
      case Tok::Int:
        ++pos_;
        return parse_value(t.text, Kind::Int);
      case Tok::Dec:
        ++pos_;
        return parse_value(t.text, Kind::Decimal);
      case Tok::Str:
        ++pos_;
        return Value(t.text);
      default:
        fail("expected an attribute or literal");
    }
  }

  void body_item(Rule& r) {
    bool predicate = cur().type != Tok::Ident || next().type == Tok::Op;
    if (predicate) {
      const Token start = cur();
      Predicate p;
      p.left = operand();
      if (cur().type != Tok::Op) fail("expected a comparison operator");
      p.op = op_from_text(toks_[pos_++]);
      p.right = operand();
      if (!std::holds_alternative<AttrRef>(p.left) && !std::holds_alternative<AttrRef>(p.right))
        throw ParseError("predicate compares two constants", start.line, start.column);
      r.predicates.push_back(std::move(p));
      return;
    }
    Token rel = expect(Tok::Ident, "relation name");
    TableAtom a;
    a.relation = rel.text;
    if (accept(Tok::At)) {
      if (cur().type != Tok::Ident && cur().type != Tok::Int) fail("expected an occurrence alias after '@'");
      a.alias = toks_[pos_++].text;
    }
    if (accept(Tok::LParen)) {
      std::vector<Renaming> args;
      do {
        Token src = expect(Tok::Ident, "attribute name");
        std::string exposed = src.text;
        if (accept_keyword("as")) exposed = expect(Tok::Ident, "new attribute name").text;
        args.push_back({src.text, exposed});
      } while (accept(Tok::Comma));
      expect(Tok::RParen, "')' closing the argument list");
      a.args = std::move(args);
    }
    r.atoms.push_back(std::move(a));
  }

  void check_structure(const Program& p) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
      const Rule& r = p.rules[i];
      auto [line, col] = head_line_.at(r.head);
      if (!index.emplace(r.head, i).second) throw ParseError("duplicate head name '" + r.head + "'", r.line, 1);
      std::set<std::string> outputs;
      for (const auto& hc : r.head_columns)
        if (!outputs.insert(hc.output).second)
          throw ParseError("duplicate head column '" + hc.output + "' in " + r.head, line, col);
    }
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
      const Rule& r = p.rules[i];
      for (const auto& a : r.atoms) {
        auto it = index.find(a.relation);
        if (it != index.end() && it->second >= i)
          throw ParseError("forward reference to '" + a.relation + "' (defined by a later or the same rule)", r.line,
                           1);
      }
      // Safety is decidable here only when every atom lists its attributes.
      bool complete = true;
      std::set<std::string> exposed;
      for (const auto& a : r.atoms) {
        if (!a.args) {
          complete = false;
          break;
        }
        for (const auto& ren : *a.args) exposed.insert(ren.exposed);
      }
      if (!complete) continue;
      auto check = [&](const std::string& attr) {
        if (!exposed.count(attr))
          throw ParseError("unsafe rule: attribute '" + attr + "' does not occur in the body of " + r.head, r.line, 1);
      };
      for (const auto& hc : r.head_columns) check(hc.attribute);
      for (const auto& pr : r.predicates)
        for (const auto& attr : pr.attributes()) check(attr);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, std::pair<int, int>> head_line_;
};

}  // namespace

Program parse_program(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.run();
}

Program parse_program(std::string_view text, const Catalog& catalog) {
  return bind_program(parse_program(text), catalog);
}

}  // namespace provex
