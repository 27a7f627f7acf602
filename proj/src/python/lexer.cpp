#include "vespucci/python/lexer.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

namespace vespucci::py {

namespace {

constexpr std::string_view kKeywords[] = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",  "await",  "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};

// Longest first so that a linear scan finds the maximal munch.
constexpr std::string_view kOperators[] = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "==", "<=", ">=", "**", "//", "<<",
    ">>",  "->",  ":=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=", "(",
    ")",   "[",   "]",   "{",   "}",   ":",  ",",  ";",  ".",  "+",  "-",  "*",  "/",
    "%",   "&",   "|",   "^",   "~",   "<",  ">",  "=",  "@"};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2)
    return false;
  std::string lower;
  for (char c : word)
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "r" || lower == "u" || lower == "f" || lower == "b" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

char closing_for(char open) {
  switch (open) {
  case '(':
    return ')';
  case '[':
    return ']';
  default:
    return '}';
  }
}

class Lexer {
public:
  Lexer(std::string_view src, const LexOptions &options) : src_(src), options_(options) {}

  std::vector<Token> run() {
    bool at_line_start = true;
    while (true) {
      if (at_line_start) {
        at_line_start = false;
        if (brackets_.empty() && !begin_logical_line())
          break;
        if (i_ >= src_.size())
          break;
        if (blank_line_skipped_) {
          blank_line_skipped_ = false;
          at_line_start = true;
          continue;
        }
      }
      if (i_ >= src_.size())
        break;

      unsigned char c = static_cast<unsigned char>(src_[i_]);
      if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n')
          advance();
      } else if (c == '\\') {
        if (i_ + 1 < src_.size() && src_[i_ + 1] == '\n') {
          Pos at = here();
          advance();
          advance();
          if (crosses_unit_boundary())
            throw SyntaxError("unexpected end of cell after line continuation character", at);
        } else {
          throw SyntaxError("unexpected character after line continuation character", here());
        }
      } else if (c == '\n') {
        if (brackets_.empty() && line_has_tokens_) {
          push(TokenKind::Newline, "", here());
          line_has_tokens_ = false;
        }
        advance();
        if (crosses_unit_boundary()) {
          if (!brackets_.empty())
            throw SyntaxError(std::string("'") + brackets_.back().open + "' was never closed",
                              brackets_.back().pos);
          reset_pending_ = true;
        }
        at_line_start = brackets_.empty();
      } else if (is_ident_start(c)) {
        lex_name_or_prefixed_string();
      } else if (std::isdigit(c) || (c == '.' && i_ + 1 < src_.size() &&
                                     std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        lex_number();
      } else if (c == '"' || c == '\'') {
        lex_string(here(), "");
      } else {
        lex_operator();
      }
    }

    if (!brackets_.empty())
      throw SyntaxError(std::string("'") + brackets_.back().open + "' was never closed",
                        brackets_.back().pos);
    if (line_has_tokens_)
      push(TokenKind::Newline, "", here());
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokenKind::Dedent, "", here());
    }
    push(TokenKind::EndMarker, "", here());
    return std::move(tokens_);
  }

private:
  struct Bracket {
    char open;
    Pos pos;
  };

  Pos here() const { return {line_, col_}; }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 0;
    } else {
      ++col_;
    }
    ++i_;
  }

  bool crosses_unit_boundary() const { return options_.unit_start_lines.count(line_) > 0; }

  void push(TokenKind kind, std::string text, Pos pos) {
    Token tok;
    tok.kind = kind;
    tok.text = std::move(text);
    tok.pos = pos;
    tok.end_line = line_;
    if (kind != TokenKind::Newline && kind != TokenKind::Indent && kind != TokenKind::Dedent &&
        kind != TokenKind::EndMarker)
      line_has_tokens_ = true;
    tokens_.push_back(std::move(tok));
  }

  // Handles indentation at the start of a physical line outside brackets.
  // Returns false at end of input.
  bool begin_logical_line() {
    std::size_t j = i_;
    int width = 0;
    while (j < src_.size() && (src_[j] == ' ' || src_[j] == '\t' || src_[j] == '\f')) {
      if (src_[j] == '\t')
        width = (width / 8 + 1) * 8;
      else if (src_[j] == '\f')
        width = 0;
      else
        ++width;
      ++j;
    }
    if (j >= src_.size()) {
      while (i_ < j)
        advance();
      return false;
    }
    if (src_[j] == '#' || src_[j] == '\n' || src_[j] == '\r') {
      // Blank or comment-only lines do not affect indentation.
      while (i_ < src_.size() && src_[i_] != '\n')
        advance();
      if (i_ < src_.size()) {
        advance();
        if (crosses_unit_boundary())
          reset_pending_ = true;
      }
      blank_line_skipped_ = true;
      return true;
    }

    if (reset_pending_) {
      reset_pending_ = false;
      while (indents_.size() > 1) {
        indents_.pop_back();
        push(TokenKind::Dedent, "", here());
      }
    }
    while (i_ < j)
      advance();

    if (width > indents_.back()) {
      indents_.push_back(width);
      push(TokenKind::Indent, "", here());
    } else if (width < indents_.back()) {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(TokenKind::Dedent, "", here());
      }
      if (width != indents_.back())
        throw SyntaxError("unindent does not match any outer indentation level", here());
    }
    return true;
  }

  void lex_name_or_prefixed_string() {
    Pos start = here();
    std::size_t begin = i_;
    while (i_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[i_])))
      advance();
    std::string_view word = src_.substr(begin, i_ - begin);
    if (i_ < src_.size() && (src_[i_] == '"' || src_[i_] == '\'') && is_string_prefix(word)) {
      lex_string(start, std::string(word));
      return;
    }
    push(TokenKind::Name, std::string(word), start);
  }

  void lex_number() {
    Pos start = here();
    std::size_t begin = i_;
    auto digits = [&] {
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
        char d = src_[i_];
        // Exponent sign inside a decimal literal.
        if ((d == 'e' || d == 'E') && i_ + 1 < src_.size() &&
            (src_[i_ + 1] == '+' || src_[i_ + 1] == '-')) {
          advance();
        }
        advance();
      }
    };
    bool radix = src_[i_] == '0' && i_ + 1 < src_.size() &&
                 std::string_view("xXoObB").find(src_[i_ + 1]) != std::string_view::npos;
    if (radix) {
      advance();
      advance();
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        advance();
    } else {
      digits();
      if (i_ < src_.size() && src_[i_] == '.') {
        advance();
        digits();
      }
    }
    push(TokenKind::Number, std::string(src_.substr(begin, i_ - begin)), start);
  }

  void lex_string(Pos start, std::string prefix) {
    char quote = src_[i_];
    bool triple = src_.substr(i_, 3) == std::string(3, quote);
    advance();
    if (triple) {
      advance();
      advance();
    }
    Pos body_pos = here();
    std::size_t body_begin = i_;
    while (true) {
      if (i_ >= src_.size())
        throw SyntaxError(triple ? "unterminated triple-quoted string literal"
                                 : "unterminated string literal",
                          start);
      char c = src_[i_];
      if (c == '\\') {
        advance();
        if (i_ < src_.size()) {
          bool newline = src_[i_] == '\n';
          advance();
          if (newline && crosses_unit_boundary())
            throw SyntaxError("unterminated string literal", start);
        }
        continue;
      }
      if (c == '\n') {
        if (!triple)
          throw SyntaxError("unterminated string literal", start);
        advance();
        if (crosses_unit_boundary())
          throw SyntaxError("unterminated triple-quoted string literal", start);
        continue;
      }
      if (c == quote && (!triple || src_.substr(i_, 3) == std::string(3, quote))) {
        std::string body(src_.substr(body_begin, i_ - body_begin));
        advance();
        if (triple) {
          advance();
          advance();
        }
        Token tok;
        tok.kind = TokenKind::String;
        tok.text = std::move(body);
        tok.pos = start;
        tok.end_line = line_;
        tok.is_fstring = std::any_of(prefix.begin(), prefix.end(), [](char p) { return p == 'f' || p == 'F'; });
        tok.prefix = std::move(prefix);
        tok.body_pos = body_pos;
        tokens_.push_back(std::move(tok));
        line_has_tokens_ = true;
        return;
      }
      advance();
    }
  }

  void lex_operator() {
    Pos start = here();
    std::string_view rest = src_.substr(i_);
    for (std::string_view op : kOperators) {
      if (rest.substr(0, op.size()) != op)
        continue;
      for (std::size_t k = 0; k < op.size(); ++k)
        advance();
      if (op.size() == 1) {
        char c = op.front();
        if (c == '(' || c == '[' || c == '{') {
          brackets_.push_back({c, start});
        } else if (c == ')' || c == ']' || c == '}') {
          if (brackets_.empty())
            throw SyntaxError(std::string("unmatched '") + c + "'", start);
          if (closing_for(brackets_.back().open) != c)
            throw SyntaxError(std::string("closing parenthesis '") + c +
                                  "' does not match opening parenthesis '" + brackets_.back().open + "'",
                              start);
          brackets_.pop_back();
        }
      }
      push(TokenKind::Op, std::string(op), start);
      return;
    }
    throw SyntaxError(std::string("invalid character '") + src_[i_] + "'", start);
  }

  std::string_view src_;
  const LexOptions &options_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 0;
  std::vector<Token> tokens_;
  std::vector<int> indents_{0};
  std::vector<Bracket> brackets_;
  bool line_has_tokens_ = false;
  bool reset_pending_ = false;
  bool blank_line_skipped_ = false;
};

} // namespace

bool is_keyword(std::string_view word) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

std::vector<Token> tokenize(std::string_view source, const LexOptions &options) {
  return Lexer(source, options).run();
}

} // namespace vespucci::py
