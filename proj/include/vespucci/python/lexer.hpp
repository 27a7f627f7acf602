#pragma once

#include "vespucci/python/ast.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vespucci::py {

class SyntaxError : public std::runtime_error {
public:
  SyntaxError(const std::string &message, Pos pos)
      : std::runtime_error(message), pos_(pos) {}

  Pos pos() const noexcept { return pos_; }

private:
  Pos pos_;
};

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
  TokenKind kind = TokenKind::EndMarker;
  std::string text; // identifier, operator, number; for strings the body between the quotes
  Pos pos;
  int end_line = 0;
  // String tokens only.
  std::string prefix;
  bool is_fstring = false;
  Pos body_pos;
};

struct LexOptions {
  /// Program lines at which a new compilation unit (notebook cell) starts.
  /// Brackets, strings and continuations may not cross these lines, and
  /// indentation resets to column 0 at each of them.
  std::set<int> unit_start_lines;
};

/// Tokenizes Python 3 source. Throws SyntaxError.
std::vector<Token> tokenize(std::string_view source, const LexOptions &options = {});

bool is_keyword(std::string_view word);

} // namespace vespucci::py
