#pragma once

#include "vespucci/python/ast.hpp"
#include "vespucci/python/lexer.hpp"

#include <string_view>

namespace vespucci::py {

/// Parses a Python 3 module. Throws SyntaxError.
Module parse_module(std::string_view source, const LexOptions &options = {});

/// Parses a single expression (used for f-string replacement fields).
/// Positions are reported as if the text started at `origin`. Throws SyntaxError.
ExprPtr parse_expression(std::string_view source, Pos origin = {1, 0});

} // namespace vespucci::py
