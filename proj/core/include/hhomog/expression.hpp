#pragma once

// Tiny closed-form expression language for smooth coefficient fields, e.g.
// "2 + sin(pi*x1)*sin(pi*x2)". Variables: x1, x2, x3 when n = 1; c0..c{2n}
// (raw coordinates) for any n. Functions: sin cos tan exp log sqrt abs.
// Constants: pi, e. Operators: + - * / ^ and parentheses.

#include <functional>
#include <string>

#include "hhomog/heisenberg.hpp"

namespace hhomog {

/// Compiles `text` into an evaluator; throws ConfigError on syntax errors or
/// unknown identifiers.
std::function<double(const GroupPoint&)> compile_expression(const std::string& text, int n);

}  // namespace hhomog
