#include "hhomog/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "hhomog/errors.hpp"

namespace hhomog {

namespace {

struct Node {
  enum class Kind { Number, Variable, Unary, Binary, Call } kind;
  double number = 0.0;
  int variable = 0;
  char op = 0;
  double (*fn)(double) = nullptr;
  std::unique_ptr<Node> lhs, rhs;
};

double eval(const Node& node, const GroupPoint& x) {
  switch (node.kind) {
    case Node::Kind::Number:
      return node.number;
    case Node::Kind::Variable:
      return x[node.variable];
    case Node::Kind::Unary:
      return -eval(*node.lhs, x);
    case Node::Kind::Call:
      return node.fn(eval(*node.lhs, x));
    case Node::Kind::Binary: {
      const double a = eval(*node.lhs, x);
      const double b = eval(*node.rhs, x);
      switch (node.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  }
  return 0.0;
}

double fabs_fn(double v) { return std::abs(v); }
double sin_fn(double v) { return std::sin(v); }
double cos_fn(double v) { return std::cos(v); }
double tan_fn(double v) { return std::tan(v); }
double exp_fn(double v) { return std::exp(v); }
double log_fn(double v) { return std::log(v); }
double sqrt_fn(double v) { return std::sqrt(v); }

class Parser {
 public:
  Parser(const std::string& text, int n) : s_(text), n_(n) {}

  std::unique_ptr<Node> parse() {
    auto node = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static std::unique_ptr<Node> binary(char op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::Binary;
    node->op = op;
    node->lhs = std::move(a);
    node->rhs = std::move(b);
    return node;
  }

  std::unique_ptr<Node> expr() {
    auto node = term();
    for (;;) {
      if (accept('+')) {
        node = binary('+', std::move(node), term());
      } else if (accept('-')) {
        node = binary('-', std::move(node), term());
      } else {
        return node;
      }
    }
  }

  std::unique_ptr<Node> term() {
    auto node = unary();
    for (;;) {
      if (accept('*')) {
        node = binary('*', std::move(node), unary());
      } else if (accept('/')) {
        node = binary('/', std::move(node), unary());
      } else {
        return node;
      }
    }
  }

  std::unique_ptr<Node> unary() {
    if (accept('-')) {
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Unary;
      node->lhs = unary();
      return node;
    }
    if (accept('+')) return unary();
    return power();
  }

  // Right-associative; binds tighter than unary minus on its left operand.
  std::unique_ptr<Node> power() {
    auto base = primary();
    if (accept('^')) return binary('^', std::move(base), unary());
    return base;
  }

  std::unique_ptr<Node> primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      auto node = expr();
      if (!accept(')')) fail("expected ')'");
      return node;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Number;
      node->number = v;
      return node;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      return identifier(s_.substr(start, pos_ - start));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::unique_ptr<Node> identifier(const std::string& id) {
    auto node = std::make_unique<Node>();
    if (id == "pi" || id == "e") {
      node->kind = Node::Kind::Number;
      node->number = id == "pi" ? std::numbers::pi : std::numbers::e;
      return node;
    }
    static const std::vector<std::pair<std::string, double (*)(double)>> functions = {
        {"sin", sin_fn},   {"cos", cos_fn}, {"tan", tan_fn},   {"exp", exp_fn},
        {"log", log_fn},   {"sqrt", sqrt_fn}, {"abs", fabs_fn}};
    for (const auto& [name, fn] : functions) {
      if (id == name) {
        if (!accept('(')) fail("expected '(' after " + id);
        node->kind = Node::Kind::Call;
        node->fn = fn;
        node->lhs = expr();
        if (!accept(')')) fail("expected ')'");
        return node;
      }
    }
    node->kind = Node::Kind::Variable;
    const int N = 2 * n_ + 1;
    if (n_ == 1 && (id == "x1" || id == "x2" || id == "x3")) {
      node->variable = id[1] - '1';
      return node;
    }
    if (id.size() >= 2 && id[0] == 'c') {
      try {
        const int axis = std::stoi(id.substr(1));
        if (axis >= 0 && axis < N) {
          node->variable = axis;
          return node;
        }
      } catch (const std::exception&) {
      }
    }
    fail("unknown identifier '" + id + "'");
  }

  std::string s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(const GroupPoint&)> compile_expression(const std::string& text, int n) {
  std::shared_ptr<const Node> root = Parser(text, n).parse();
  return [root](const GroupPoint& x) { return eval(*root, x); };
}

}  // namespace hhomog
