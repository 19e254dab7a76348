#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace lingrow {

// Tiny arithmetic expressions in x and y for boundary data: numbers, x, y,
// pi, e, + - * / ^, parentheses, and the functions sin cos tan exp log sqrt
// abs sinh cosh tanh.  Compiled once into a tree evaluated per node.
class Expression {
public:
  static Expression parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (!p.done())
      throw std::invalid_argument("expression: trailing input at '" +
                                  text.substr(p.pos()) + "'");
    return e;
  }

  double operator()(double x, double y) const { return root_->eval(x, y); }

private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double x, double y) const = 0;
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Const final : Node {
    double v;
    explicit Const(double v_) : v(v_) {}
    double eval(double, double) const override { return v; }
  };
  struct Var final : Node {
    bool is_x;
    explicit Var(bool x_) : is_x(x_) {}
    double eval(double x, double y) const override { return is_x ? x : y; }
  };
  struct Binary final : Node {
    char op;
    NodePtr a, b;
    Binary(char o, NodePtr a_, NodePtr b_) : op(o), a(std::move(a_)), b(std::move(b_)) {}
    double eval(double x, double y) const override {
      const double u = a->eval(x, y), v = b->eval(x, y);
      switch (op) {
        case '+': return u + v;
        case '-': return u - v;
        case '*': return u * v;
        case '/': return u / v;
        case '^': return std::pow(u, v);
      }
      return 0.0;
    }
  };
  struct Unary final : Node {
    std::function<double(double)> f;
    NodePtr a;
    Unary(std::function<double(double)> f_, NodePtr a_)
        : f(std::move(f_)), a(std::move(a_)) {}
    double eval(double x, double y) const override { return f(a->eval(x, y)); }
  };

  class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}
    bool done() const { return i_ >= s_.size(); }
    std::size_t pos() const { return i_; }
    void skip_ws() {
      while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    NodePtr parse_expr() {  // + -
      NodePtr lhs = parse_term();
      for (;;) {
        skip_ws();
        if (peek() == '+' || peek() == '-') {
          const char op = take();
          lhs = std::make_shared<Binary>(op, lhs, parse_term());
        } else {
          return lhs;
        }
      }
    }

  private:
    NodePtr parse_term() {  // * /
      NodePtr lhs = parse_unary();
      for (;;) {
        skip_ws();
        if (peek() == '*' || peek() == '/') {
          const char op = take();
          lhs = std::make_shared<Binary>(op, lhs, parse_unary());
        } else {
          return lhs;
        }
      }
    }
    NodePtr parse_unary() {
      skip_ws();
      if (peek() == '-') {
        take();
        return std::make_shared<Binary>('-', std::make_shared<Const>(0.0),
                                        parse_unary());
      }
      if (peek() == '+') take();
      return parse_power();
    }
    NodePtr parse_power() {  // right-assoc ^
      NodePtr base = parse_atom();
      skip_ws();
      if (peek() == '^') {
        take();
        return std::make_shared<Binary>('^', base, parse_unary());
      }
      return base;
    }
    NodePtr parse_atom() {
      skip_ws();
      if (done()) throw std::invalid_argument("expression: unexpected end");
      const char c = peek();
      if (c == '(') {
        take();
        NodePtr inner = parse_expr();
        skip_ws();
        if (take() != ')')
          throw std::invalid_argument("expression: missing ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        const double v = std::stod(s_.substr(i_), &used);
        i_ += used;
        return std::make_shared<Const>(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (i_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
          id.push_back(s_[i_++]);
        if (id == "x") return std::make_shared<Var>(true);
        if (id == "y") return std::make_shared<Var>(false);
        if (id == "pi") return std::make_shared<Const>(M_PI);
        if (id == "e") return std::make_shared<Const>(M_E);
        skip_ws();
        if (peek() != '(')
          throw std::invalid_argument("expression: unknown identifier '" + id + "'");
        take();
        NodePtr arg = parse_expr();
        skip_ws();
        if (take() != ')')
          throw std::invalid_argument("expression: missing ')' after " + id);
        static const std::map<std::string, double (*)(double)> kFuncs = {
            {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
            {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
            {"abs", std::fabs},  {"sinh", std::sinh}, {"cosh", std::cosh},
            {"tanh", std::tanh}};
        auto it = kFuncs.find(id);
        if (it == kFuncs.end())
          throw std::invalid_argument("expression: unknown function '" + id + "'");
        return std::make_shared<Unary>(it->second, arg);
      }
      throw std::invalid_argument(std::string("expression: unexpected '") + c + "'");
    }

    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    char take() { return i_ < s_.size() ? s_[i_++] : '\0'; }
    const std::string& s_;
    std::size_t i_ = 0;
  };

  NodePtr root_;
};

} // namespace lingrow
