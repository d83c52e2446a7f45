#include "misbelief/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace misbelief {

struct Expr::Node {
  enum class Op { Num, Var, Param, Index, Neg, Not, Bin, Call };
  Op op = Op::Num;
  double value = 0.0;
  std::string name;  // variable, binary operator, or function name
  std::size_t param = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    auto n = parse_or();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression \"" + s_ + "\": " + what + " at column " +
                                std::to_string(pos_ + 1));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  static NodePtr bin(const std::string& op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Bin;
    n->name = op;
    n->args = {std::move(l), std::move(r)};
    return n;
  }

  NodePtr parse_or() {
    auto l = parse_and();
    while (eat("||")) l = bin("||", l, parse_and());
    return l;
  }
  NodePtr parse_and() {
    auto l = parse_cmp();
    while (eat("&&")) l = bin("&&", l, parse_cmp());
    return l;
  }
  NodePtr parse_cmp() {
    auto l = parse_add();
    for (const char* op : {"<=", ">=", "==", "!=", "<", ">"})
      if (eat(op)) return bin(op, l, parse_add());
    return l;
  }
  NodePtr parse_add() {
    auto l = parse_mul();
    for (;;) {
      if (eat("+")) l = bin("+", l, parse_mul());
      else if (eat("-")) l = bin("-", l, parse_mul());
      else return l;
    }
  }
  NodePtr parse_mul() {
    auto l = parse_unary();
    for (;;) {
      if (eat("*")) l = bin("*", l, parse_unary());
      else if (eat("/")) l = bin("/", l, parse_unary());
      else return l;
    }
  }
  NodePtr parse_unary() {
    if (eat("-")) {
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Neg;
      n->args = {parse_unary()};
      return n;
    }
    if (eat("!")) {
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Not;
      n->args = {parse_unary()};
      return n;
    }
    return parse_pow();
  }
  NodePtr parse_pow() {
    auto base = parse_atom();
    if (eat("^")) return bin("^", base, parse_unary());  // right associative
    return base;
  }
  NodePtr parse_atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = parse_or();
      if (!eat(")")) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      auto n = std::make_shared<Expr::Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Expr::Node>();
      if (eat("(")) {
        n->op = Op::Call;
        n->name = id;
        if (!eat(")")) {
          do n->args.push_back(parse_or());
          while (eat(","));
          if (!eat(")")) fail("expected ')' after arguments");
        }
        static const std::vector<std::pair<std::string, std::size_t>> arity = {
            {"abs", 1}, {"exp", 1}, {"log", 1}, {"sqrt", 1}, {"min", 2}, {"max", 2}, {"pow", 2}};
        bool known = false;
        for (const auto& [f, k] : arity)
          if (f == id) {
            known = true;
            if (n->args.size() != k) fail("wrong argument count for " + id);
          }
        if (!known) fail("unknown function " + id);
        return n;
      }
      if (id == "p" && eat("[")) {
        n->op = Op::Index;
        n->args = {parse_or()};
        if (!eat("]")) fail("expected ']'");
        return n;
      }
      if (id.size() > 1 && id[0] == 'p' &&
          id.find_first_not_of("0123456789", 1) == std::string::npos) {
        n->op = Op::Param;
        n->param = std::stoul(id.substr(1));
        return n;
      }
      n->op = Op::Var;
      n->name = id;
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

double eval_node(const Expr::Node& n, const ExprContext& ctx, int depth);

double param_at(const ExprContext& ctx, double idx) {
  double r = std::round(idx);
  if (std::abs(r - idx) > 1e-9 || r < 0 || r >= static_cast<double>(ctx.p.size()))
    throw std::out_of_range("parameter index " + std::to_string(idx) + " out of range");
  return ctx.p[static_cast<std::size_t>(r)];
}

double eval_node(const Expr::Node& n, const ExprContext& ctx, int depth) {
  if (depth > 256) throw std::invalid_argument("expression bindings nest too deeply");
  auto arg = [&](std::size_t k) { return eval_node(*n.args[k], ctx, depth + 1); };
  switch (n.op) {
    case Op::Num:
      return n.value;
    case Op::Param:
      return param_at(ctx, static_cast<double>(n.param));
    case Op::Index:
      return param_at(ctx, arg(0));
    case Op::Var:
      if (n.name == "a") return ctx.a;
      if (n.name == "i") return ctx.i;
      if (ctx.bindings) {
        auto it = ctx.bindings->find(n.name);
        if (it != ctx.bindings->end()) {
          if (it->second.empty()) throw std::invalid_argument("empty binding " + n.name);
          return eval_node(*it->second.root(), ctx, depth + 1);
        }
      }
      throw std::invalid_argument("unknown variable " + n.name);
    case Op::Neg:
      return -arg(0);
    case Op::Not:
      return arg(0) == 0.0 ? 1.0 : 0.0;
    case Op::Call: {
      const auto& f = n.name;
      if (f == "abs") return std::abs(arg(0));
      if (f == "exp") return std::exp(arg(0));
      if (f == "log") return std::log(arg(0));
      if (f == "sqrt") return std::sqrt(arg(0));
      if (f == "min") return std::min(arg(0), arg(1));
      if (f == "max") return std::max(arg(0), arg(1));
      return std::pow(arg(0), arg(1));
    }
    case Op::Bin: {
      const auto& o = n.name;
      if (o == "&&") return (arg(0) != 0.0 && arg(1) != 0.0) ? 1.0 : 0.0;
      if (o == "||") return (arg(0) != 0.0 || arg(1) != 0.0) ? 1.0 : 0.0;
      double l = arg(0), r = arg(1);
      if (o == "+") return l + r;
      if (o == "-") return l - r;
      if (o == "*") return l * r;
      if (o == "/") return l / r;
      if (o == "^") return std::pow(l, r);
      if (o == "<") return l < r;
      if (o == ">") return l > r;
      if (o == "<=") return l <= r;
      if (o == ">=") return l >= r;
      if (o == "==") return l == r;
      return l != r;
    }
  }
  return 0.0;
}

}  // namespace

Expr Expr::parse(const std::string& source) {
  Expr e;
  e.source_ = source;
  e.root_ = Parser(source).parse();
  return e;
}

double Expr::eval(const ExprContext& ctx) const {
  if (!root_) throw std::invalid_argument("evaluating an empty expression");
  return eval_node(*root_, ctx, 0);
}

}  // namespace misbelief
