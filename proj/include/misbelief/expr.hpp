#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>

namespace misbelief {

class Expr;

struct ExprContext {
  double a = 0.0;                    // action value
  double i = 0.0;                    // action index
  std::span<const double> p;         // parameter point, p0 or p[k]
  const std::map<std::string, Expr>* bindings = nullptr;
};

// Small arithmetic language for kernel means/variances and grid predicates:
// numbers, a, i, p0..pN, p[expr], named bindings, + - * / ^, comparisons,
// && || !, and abs exp log sqrt min max pow.
class Expr {
 public:
  Expr() = default;
  static Expr parse(const std::string& source);

  double eval(const ExprContext& ctx) const;
  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }
  bool operator==(const Expr& o) const { return source_ == o.source_; }

  struct Node;
  const Node* root() const { return root_.get(); }

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace misbelief
