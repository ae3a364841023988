#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace rekey {

using Value = std::int32_t;

/// Total assignment of every declared variable, in declaration order.
using Valuation = std::vector<Value>;

/// Small arithmetic/boolean expression tree over state variables and named
/// constants. This is deliberately not a scripting language: the node set is
/// exactly what guarded-command rates and guards need. Comparisons and logic
/// evaluate to 0/1; a guard holds when the expression is nonzero.
class Expr {
 public:
  enum class Op : std::uint8_t {
    kConst,
    kVar,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kLt,
    kLe,
    kGt,
    kGe,
    kEq,
    kNe,
    kAnd,
    kOr,
    kNot,
  };

  Expr() = default;

  static Expr constant(double value);
  /// Named constant; the name is kept for diagnostics only.
  static Expr constant(double value, std::string name);
  static Expr boolean(bool value) { return constant(value ? 1.0 : 0.0); }
  static Expr var(std::string name);

  bool valid() const { return node_ != nullptr; }

  /// Evaluates against a valuation. Variables must have been bound first.
  double eval(const Valuation& valuation) const;
  bool eval_bool(const Valuation& valuation) const {
    return eval(valuation) != 0.0;
  }

  /// Returns a copy of this expression with every variable resolved to its
  /// index in the composite variable list. Unknown names throw ModelError.
  Expr bind(const std::unordered_map<std::string, int>& index_of) const;

  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator<(const Expr& a, const Expr& b);
  friend Expr operator<=(const Expr& a, const Expr& b);
  friend Expr operator>(const Expr& a, const Expr& b);
  friend Expr operator>=(const Expr& a, const Expr& b);
  friend Expr operator==(const Expr& a, const Expr& b);
  friend Expr operator!=(const Expr& a, const Expr& b);
  friend Expr operator&&(const Expr& a, const Expr& b);
  friend Expr operator||(const Expr& a, const Expr& b);
  friend Expr operator!(const Expr& a);

 private:
  struct Node {
    Op op = Op::kConst;
    double value = 0.0;
    std::string name;  // variable or constant name
    int index = -1;    // variable slot after bind()
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr binary(Op op, const Expr& a, const Expr& b);
  static double eval_node(const Node& node, const Valuation& valuation);
  static std::shared_ptr<const Node> bind_node(
      const Node& node, const std::unordered_map<std::string, int>& index_of);
  static void print_node(const Node& node, std::string& out);

  std::shared_ptr<const Node> node_;
};

}  // namespace rekey
