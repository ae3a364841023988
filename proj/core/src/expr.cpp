#include "rekey/expr.hpp"

#include <cmath>

#include "rekey/errors.hpp"

namespace rekey {

Expr Expr::constant(double value) {
  auto node = std::make_shared<Node>();
  node->op = Op::kConst;
  node->value = value;
  return Expr(std::move(node));
}

Expr Expr::constant(double value, std::string name) {
  auto node = std::make_shared<Node>();
  node->op = Op::kConst;
  node->value = value;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::var(std::string name) {
  auto node = std::make_shared<Node>();
  node->op = Op::kVar;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->lhs = a.node_;
  node->rhs = b.node_;
  return Expr(std::move(node));
}

double Expr::eval_node(const Node& node, const Valuation& valuation) {
  switch (node.op) {
    case Op::kConst:
      return node.value;
    case Op::kVar:
      if (node.index < 0 ||
          static_cast<std::size_t>(node.index) >= valuation.size()) {
        throw ModelError("unbound variable '" + node.name + "' in expression");
      }
      return static_cast<double>(valuation[node.index]);
    case Op::kAdd:
      return eval_node(*node.lhs, valuation) + eval_node(*node.rhs, valuation);
    case Op::kSub:
      return eval_node(*node.lhs, valuation) - eval_node(*node.rhs, valuation);
    case Op::kMul:
      return eval_node(*node.lhs, valuation) * eval_node(*node.rhs, valuation);
    case Op::kDiv: {
      const double d = eval_node(*node.rhs, valuation);
      if (d == 0.0) throw ModelError("division by zero in rate expression");
      return eval_node(*node.lhs, valuation) / d;
    }
    case Op::kLt:
      return eval_node(*node.lhs, valuation) < eval_node(*node.rhs, valuation);
    case Op::kLe:
      return eval_node(*node.lhs, valuation) <= eval_node(*node.rhs, valuation);
    case Op::kGt:
      return eval_node(*node.lhs, valuation) > eval_node(*node.rhs, valuation);
    case Op::kGe:
      return eval_node(*node.lhs, valuation) >= eval_node(*node.rhs, valuation);
    case Op::kEq:
      return eval_node(*node.lhs, valuation) == eval_node(*node.rhs, valuation);
    case Op::kNe:
      return eval_node(*node.lhs, valuation) != eval_node(*node.rhs, valuation);
    case Op::kAnd:
      return eval_node(*node.lhs, valuation) != 0.0 &&
             eval_node(*node.rhs, valuation) != 0.0;
    case Op::kOr:
      return eval_node(*node.lhs, valuation) != 0.0 ||
             eval_node(*node.rhs, valuation) != 0.0;
    case Op::kNot:
      return eval_node(*node.lhs, valuation) == 0.0;
  }
  throw ModelError("corrupt expression node");
}

double Expr::eval(const Valuation& valuation) const {
  if (!node_) throw ModelError("evaluating an empty expression");
  return eval_node(*node_, valuation);
}

std::shared_ptr<const Expr::Node> Expr::bind_node(
    const Node& node, const std::unordered_map<std::string, int>& index_of) {
  auto copy = std::make_shared<Node>(node);
  if (node.op == Op::kVar) {
    auto it = index_of.find(node.name);
    if (it == index_of.end()) {
      throw ModelError("unknown variable '" + node.name + "' in expression");
    }
    copy->index = it->second;
  }
  if (node.lhs) copy->lhs = bind_node(*node.lhs, index_of);
  if (node.rhs) copy->rhs = bind_node(*node.rhs, index_of);
  return copy;
}

Expr Expr::bind(const std::unordered_map<std::string, int>& index_of) const {
  if (!node_) throw ModelError("binding an empty expression");
  return Expr(bind_node(*node_, index_of));
}

namespace {

const char* op_symbol(Expr::Op op) {
  switch (op) {
    case Expr::Op::kAdd: return "+";
    case Expr::Op::kSub: return "-";
    case Expr::Op::kMul: return "*";
    case Expr::Op::kDiv: return "/";
    case Expr::Op::kLt: return "<";
    case Expr::Op::kLe: return "<=";
    case Expr::Op::kGt: return ">";
    case Expr::Op::kGe: return ">=";
    case Expr::Op::kEq: return "=";
    case Expr::Op::kNe: return "!=";
    case Expr::Op::kAnd: return "&";
    case Expr::Op::kOr: return "|";
    default: return "?";
  }
}

}  // namespace

void Expr::print_node(const Node& node, std::string& out) {
  switch (node.op) {
    case Op::kConst:
      if (!node.name.empty()) {
        out += node.name;
      } else {
        out += std::to_string(node.value);
      }
      return;
    case Op::kVar:
      out += node.name;
      return;
    case Op::kNot:
      out += "!(";
      print_node(*node.lhs, out);
      out += ")";
      return;
    default:
      out += "(";
      print_node(*node.lhs, out);
      out += op_symbol(node.op);
      print_node(*node.rhs, out);
      out += ")";
  }
}

std::string Expr::str() const {
  if (!node_) return "<empty>";
  std::string out;
  print_node(*node_, out);
  return out;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kAdd, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kSub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kMul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kDiv, a, b); }
Expr operator<(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kLt, a, b); }
Expr operator<=(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kLe, a, b); }
Expr operator>(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kGt, a, b); }
Expr operator>=(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kGe, a, b); }
Expr operator==(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kEq, a, b); }
Expr operator!=(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kNe, a, b); }
Expr operator&&(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kAnd, a, b); }
Expr operator||(const Expr& a, const Expr& b) { return Expr::binary(Expr::Op::kOr, a, b); }
Expr operator!(const Expr& a) { return Expr::binary(Expr::Op::kNot, a, a); }

}  // namespace rekey
