#include "symstab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace symstab {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int index = -1;      // Coordinate
  int exponent = 0;    // Power
  std::vector<NodePtr> args;
};

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset)
    : std::runtime_error(std::move(message)), offset_(offset) {}

Expr::Expr(NodePtr node) : node_(std::move(node)) {}

Expr::Expr() : Expr(constant(0.0)) {}

const Expr::Node& Expr::deref(const NodePtr& p) { return *p; }

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::coordinate(int index) {
  if (index < 0) throw std::invalid_argument("coordinate index must be >= 0");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Coordinate;
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  std::vector<NodePtr> kept;
  double folded = 0.0;
  for (auto& t : terms) {
    if (t.node_->kind == Kind::Sum) {
      for (const auto& a : t.node_->args) {
        if (a->kind == Kind::Constant)
          folded += a->value;
        else
          kept.push_back(a);
      }
    } else if (t.node_->kind == Kind::Constant) {
      folded += t.node_->value;
    } else {
      kept.push_back(t.node_);
    }
  }
  if (folded != 0.0) kept.push_back(constant(folded).node_);
  if (kept.empty()) return constant(0.0);
  if (kept.size() == 1) return Expr(kept.front());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sum;
  n->args = std::move(kept);
  return Expr(std::move(n));
}

Expr Expr::product(std::vector<Expr> factors) {
  std::vector<NodePtr> kept;
  double folded = 1.0;
  for (auto& f : factors) {
    if (f.node_->kind == Kind::Product) {
      for (const auto& a : f.node_->args) {
        if (a->kind == Kind::Constant)
          folded *= a->value;
        else
          kept.push_back(a);
      }
    } else if (f.node_->kind == Kind::Constant) {
      folded *= f.node_->value;
    } else {
      kept.push_back(f.node_);
    }
  }
  if (folded == 0.0) return constant(0.0);
  if (folded != 1.0) kept.insert(kept.begin(), constant(folded).node_);
  if (kept.empty()) return constant(1.0);
  if (kept.size() == 1) return Expr(kept.front());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->args = std::move(kept);
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("integer power must be >= 0");
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  if (base.node_->kind == Kind::Constant)
    return constant(std::pow(base.node_->value, exponent));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->exponent = exponent;
  n->args = {base.node_};
  return Expr(std::move(n));
}

Expr Expr::negate(Expr inner) {
  if (inner.node_->kind == Kind::Constant) return constant(-inner.node_->value);
  if (inner.node_->kind == Kind::Negate) return Expr(inner.node_->args[0]);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->args = {inner.node_};
  return Expr(std::move(n));
}

Expr Expr::sin(Expr inner) {
  if (inner.node_->kind == Kind::Constant) return constant(std::sin(inner.node_->value));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sin;
  n->args = {inner.node_};
  return Expr(std::move(n));
}

Expr Expr::cos(Expr inner) {
  if (inner.node_->kind == Kind::Constant) return constant(std::cos(inner.node_->value));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cos;
  n->args = {inner.node_};
  return Expr(std::move(n));
}

Expr Expr::exp(Expr inner) {
  if (inner.node_->kind == Kind::Constant) return constant(std::exp(inner.node_->value));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exp;
  n->args = {inner.node_};
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }

bool Expr::is_zero() const {
  return node_->kind == Kind::Constant && node_->value == 0.0;
}

double Expr::constant_value() const {
  if (node_->kind != Kind::Constant) throw std::logic_error("not a constant");
  return node_->value;
}

int Expr::coordinate_index() const {
  if (node_->kind != Kind::Coordinate) throw std::logic_error("not a coordinate");
  return node_->index;
}

int Expr::exponent() const {
  if (node_->kind != Kind::Power) throw std::logic_error("not a power");
  return node_->exponent;
}

std::size_t Expr::arity() const { return node_->args.size(); }

Expr Expr::arg(std::size_t i) const { return Expr(node_->args.at(i)); }

int Expr::min_dimension() const {
  int d = 0;
  if (node_->kind == Kind::Coordinate) d = node_->index + 1;
  for (const auto& a : node_->args) d = std::max(d, Expr(a).min_dimension());
  return d;
}

double Expr::eval(std::span<const double> point) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Coordinate:
      if (n.index >= static_cast<int>(point.size()))
        throw EvalError("point has too few coordinates");
      return point[static_cast<std::size_t>(n.index)];
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& a : n.args) s += Expr(a).eval(point);
      return s;
    }
    case Kind::Product: {
      double p = 1.0;
      for (const auto& a : n.args) p *= Expr(a).eval(point);
      return p;
    }
    case Kind::Power: {
      double b = Expr(n.args[0]).eval(point);
      double r = 1.0, acc = b;
      for (int e = n.exponent; e > 0; e >>= 1) {
        if (e & 1) r *= acc;
        acc *= acc;
      }
      return r;
    }
    case Kind::Negate:
      return -Expr(n.args[0]).eval(point);
    case Kind::Sin:
      return std::sin(Expr(n.args[0]).eval(point));
    case Kind::Cos:
      return std::cos(Expr(n.args[0]).eval(point));
    case Kind::Exp: {
      double v = std::exp(Expr(n.args[0]).eval(point));
      if (!std::isfinite(v)) throw EvalError("exp overflow during evaluation");
      return v;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

double Expr::eval(const Eigen::VectorXd& point) const {
  return eval(std::span<const double>(point.data(), static_cast<std::size_t>(point.size())));
}

Expr Expr::derivative(int coord) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return constant(0.0);
    case Kind::Coordinate:
      return constant(n.index == coord ? 1.0 : 0.0);
    case Kind::Sum: {
      std::vector<Expr> terms;
      terms.reserve(n.args.size());
      for (const auto& a : n.args) terms.push_back(Expr(a).derivative(coord));
      return sum(std::move(terms));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        Expr di = Expr(n.args[i]).derivative(coord);
        if (di.is_zero()) continue;
        std::vector<Expr> factors;
        factors.push_back(std::move(di));
        for (std::size_t j = 0; j < n.args.size(); ++j)
          if (j != i) factors.push_back(Expr(n.args[j]));
        terms.push_back(product(std::move(factors)));
      }
      return sum(std::move(terms));
    }
    case Kind::Power: {
      Expr base(n.args[0]);
      Expr db = base.derivative(coord);
      if (db.is_zero()) return constant(0.0);
      return product({constant(static_cast<double>(n.exponent)),
                      pow(base, n.exponent - 1), std::move(db)});
    }
    case Kind::Negate:
      return negate(Expr(n.args[0]).derivative(coord));
    case Kind::Sin: {
      Expr inner(n.args[0]);
      Expr di = inner.derivative(coord);
      if (di.is_zero()) return constant(0.0);
      return product({cos(inner), std::move(di)});
    }
    case Kind::Cos: {
      Expr inner(n.args[0]);
      Expr di = inner.derivative(coord);
      if (di.is_zero()) return constant(0.0);
      return negate(product({sin(inner), std::move(di)}));
    }
    case Kind::Exp: {
      Expr inner(n.args[0]);
      Expr di = inner.derivative(coord);
      if (di.is_zero()) return constant(0.0);
      return product({exp(inner), std::move(di)});
    }
  }
  throw std::logic_error("unreachable expression kind");
}

namespace {

void print_node(const Expr& e, std::span<const std::string> coords, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      out += format_double(e.constant_value());
      return;
    case Expr::Kind::Coordinate: {
      int idx = e.coordinate_index();
      if (idx < static_cast<int>(coords.size()))
        out += coords[static_cast<std::size_t>(idx)];
      else
        out += "#" + std::to_string(idx);
      return;
    }
    default:
      break;
  }
  out += "(";
  switch (e.kind()) {
    case Expr::Kind::Sum:
      for (std::size_t i = 0; i < e.arity(); ++i) {
        if (i) out += " + ";
        print_node(e.arg(i), coords, out);
      }
      break;
    case Expr::Kind::Product:
      for (std::size_t i = 0; i < e.arity(); ++i) {
        if (i) out += " * ";
        print_node(e.arg(i), coords, out);
      }
      break;
    case Expr::Kind::Power:
      print_node(e.arg(0), coords, out);
      out += "^" + std::to_string(e.exponent());
      break;
    case Expr::Kind::Negate:
      out += "-";
      print_node(e.arg(0), coords, out);
      break;
    case Expr::Kind::Sin:
      out += "sin(";
      print_node(e.arg(0), coords, out);
      out += ")";
      break;
    case Expr::Kind::Cos:
      out += "cos(";
      print_node(e.arg(0), coords, out);
      out += ")";
      break;
    case Expr::Kind::Exp:
      out += "exp(";
      print_node(e.arg(0), coords, out);
      out += ")";
      break;
    default:
      break;
  }
  out += ")";
}

}  // namespace

std::string Expr::str(std::span<const std::string> coords) const {
  std::string out;
  print_node(*this, coords, out);
  return out;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::negate(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator-(const Expr& a) { return Expr::negate(a); }

// --------------------------------------------------------------------------
// Parser
// --------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> coords)
      : text_(text), coords_(coords) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr acc = parse_term();
    for (;;) {
      if (consume('+')) {
        acc = acc + parse_term();
      } else if (consume('-')) {
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    for (;;) {
      if (consume('*')) {
        acc = acc * parse_unary();
      } else if (peek('/')) {
        std::size_t at = pos_;
        ++pos_;
        Expr rhs = parse_unary();
        if (!rhs.is_constant())
          throw ParseError("division is only allowed by constants", at);
        double v = rhs.constant_value();
        if (v == 0.0) throw ParseError("division by zero constant", at);
        acc = acc * Expr::constant(1.0 / v);
      } else {
        return acc;
      }
    }
  }

  Expr parse_unary() {
    if (consume('-')) return Expr::negate(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (!peek('^')) return base;
    ++pos_;
    skip_ws();
    std::size_t at = pos_;
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw ParseError("exponent must be a non-negative integer literal", at);
    long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000) throw ParseError("exponent too large", at);
      ++pos_;
    }
    return Expr::pow(std::move(base), static_cast<int>(v));
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!consume(')')) throw ParseError("missing ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '#')
      return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t at = pos_;
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", at);
    // Reject an exponent-like tail the caller meant as a name (e.g. "2q").
    pos_ += static_cast<std::size_t>(end - begin);
    if (pos_ < text_.size()) {
      char next = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(next)) || next == '_')
        throw ParseError("number runs into identifier", pos_);
    }
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    std::size_t at = pos_;
    std::size_t start = pos_;
    if (text_[pos_] == '#') ++pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (peek('(')) {
      ++pos_;
      Expr inner = parse_sum();
      if (!consume(')')) throw ParseError("missing ')'", pos_);
      if (name == "sin") return Expr::sin(std::move(inner));
      if (name == "cos") return Expr::cos(std::move(inner));
      if (name == "exp") return Expr::exp(std::move(inner));
      throw ParseError("unknown function '" + name + "'", at);
    }
    // Printed form uses #<index> so output round-trips without a name table.
    if (name.size() > 1 && name[0] == '#') {
      int idx = std::atoi(name.c_str() + 1);
      if (coords_.empty() || idx < static_cast<int>(coords_.size()))
        return Expr::coordinate(idx);
      throw ParseError("coordinate index out of range: " + name, at);
    }
    for (std::size_t i = 0; i < coords_.size(); ++i)
      if (coords_[i] == name) return Expr::coordinate(static_cast<int>(i));
    throw ParseError("unknown identifier '" + name + "'", at);
  }

  std::string_view text_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> coords) {
  return Parser(text, coords).parse();
}

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Coordinate: {
      int idx = e.coordinate_index();
      if (idx >= static_cast<int>(replacements.size()))
        throw std::invalid_argument("substitute: no replacement for coordinate");
      return replacements[static_cast<std::size_t>(idx)];
    }
    case Expr::Kind::Sum: {
      std::vector<Expr> args;
      for (std::size_t i = 0; i < e.arity(); ++i)
        args.push_back(substitute(e.arg(i), replacements));
      return Expr::sum(std::move(args));
    }
    case Expr::Kind::Product: {
      std::vector<Expr> args;
      for (std::size_t i = 0; i < e.arity(); ++i)
        args.push_back(substitute(e.arg(i), replacements));
      return Expr::product(std::move(args));
    }
    case Expr::Kind::Power:
      return Expr::pow(substitute(e.arg(0), replacements), e.exponent());
    case Expr::Kind::Negate:
      return Expr::negate(substitute(e.arg(0), replacements));
    case Expr::Kind::Sin:
      return Expr::sin(substitute(e.arg(0), replacements));
    case Expr::Kind::Cos:
      return Expr::cos(substitute(e.arg(0), replacements));
    case Expr::Kind::Exp:
      return Expr::exp(substitute(e.arg(0), replacements));
  }
  throw std::logic_error("unreachable expression kind");
}

// --------------------------------------------------------------------------
// CompiledExpr
// --------------------------------------------------------------------------

CompiledExpr::CompiledExpr() { tape_.push_back({Op::Const, 0, 0.0}); }

CompiledExpr::CompiledExpr(const Expr& e) {
  // Postorder flatten; n-ary nodes become chains of binary ops. The eval
  // stack holds every pending sibling value, so its high-water mark is
  // checked here against the fixed eval() buffer.
  struct Frame {
    Expr e;
    std::size_t next_child;
  };
  std::vector<Frame> stack;
  stack.push_back({e, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_child < f.e.arity()) {
      Expr child = f.e.arg(f.next_child);
      ++f.next_child;
      stack.push_back({std::move(child), 0});
      continue;
    }
    const Expr& n = f.e;
    switch (n.kind()) {
      case Expr::Kind::Constant:
        tape_.push_back({Op::Const, 0, n.constant_value()});
        break;
      case Expr::Kind::Coordinate:
        tape_.push_back({Op::Coord, n.coordinate_index(), 0.0});
        break;
      case Expr::Kind::Sum:
        for (std::size_t i = 1; i < n.arity(); ++i) tape_.push_back({Op::Add, 0, 0.0});
        break;
      case Expr::Kind::Product:
        for (std::size_t i = 1; i < n.arity(); ++i) tape_.push_back({Op::Mul, 0, 0.0});
        break;
      case Expr::Kind::Power:
        tape_.push_back({Op::PowInt, n.exponent(), 0.0});
        break;
      case Expr::Kind::Negate:
        tape_.push_back({Op::Neg, 0, 0.0});
        break;
      case Expr::Kind::Sin:
        tape_.push_back({Op::Sin, 0, 0.0});
        break;
      case Expr::Kind::Cos:
        tape_.push_back({Op::Cos, 0, 0.0});
        break;
      case Expr::Kind::Exp:
        tape_.push_back({Op::Exp, 0, 0.0});
        break;
    }
    stack.pop_back();
  }
  int height = 0, high_water = 0;
  for (const Ins& ins : tape_) {
    if (ins.op == Op::Const || ins.op == Op::Coord)
      ++height;
    else if (ins.op == Op::Add || ins.op == Op::Mul)
      --height;
    high_water = std::max(high_water, height);
  }
  if (high_water > 127) throw std::invalid_argument("expression too deep to compile");
}

double CompiledExpr::eval(const double* point) const {
  double stack[128];
  int top = -1;
  for (const Ins& ins : tape_) {
    switch (ins.op) {
      case Op::Const:
        stack[++top] = ins.imm;
        break;
      case Op::Coord:
        stack[++top] = point[ins.arg];
        break;
      case Op::Add:
        stack[top - 1] += stack[top];
        --top;
        break;
      case Op::Mul:
        stack[top - 1] *= stack[top];
        --top;
        break;
      case Op::Neg:
        stack[top] = -stack[top];
        break;
      case Op::Sin:
        stack[top] = std::sin(stack[top]);
        break;
      case Op::Cos:
        stack[top] = std::cos(stack[top]);
        break;
      case Op::Exp:
        stack[top] = std::exp(stack[top]);
        break;
      case Op::PowInt: {
        double b = stack[top], r = 1.0;
        for (int e = ins.arg; e > 0; e >>= 1) {
          if (e & 1) r *= b;
          b *= b;
        }
        stack[top] = r;
        break;
      }
    }
  }
  return stack[0];
}

bool CompiledExpr::is_trivially_zero() const {
  return tape_.size() == 1 && tape_[0].op == Op::Const && tape_[0].imm == 0.0;
}

// --------------------------------------------------------------------------
// ScalarField
// --------------------------------------------------------------------------

ScalarField::ScalarField(Expr f, int dim) : f_(std::move(f)), dim_(dim) {
  if (dim_ < 0) throw std::invalid_argument("ScalarField: negative dimension");
  if (f_.min_dimension() > dim_)
    throw std::invalid_argument("ScalarField: expression references coordinates past dim");
  grad_.reserve(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) grad_.push_back(f_.derivative(i));
  hess_.reserve(static_cast<std::size_t>(dim_ * (dim_ + 1) / 2));
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) hess_.push_back(grad_[static_cast<std::size_t>(i)].derivative(j));
  cf_ = CompiledExpr(f_);
  for (const auto& g : grad_) cgrad_.emplace_back(g);
  for (const auto& h : hess_) chess_.emplace_back(h);
}

int ScalarField::pair_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * dim_ - i * (i - 1) / 2 + (j - i);
}

const Expr& ScalarField::partial(int i) const { return grad_.at(static_cast<std::size_t>(i)); }

const Expr& ScalarField::partial(int i, int j) const {
  return hess_.at(static_cast<std::size_t>(pair_index(i, j)));
}

const CompiledExpr& ScalarField::compiled_partial(int i) const {
  return cgrad_.at(static_cast<std::size_t>(i));
}

const CompiledExpr& ScalarField::compiled_partial(int i, int j) const {
  return chess_.at(static_cast<std::size_t>(pair_index(i, j)));
}

double ScalarField::value(std::span<const double> z) const { return cf_.eval(z.data()); }

Eigen::VectorXd ScalarField::gradient(std::span<const double> z) const {
  Eigen::VectorXd g(dim_);
  for (int i = 0; i < dim_; ++i) g[i] = cgrad_[static_cast<std::size_t>(i)].eval(z.data());
  if (!g.allFinite()) throw EvalError("non-finite gradient");
  return g;
}

Eigen::MatrixXd ScalarField::hessian(std::span<const double> z) const {
  Eigen::MatrixXd h(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      double v = chess_[static_cast<std::size_t>(pair_index(i, j))].eval(z.data());
      h(i, j) = v;
      h(j, i) = v;
    }
  if (!h.allFinite()) throw EvalError("non-finite hessian");
  return h;
}

void ScalarField::gradient_into(const double* z, Eigen::VectorXd& out) const {
  for (int i = 0; i < dim_; ++i) out[i] = cgrad_[static_cast<std::size_t>(i)].eval(z);
}

void ScalarField::hessian_into(const double* z, Eigen::MatrixXd& out) const {
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      double v = chess_[static_cast<std::size_t>(pair_index(i, j))].eval(z);
      out(i, j) = v;
      out(j, i) = v;
    }
}

double ScalarField::value(const Eigen::VectorXd& z) const {
  return value(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

Eigen::VectorXd ScalarField::gradient(const Eigen::VectorXd& z) const {
  return gradient(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

Eigen::MatrixXd ScalarField::hessian(const Eigen::VectorXd& z) const {
  return hessian(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

Eigen::VectorXd gradient(const Expr& e, const Eigen::VectorXd& z) {
  ScalarField f(e, static_cast<int>(z.size()));
  return f.gradient(z);
}

Eigen::MatrixXd hessian(const Expr& e, const Eigen::VectorXd& z) {
  ScalarField f(e, static_cast<int>(z.size()));
  return f.hessian(z);
}

}  // namespace symstab
