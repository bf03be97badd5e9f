#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace symstab {

/// Thrown when evaluating an expression produces a non-finite value
/// (in practice: exp overflow).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with the byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Immutable symbolic expression over a fixed coordinate list.
///
/// Node kinds: constants, coordinate references, n-ary sums and products,
/// non-negative integer powers, negation, and sin/cos/exp. Construction
/// performs constant folding and drops zero terms; no further
/// simplification is attempted. Expressions are freely shareable between
/// threads once built.
class Expr {
 public:
  enum class Kind : std::uint8_t {
    Constant,
    Coordinate,
    Sum,
    Product,
    Power,
    Negate,
    Sin,
    Cos,
    Exp,
  };

  /// Default-constructs the zero expression.
  Expr();

  static Expr constant(double value);
  static Expr coordinate(int index);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr pow(Expr base, int exponent);
  static Expr negate(Expr inner);
  static Expr sin(Expr inner);
  static Expr cos(Expr inner);
  static Expr exp(Expr inner);

  Kind kind() const;
  bool is_constant() const { return kind() == Kind::Constant; }
  /// True iff the expression is the literal constant 0.
  bool is_zero() const;
  double constant_value() const;  // requires kind() == Constant
  int coordinate_index() const;   // requires kind() == Coordinate
  int exponent() const;           // requires kind() == Power
  std::size_t arity() const;
  Expr arg(std::size_t i) const;

  /// Smallest dimension a point must have to evaluate this expression.
  int min_dimension() const;

  double eval(std::span<const double> point) const;
  double eval(const Eigen::VectorXd& point) const;

  /// Exact partial derivative with respect to coordinate `coord`.
  Expr derivative(int coord) const;

  /// Re-parseable text form: explicit `*`, explicit parentheses.
  /// Coordinates print by name when `coords` is given, as `#<index>` otherwise
  /// (both forms parse back).
  std::string str(std::span<const std::string> coords = {}) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  explicit Expr(NodePtr node);
  static const Node& deref(const NodePtr& p);

  NodePtr node_;

  friend class CompiledExpr;
};

/// Parses `text` over the given coordinate names.
///
/// Grammar: + - * / ^ ( ), decimal literals, coordinate names, and
/// sin/cos/exp calls. `^` binds tightest (non-negative integer literal
/// exponents only), then unary minus, then * and /, then + and -.
/// Division is only allowed by nonzero constant subexpressions.
Expr parse_expr(std::string_view text, std::span<const std::string> coords);

/// Replaces coordinate i by `replacements[i]` everywhere in `e`.
Expr substitute(const Expr& e, std::span<const Expr> replacements);

/// Expression flattened to a postfix tape for fast repeated evaluation.
class CompiledExpr {
 public:
  CompiledExpr();  // zero
  explicit CompiledExpr(const Expr& e);

  double eval(const double* point) const;
  double eval(std::span<const double> point) const { return eval(point.data()); }

  /// True iff the tape is the literal constant 0.
  bool is_trivially_zero() const;

 private:
  enum class Op : std::uint8_t { Const, Coord, Add, Mul, Neg, Sin, Cos, Exp, PowInt };
  struct Ins {
    Op op;
    std::int32_t arg;
    double imm;
  };
  std::vector<Ins> tape_;
};

/// A scalar function of `dim` coordinates with all first and second
/// partials derived symbolically up front (thread-safe to evaluate).
class ScalarField {
 public:
  ScalarField(Expr f, int dim);

  int dim() const { return dim_; }
  const Expr& expr() const { return f_; }
  const Expr& partial(int i) const;
  const Expr& partial(int i, int j) const;  // symmetric storage

  double value(std::span<const double> z) const;
  Eigen::VectorXd gradient(std::span<const double> z) const;
  /// Symmetric by construction: entry (i,j) is computed once per pair.
  Eigen::MatrixXd hessian(std::span<const double> z) const;

  double value(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& z) const;

  /// Allocation-free variants for hot loops; `out` must be presized.
  void gradient_into(const double* z, Eigen::VectorXd& out) const;
  void hessian_into(const double* z, Eigen::MatrixXd& out) const;

  const CompiledExpr& compiled() const { return cf_; }
  const CompiledExpr& compiled_partial(int i) const;
  const CompiledExpr& compiled_partial(int i, int j) const;

 private:
  int pair_index(int i, int j) const;

  Expr f_;
  int dim_;
  std::vector<Expr> grad_;
  std::vector<Expr> hess_;  // upper triangle, row-major
  CompiledExpr cf_;
  std::vector<CompiledExpr> cgrad_;
  std::vector<CompiledExpr> chess_;
};

/// Exact gradient of `e` evaluated at `z` (dimension taken from z).
Eigen::VectorXd gradient(const Expr& e, const Eigen::VectorXd& z);

/// Exact Hessian of `e` at `z`; symmetric to machine precision.
Eigen::MatrixXd hessian(const Expr& e, const Eigen::VectorXd& z);

}  // namespace symstab
