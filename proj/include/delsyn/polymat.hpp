#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

// Matrix-valued polynomials in one variable s on [-tau, 0] and in two
// variables (s, theta) on [-tau_s, 0] x [-tau_t, 0], stored as dense
// coefficient tensors in the monomial basis.

namespace delsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Ordered monomial exponent list, graded-lex. Arity 1: 1, s, s^2, ...
// Arity 2: tensor product of two univariate bases.
struct MonomialBasis {
  int degree = 0;
  int arity = 1;
  // exponent tuples; arity-1 entries have second component 0.
  std::vector<std::pair<int, int>> exponents;

  static MonomialBasis univariate(int degree);
  static MonomialBasis bivariate(int degree);
  int size() const { return static_cast<int>(exponents.size()); }
};

// rows x cols polynomial matrix in s, domain [-tau, 0].
// coef[k] is the coefficient of s^k.
class PolyMat1 {
 public:
  PolyMat1() = default;
  PolyMat1(int rows, int cols, int degree, double tau);
  static PolyMat1 constant(const MatrixXd& c, double tau);
  static PolyMat1 zero(int rows, int cols, double tau) {
    return PolyMat1(rows, cols, 0, tau);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int degree() const { return static_cast<int>(coef_.size()) - 1; }
  double tau() const { return tau_; }

  MatrixXd& operator[](int k) { return coef_[k]; }
  const MatrixXd& operator[](int k) const { return coef_[k]; }

  PolyMat1 padded(int degree) const;   // zero-pad to at least `degree`
  PolyMat1 trimmed() const;            // drop trailing zero coefficients
  bool isZero(double tol = 0.0) const;

  double maxAbsCoef() const;

 private:
  int rows_ = 0, cols_ = 0;
  double tau_ = 1.0;
  std::vector<MatrixXd> coef_;
};

// rows x cols polynomial matrix in (s, theta), domain
// [-tau_s, 0] x [-tau_t, 0]. Independent degrees per variable;
// coefficient of s^a theta^b is coef(a, b).
class PolyMat2 {
 public:
  PolyMat2() = default;
  PolyMat2(int rows, int cols, int deg_s, int deg_t, double tau_s,
           double tau_t);
  static PolyMat2 zero(int rows, int cols, double tau_s, double tau_t) {
    return PolyMat2(rows, cols, 0, 0, tau_s, tau_t);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int degS() const { return deg_s_; }
  int degT() const { return deg_t_; }
  double tauS() const { return tau_s_; }
  double tauT() const { return tau_t_; }

  MatrixXd& at(int a, int b) { return coef_[idx(a, b)]; }
  const MatrixXd& at(int a, int b) const { return coef_[idx(a, b)]; }

  PolyMat2 padded(int deg_s, int deg_t) const;
  double maxAbsCoef() const;

 private:
  int idx(int a, int b) const { return a * (deg_t_ + 1) + b; }
  int rows_ = 0, cols_ = 0;
  int deg_s_ = 0, deg_t_ = 0;
  double tau_s_ = 1.0, tau_t_ = 1.0;
  std::vector<MatrixXd> coef_;
};

// ---- univariate operations ----

PolyMat1 add(const PolyMat1& a, const PolyMat1& b);
PolyMat1 sub(const PolyMat1& a, const PolyMat1& b);
PolyMat1 scale(const PolyMat1& a, double alpha);
PolyMat1 mul(const PolyMat1& a, const PolyMat1& b);
PolyMat1 transpose(const PolyMat1& a);
PolyMat1 differentiate(const PolyMat1& a);
MatrixXd evaluate(const PolyMat1& a, double s);
// Exact integral over the stored domain [-tau, 0].
MatrixXd definite_integral(const PolyMat1& a);
// Antiderivative with zero constant term.
PolyMat1 antiderivative(const PolyMat1& a);
// b(s) = a(alpha * s); the result lives on [-tau/alpha, 0].
PolyMat1 rescale_argument(const PolyMat1& a, double alpha);

// ---- bivariate operations ----

PolyMat2 add(const PolyMat2& a, const PolyMat2& b);
PolyMat2 scale(const PolyMat2& a, double alpha);
enum class Var { s, theta };
PolyMat2 differentiate(const PolyMat2& a, Var v);
MatrixXd evaluate(const PolyMat2& a, double s, double theta);
// Exact integral over the stored interval of one variable; result is a
// univariate polynomial in the remaining variable.
PolyMat1 partial_integral(const PolyMat2& a, Var over);
// Fix one variable at a point; result is univariate in the other.
PolyMat1 evaluate_partial(const PolyMat2& a, Var fixed, double value);
// b(s, theta) = a(alpha_s * s, alpha_t * theta).
PolyMat2 rescale_argument(const PolyMat2& a, double alpha_s, double alpha_t);
// b(s, theta) = a(theta, s)^T  (degrees and domains swap).
PolyMat2 transpose_swap(const PolyMat2& a);

}  // namespace delsyn
