#include "delsyn/polymat.hpp"

#include <cmath>

namespace delsyn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool sameDomain(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

}  // namespace

MonomialBasis MonomialBasis::univariate(int degree) {
  check(degree >= 0, "MonomialBasis: degree must be non-negative");
  MonomialBasis b;
  b.degree = degree;
  b.arity = 1;
  for (int k = 0; k <= degree; ++k) b.exponents.emplace_back(k, 0);
  return b;
}

MonomialBasis MonomialBasis::bivariate(int degree) {
  check(degree >= 0, "MonomialBasis: degree must be non-negative");
  MonomialBasis b;
  b.degree = degree;
  b.arity = 2;
  for (int a = 0; a <= degree; ++a)
    for (int k = 0; k <= degree; ++k) b.exponents.emplace_back(a, k);
  return b;
}

PolyMat1::PolyMat1(int rows, int cols, int degree, double tau)
    : rows_(rows), cols_(cols), tau_(tau) {
  check(rows >= 0 && cols >= 0, "PolyMat1: dimensions must be non-negative");
  check(degree >= 0, "PolyMat1: degree must be non-negative");
  check(tau > 0, "PolyMat1: domain bound tau must be positive");
  coef_.assign(degree + 1, MatrixXd::Zero(rows, cols));
}

PolyMat1 PolyMat1::constant(const MatrixXd& c, double tau) {
  PolyMat1 p(static_cast<int>(c.rows()), static_cast<int>(c.cols()), 0, tau);
  p[0] = c;
  return p;
}

PolyMat1 PolyMat1::padded(int degree) const {
  if (degree <= this->degree()) return *this;
  PolyMat1 out(rows_, cols_, degree, tau_);
  for (int k = 0; k <= this->degree(); ++k) out[k] = coef_[k];
  return out;
}

PolyMat1 PolyMat1::trimmed() const {
  int d = degree();
  while (d > 0 && coef_[d].isZero(0.0)) --d;
  PolyMat1 out(rows_, cols_, d, tau_);
  for (int k = 0; k <= d; ++k) out[k] = coef_[k];
  return out;
}

bool PolyMat1::isZero(double tol) const {
  for (const auto& c : coef_)
    if (c.size() && c.cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

double PolyMat1::maxAbsCoef() const {
  double m = 0.0;
  for (const auto& c : coef_)
    if (c.size()) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

PolyMat2::PolyMat2(int rows, int cols, int deg_s, int deg_t, double tau_s,
                   double tau_t)
    : rows_(rows), cols_(cols), deg_s_(deg_s), deg_t_(deg_t), tau_s_(tau_s),
      tau_t_(tau_t) {
  check(rows >= 0 && cols >= 0, "PolyMat2: dimensions must be non-negative");
  check(deg_s >= 0 && deg_t >= 0, "PolyMat2: degrees must be non-negative");
  check(tau_s > 0 && tau_t > 0, "PolyMat2: domain bounds must be positive");
  coef_.assign((deg_s + 1) * (deg_t + 1), MatrixXd::Zero(rows, cols));
}

PolyMat2 PolyMat2::padded(int deg_s, int deg_t) const {
  deg_s = std::max(deg_s, deg_s_);
  deg_t = std::max(deg_t, deg_t_);
  if (deg_s == deg_s_ && deg_t == deg_t_) return *this;
  PolyMat2 out(rows_, cols_, deg_s, deg_t, tau_s_, tau_t_);
  for (int a = 0; a <= deg_s_; ++a)
    for (int b = 0; b <= deg_t_; ++b) out.at(a, b) = at(a, b);
  return out;
}

double PolyMat2::maxAbsCoef() const {
  double m = 0.0;
  for (const auto& c : coef_)
    if (c.size()) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

// ---- univariate ----

PolyMat1 add(const PolyMat1& a, const PolyMat1& b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(),
        "add: dimension mismatch");
  check(sameDomain(a.tau(), b.tau()), "add: domain mismatch");
  int d = std::max(a.degree(), b.degree());
  PolyMat1 out(a.rows(), a.cols(), d, a.tau());
  for (int k = 0; k <= d; ++k) {
    if (k <= a.degree()) out[k] += a[k];
    if (k <= b.degree()) out[k] += b[k];
  }
  return out;
}

PolyMat1 sub(const PolyMat1& a, const PolyMat1& b) {
  return add(a, scale(b, -1.0));
}

PolyMat1 scale(const PolyMat1& a, double alpha) {
  PolyMat1 out = a;
  for (int k = 0; k <= out.degree(); ++k) out[k] *= alpha;
  return out;
}

PolyMat1 mul(const PolyMat1& a, const PolyMat1& b) {
  check(a.cols() == b.rows(), "mul: inner dimension mismatch");
  check(sameDomain(a.tau(), b.tau()), "mul: domain mismatch");
  PolyMat1 out(a.rows(), b.cols(), a.degree() + b.degree(), a.tau());
  for (int i = 0; i <= a.degree(); ++i)
    for (int j = 0; j <= b.degree(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

PolyMat1 transpose(const PolyMat1& a) {
  PolyMat1 out(a.cols(), a.rows(), a.degree(), a.tau());
  for (int k = 0; k <= a.degree(); ++k) out[k] = a[k].transpose();
  return out;
}

PolyMat1 differentiate(const PolyMat1& a) {
  if (a.degree() == 0) return PolyMat1::zero(a.rows(), a.cols(), a.tau());
  PolyMat1 out(a.rows(), a.cols(), a.degree() - 1, a.tau());
  for (int k = 1; k <= a.degree(); ++k) out[k - 1] = k * a[k];
  return out;
}

MatrixXd evaluate(const PolyMat1& a, double s) {
  check(s <= 1e-12 && s >= -a.tau() - 1e-12 * std::max(1.0, a.tau()),
        "evaluate: point outside domain");
  MatrixXd out = a[a.degree()];
  for (int k = a.degree() - 1; k >= 0; --k) out = out * s + a[k];
  return out;
}

MatrixXd definite_integral(const PolyMat1& a) {
  // int_{-tau}^0 s^k ds = -(-tau)^{k+1} / (k+1)
  MatrixXd out = MatrixXd::Zero(a.rows(), a.cols());
  for (int k = 0; k <= a.degree(); ++k)
    out += a[k] * (-std::pow(-a.tau(), k + 1) / (k + 1));
  return out;
}

PolyMat1 antiderivative(const PolyMat1& a) {
  PolyMat1 out(a.rows(), a.cols(), a.degree() + 1, a.tau());
  for (int k = 0; k <= a.degree(); ++k) out[k + 1] = a[k] / (k + 1);
  return out;
}

PolyMat1 rescale_argument(const PolyMat1& a, double alpha) {
  check(alpha > 0, "rescale_argument: factor must be positive");
  PolyMat1 out(a.rows(), a.cols(), a.degree(), a.tau() / alpha);
  double p = 1.0;
  for (int k = 0; k <= a.degree(); ++k, p *= alpha) out[k] = p * a[k];
  return out;
}

// ---- bivariate ----

PolyMat2 add(const PolyMat2& a, const PolyMat2& b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(),
        "add: dimension mismatch");
  check(sameDomain(a.tauS(), b.tauS()) && sameDomain(a.tauT(), b.tauT()),
        "add: domain mismatch");
  int ds = std::max(a.degS(), b.degS());
  int dt = std::max(a.degT(), b.degT());
  PolyMat2 out(a.rows(), a.cols(), ds, dt, a.tauS(), a.tauT());
  for (int p = 0; p <= ds; ++p)
    for (int q = 0; q <= dt; ++q) {
      if (p <= a.degS() && q <= a.degT()) out.at(p, q) += a.at(p, q);
      if (p <= b.degS() && q <= b.degT()) out.at(p, q) += b.at(p, q);
    }
  return out;
}

PolyMat2 scale(const PolyMat2& a, double alpha) {
  PolyMat2 out = a;
  for (int p = 0; p <= a.degS(); ++p)
    for (int q = 0; q <= a.degT(); ++q) out.at(p, q) *= alpha;
  return out;
}

PolyMat2 differentiate(const PolyMat2& a, Var v) {
  if (v == Var::s) {
    if (a.degS() == 0)
      return PolyMat2::zero(a.rows(), a.cols(), a.tauS(), a.tauT());
    PolyMat2 out(a.rows(), a.cols(), a.degS() - 1, a.degT(), a.tauS(),
                 a.tauT());
    for (int p = 1; p <= a.degS(); ++p)
      for (int q = 0; q <= a.degT(); ++q) out.at(p - 1, q) = p * a.at(p, q);
    return out;
  }
  if (a.degT() == 0)
    return PolyMat2::zero(a.rows(), a.cols(), a.tauS(), a.tauT());
  PolyMat2 out(a.rows(), a.cols(), a.degS(), a.degT() - 1, a.tauS(), a.tauT());
  for (int p = 0; p <= a.degS(); ++p)
    for (int q = 1; q <= a.degT(); ++q) out.at(p, q - 1) = q * a.at(p, q);
  return out;
}

MatrixXd evaluate(const PolyMat2& a, double s, double theta) {
  check(s <= 1e-12 && s >= -a.tauS() - 1e-12 * std::max(1.0, a.tauS()),
        "evaluate: s outside domain");
  check(theta <= 1e-12 &&
            theta >= -a.tauT() - 1e-12 * std::max(1.0, a.tauT()),
        "evaluate: theta outside domain");
  MatrixXd out = MatrixXd::Zero(a.rows(), a.cols());
  double sp = 1.0;
  for (int p = 0; p <= a.degS(); ++p, sp *= s) {
    double tq = 1.0;
    for (int q = 0; q <= a.degT(); ++q, tq *= theta)
      out += (sp * tq) * a.at(p, q);
  }
  return out;
}

PolyMat1 partial_integral(const PolyMat2& a, Var over) {
  if (over == Var::s) {
    PolyMat1 out(a.rows(), a.cols(), a.degT(), a.tauT());
    for (int p = 0; p <= a.degS(); ++p) {
      double w = -std::pow(-a.tauS(), p + 1) / (p + 1);
      for (int q = 0; q <= a.degT(); ++q) out[q] += w * a.at(p, q);
    }
    return out;
  }
  PolyMat1 out(a.rows(), a.cols(), a.degS(), a.tauS());
  for (int q = 0; q <= a.degT(); ++q) {
    double w = -std::pow(-a.tauT(), q + 1) / (q + 1);
    for (int p = 0; p <= a.degS(); ++p) out[p] += w * a.at(p, q);
  }
  return out;
}

PolyMat1 evaluate_partial(const PolyMat2& a, Var fixed, double value) {
  if (fixed == Var::s) {
    PolyMat1 out(a.rows(), a.cols(), a.degT(), a.tauT());
    double sp = 1.0;
    for (int p = 0; p <= a.degS(); ++p, sp *= value)
      for (int q = 0; q <= a.degT(); ++q) out[q] += sp * a.at(p, q);
    return out;
  }
  PolyMat1 out(a.rows(), a.cols(), a.degS(), a.tauS());
  double tq = 1.0;
  for (int q = 0; q <= a.degT(); ++q, tq *= value)
    for (int p = 0; p <= a.degS(); ++p) out[p] += tq * a.at(p, q);
  return out;
}

PolyMat2 rescale_argument(const PolyMat2& a, double alpha_s, double alpha_t) {
  check(alpha_s > 0 && alpha_t > 0,
        "rescale_argument: factors must be positive");
  PolyMat2 out(a.rows(), a.cols(), a.degS(), a.degT(), a.tauS() / alpha_s,
               a.tauT() / alpha_t);
  double sp = 1.0;
  for (int p = 0; p <= a.degS(); ++p, sp *= alpha_s) {
    double tq = 1.0;
    for (int q = 0; q <= a.degT(); ++q, tq *= alpha_t)
      out.at(p, q) = (sp * tq) * a.at(p, q);
  }
  return out;
}

PolyMat2 transpose_swap(const PolyMat2& a) {
  PolyMat2 out(a.cols(), a.rows(), a.degT(), a.degS(), a.tauT(), a.tauS());
  for (int p = 0; p <= a.degS(); ++p)
    for (int q = 0; q <= a.degT(); ++q) out.at(q, p) = a.at(p, q).transpose();
  return out;
}

}  // namespace delsyn
