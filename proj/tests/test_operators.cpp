#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delsyn/operators.hpp"

using namespace delsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mt19937 rng(777);

double urand(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

PolyMat1 random_poly1(int rows, int cols, int degree, double tau) {
  PolyMat1 p(rows, cols, degree, tau);
  for (int k = 0; k <= degree; ++k)
    p[k] = MatrixXd::NullaryExpr(rows, cols, [] { return urand(-1, 1); });
  return p;
}

PolyMat2 random_poly2(int rows, int cols, int ds, int dt, double tau_s,
                      double tau_t) {
  PolyMat2 p(rows, cols, ds, dt, tau_s, tau_t);
  for (int a = 0; a <= ds; ++a)
    for (int b = 0; b <= dt; ++b)
      p.at(a, b) = MatrixXd::NullaryExpr(rows, cols, [] { return urand(-1, 1); });
  return p;
}

PqrsOperator random_op(int m, int n, const std::vector<double>& tau,
                       int dq, int ds, int dr) {
  PqrsOperator op = PqrsOperator::zero(m, n, tau, dq, ds, dr);
  const int K = op.K;
  op.P = MatrixXd::NullaryExpr(m, m, [] { return urand(-1, 1); });
  for (int i = 0; i < K; ++i) {
    op.Q[i] = random_poly1(m, n, dq, tau[i]);
    op.S[i] = random_poly1(n, n, ds, tau[i]);
    for (int j = 0; j < K; ++j)
      op.R[i][j] = random_poly2(n, n, dr, dr, tau[i], tau[j]);
  }
  return op;
}

// Sample polynomial channels onto uniform grids.
SampledZ sample(const VectorXd& x, const std::vector<PolyMat1>& phi,
                int nodes) {
  SampledZ z;
  z.x = x;
  for (const auto& p : phi) {
    z.tau.push_back(p.tau());
    MatrixXd g(p.rows(), nodes + 1);
    for (int k = 0; k <= nodes; ++k)
      g.col(k) = evaluate(p, -p.tau() + k * p.tau() / nodes);
    z.phi.push_back(g);
  }
  return z;
}

std::vector<PolyMat1> random_channels(int n, const std::vector<double>& tau,
                                      int degree) {
  std::vector<PolyMat1> phi;
  for (double t : tau) phi.push_back(random_poly1(n, 1, degree, t));
  return phi;
}

VectorXd random_vec(int n) {
  return VectorXd::NullaryExpr(n, [] { return urand(-1, 1); });
}

}  // namespace

TEST_CASE("identity and zero operators") {
  std::vector<double> tau = {1.0, 2.0};
  PqrsOperator id = PqrsOperator::zero(3, 2, tau, 0, 0, 0);
  id.P = MatrixXd::Identity(3, 3);
  for (auto& S : id.S) S[0] = MatrixXd::Identity(2, 2) / 2.0;  // 1/tauK

  auto z = sample(random_vec(3), random_channels(2, tau, 3), 50);
  auto iz = apply(id, z);
  CHECK((iz.x - z.x).norm() < 1e-14);
  for (int i = 0; i < 2; ++i)
    CHECK((iz.phi[i] - z.phi[i]).cwiseAbs().maxCoeff() < 1e-14);

  PqrsOperator zero = PqrsOperator::zero(3, 2, tau, 0, 0, 0);
  auto zz = apply(zero, z);
  CHECK(zz.x.norm() == 0.0);
  CHECK(zz.phi[0].norm() == 0.0);
}

TEST_CASE("apply quadrature matches exact polynomial integrals") {
  std::vector<double> tau = {0.7, 1.5};
  auto op = random_op(3, 2, tau, 2, 2, 2);
  auto phi = random_channels(2, tau, 3);
  VectorXd x = random_vec(3);
  auto z = sample(x, phi, 400);
  auto out = apply(op, z);

  // First component, exactly.
  VectorXd y = op.P * x;
  for (int i = 0; i < 2; ++i)
    y += definite_integral(mul(op.Q[i], phi[i]));
  CHECK((out.x - y).norm() < 1e-8 * std::max(1.0, y.norm()));

  // Channel values at a few nodes, exactly.
  double tauK = 1.5;
  for (int i = 0; i < 2; ++i) {
    for (int k : {0, 133, 400}) {
      double s = -tau[i] + k * tau[i] / 400;
      VectorXd want = tauK * evaluate(op.Q[i], s).transpose() * x +
                      tauK * evaluate(op.S[i], s) * evaluate(phi[i], s);
      for (int j = 0; j < 2; ++j)
        want += definite_integral(
            mul(evaluate_partial(op.R[i][j], Var::s, s), phi[j]));
      CHECK((out.phi[i].col(k) - want).norm() <
            1e-8 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("apply is linear") {
  std::vector<double> tau = {1.0};
  auto op = random_op(2, 2, tau, 1, 1, 1);
  auto a = sample(random_vec(2), random_channels(2, tau, 2), 60);
  auto b = sample(random_vec(2), random_channels(2, tau, 2), 60);
  double al = 0.7, be = -1.3;
  SampledZ combo = a;
  combo.x = al * a.x + be * b.x;
  combo.phi[0] = al * a.phi[0] + be * b.phi[0];
  auto lhs = apply(op, combo);
  auto fa = apply(op, a);
  auto fb = apply(op, b);
  CHECK((lhs.x - al * fa.x - be * fb.x).norm() < 1e-12);
  CHECK((lhs.phi[0] - al * fa.phi[0] - be * fb.phi[0]).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("inner product basic values and bilinearity") {
  std::vector<double> tau = {2.0};
  auto a = SampledZ::zero(1, 1, tau, 10);
  auto b = a;
  a.x(0) = 1.0;
  b.x(0) = 1.0;
  CHECK(inner_product(a, b) == doctest::Approx(2.0));  // tauK * 1

  std::vector<double> tau1 = {1.0};
  auto u = SampledZ::zero(1, 1, tau1, 100);
  auto v = u;
  u.phi[0].setOnes();
  v.phi[0].setOnes();
  CHECK(inner_product(u, v) == doctest::Approx(1.0));  // int_{-1}^0 1

  auto p = sample(random_vec(2), random_channels(2, tau, 3), 80);
  auto q = sample(random_vec(2), random_channels(2, tau, 3), 80);
  auto r = sample(random_vec(2), random_channels(2, tau, 3), 80);
  SampledZ qr = q;
  qr.x = q.x + r.x;
  qr.phi[0] = q.phi[0] + r.phi[0];
  CHECK(inner_product(p, qr) ==
        doctest::Approx(inner_product(p, q) + inner_product(p, r))
            .epsilon(1e-12));
}

TEST_CASE("quadratic form: trapezoid agrees with exact polynomial path") {
  std::vector<double> tau = {1.0, 1.6};
  auto op = random_op(2, 2, tau, 2, 2, 2);
  auto phi = random_channels(2, tau, 2);
  VectorXd x = random_vec(2);
  auto z = sample(x, phi, 400);
  double approx = inner_product(z, apply(op, z));
  double exact = quad_form_exact(op, x, phi);
  CHECK(approx == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("structural constraint set: constant single-delay case") {
  PqrsLayout lt;
  lt.m = lt.n = 2;
  lt.K = 1;
  lt.deg_q = lt.deg_s = lt.deg_r = 0;
  lt.tau = {1.5};
  auto rows = structural_constraints(lt);
  // S symmetry (1) + R symmetry (1) + P = tau(Q^T + S) (4) + Q = R (4).
  CHECK(rows.size() == 10);

  auto op = random_structured(lt, rng);
  CHECK((op.S[0][0] - op.S[0][0].transpose()).norm() < 1e-12);
  CHECK((op.R[0][0].at(0, 0) - op.R[0][0].at(0, 0).transpose()).norm() <
        1e-12);
  CHECK((op.P - 1.5 * (op.Q[0][0].transpose() + op.S[0][0])).norm() < 1e-12);
  CHECK((op.Q[0][0] - op.R[0][0].at(0, 0)).norm() < 1e-12);
}

TEST_CASE("structural constraint count matches slot enumeration") {
  PqrsLayout lt;
  lt.m = lt.n = 2;
  lt.K = 2;
  lt.deg_q = 1;
  lt.deg_s = 1;
  lt.deg_r = 1;
  lt.tau = {1.0, 2.0};
  auto rows = structural_constraints(lt);

  int n = lt.n, K = lt.K;
  size_t s_sym = static_cast<size_t>(K * (lt.deg_s + 1) * n * (n - 1) / 2);
  // R adjoint rows: unordered pairs of distinct slots under the involution
  // (i,j,a,b,r,c) -> (j,i,b,a,c,r).
  size_t r_total = static_cast<size_t>(K * K * (lt.deg_r + 1) *
                                       (lt.deg_r + 1) * n * n);
  size_t r_fixed = static_cast<size_t>(K * (lt.deg_r + 1) * n);
  size_t r_sym = (r_total - r_fixed) / 2;
  size_t p_rows = static_cast<size_t>(K * n * n);
  size_t q_rows = static_cast<size_t>(
      K * K * (std::max(lt.deg_q, lt.deg_r) + 1) * n * n);
  CHECK(rows.size() == s_sym + r_sym + p_rows + q_rows);
}

TEST_CASE("structured operators are self-adjoint under the inner product") {
  PqrsLayout lt;
  lt.m = lt.n = 2;
  lt.K = 2;
  lt.deg_q = 2;
  lt.deg_s = 2;
  lt.deg_r = 2;
  lt.tau = {1.0, 2.0};
  for (int trial = 0; trial < 4; ++trial) {
    auto op = random_structured(lt, rng);
    // Residual of every emitted constraint row.
    auto v = flatten(lt, op);
    for (const auto& row : structural_constraints(lt)) {
      double acc = 0;
      for (auto [idx, w] : row.terms) acc += w * v(idx);
      CHECK(std::abs(acc) < 1e-10);
    }
    for (int pair = 0; pair < 5; ++pair) {
      auto a = sample(random_vec(2), random_channels(2, lt.tau, 3), 120);
      auto b = sample(random_vec(2), random_channels(2, lt.tau, 3), 120);
      double ab = inner_product(a, apply(op, b));
      double ba = inner_product(apply(op, a), b);
      double scale = std::max({1.0, std::abs(ab), std::abs(ba)});
      CHECK(std::abs(ab - ba) / scale < 1e-9);
    }
  }
}

TEST_CASE("single-delay rewrite: K=1 is the identity") {
  std::vector<double> tau = {1.3};
  auto op = random_op(2, 2, tau, 2, 1, 2);
  auto t = l1_transform(op);
  CHECK((t.P - op.P).norm() == 0.0);
  for (int k = 0; k <= 2; ++k) CHECK((t.Q[0][k] - op.Q[0][k]).norm() < 1e-14);
  for (int k = 0; k <= 1; ++k) CHECK((t.S[0][k] - op.S[0][k]).norm() < 1e-14);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      CHECK((t.R[0][0].at(a, b) - op.R[0][0].at(a, b)).norm() < 1e-14);
}

TEST_CASE("single-delay rewrite: constant block scaling") {
  std::vector<double> tau = {1.0, 2.0};
  auto op = PqrsOperator::zero(2, 2, tau, 0, 0, 0);
  MatrixXd c = MatrixXd::Random(2, 2);
  op.Q[0][0] = c;
  auto t = l1_transform(op);
  CHECK(t.n == 4);
  CHECK((t.Q[0][0].leftCols(2) - std::sqrt(0.5) * c).norm() < 1e-14);
  CHECK(t.Q[0][0].rightCols(2).norm() == 0.0);
}

TEST_CASE("single-delay rewrite preserves the quadratic form") {
  std::vector<double> tau = {0.8, 1.1, 2.0};
  for (int trial = 0; trial < 20; ++trial) {
    auto op = random_op(2, 2, tau, 2, 2, 2);
    auto phi = random_channels(2, tau, 2);
    VectorXd x = random_vec(2);

    // Exact path: transform the polynomial channels directly.
    double tauK = tau.back();
    PolyMat1 stacked(2 * 3, 1, 2, tauK);
    for (int i = 0; i < 3; ++i) {
      double ai = tau[i] / tauK;
      PolyMat1 pi = rescale_argument(phi[i], ai);
      for (int k = 0; k <= pi.degree(); ++k)
        stacked[k].middleRows(2 * i, 2) = std::sqrt(ai) * pi[k];
    }
    double lhs = quad_form_exact(op, x, phi);
    double rhs = quad_form_exact(l1_transform(op), x, {stacked});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));

    // Sampled path through l1_transform_sample.
    auto z = sample(x, phi, 100);
    auto zt = l1_transform_sample(z);
    double lhs_s = inner_product(z, apply(op, z));
    double rhs_s = inner_product(zt, apply(l1_transform(op), zt));
    CHECK(lhs_s == doctest::Approx(rhs_s).epsilon(1e-8));
  }
}

TEST_CASE("flatten and unflatten round trip") {
  PqrsLayout lt;
  lt.m = lt.n = 2;
  lt.K = 2;
  lt.deg_q = 1;
  lt.deg_s = 2;
  lt.deg_r = 1;
  lt.tau = {1.0, 2.0};
  auto op = random_op(2, 2, lt.tau, 1, 2, 1);
  auto v = flatten(lt, op);
  CHECK(v.size() == lt.total());
  auto back = unflatten(lt, v);
  CHECK((flatten(lt, back) - v).norm() == 0.0);
  CHECK((back.P - op.P).norm() == 0.0);
  CHECK((back.S[1][2] - op.S[1][2]).norm() == 0.0);
  CHECK((back.R[0][1].at(1, 0) - op.R[0][1].at(1, 0)).norm() == 0.0);
}
