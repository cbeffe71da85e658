#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delsyn/conic.hpp"
#include "delsyn/positivity.hpp"

#include <random>

using namespace delsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mt19937 rng(1234);

MatrixXd random_sym(int n) {
  std::uniform_real_distribution<double> d(-1, 1);
  MatrixXd A = MatrixXd::NullaryExpr(n, n, [&] { return d(rng); });
  return MatrixXd(0.5 * (A + A.transpose()));
}

MatrixXd random_psd(int n) {
  std::uniform_real_distribution<double> d(-1, 1);
  MatrixXd G = MatrixXd::NullaryExpr(n, n, [&] { return d(rng); });
  return MatrixXd(G.transpose() * G);
}

// Equalities "cert1(M1) + cert2(M2) = target tuple" for one cone membership.
ConicProblem membership_problem(const ConeMembership& cm,
                                const VectorXd& target) {
  ConicProblem prob;
  int b1 = prob.addPsdBlock(cm.psd_size);
  int b2 = prob.addPsdBlock(cm.psd_size);
  int nslots = static_cast<int>(cm.map1.slots.size());
  prob.rhs = target;
  for (int s = 0; s < nslots; ++s) {
    for (const auto& e : cm.map1.slots[s]) prob.add(s, b1, e.row, e.col, e.w);
    for (const auto& e : cm.map2.slots[s]) prob.add(s, b2, e.row, e.col, e.w);
  }
  return prob;
}

}  // namespace

TEST_CASE("arrow-head minimum: min tr X with fixed off-diagonal") {
  // min X00 + X11 s.t. X01 = 1, X PSD; optimum 2 at X = ones(2,2).
  ConicProblem prob;
  int b = prob.addPsdBlock(2);
  prob.rhs = VectorXd::Ones(1);
  prob.add(0, b, 0, 1, 1.0);
  prob.C = {MatrixXd::Identity(2, 2)};
  auto sol = solve_conic(prob);
  REQUIRE(sol.status == ConicSolution::Status::optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.X[0](1, 1) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("free variable absorbs a constraint") {
  // min X00 + X11 s.t. X00 + f = 2, X01 = 1: optimum X00 = X11 = 1, f = 1.
  ConicProblem prob;
  int b = prob.addPsdBlock(2);
  prob.nfree = 1;
  prob.rhs = VectorXd(2);
  prob.rhs << 2.0, 1.0;
  prob.add(0, b, 0, 0, 1.0);
  prob.addFree(0, 0, 1.0);
  prob.add(1, b, 0, 1, 1.0);
  prob.C = {MatrixXd::Identity(2, 2)};
  prob.cfree = VectorXd::Zero(1);
  auto sol = solve_conic(prob);
  REQUIRE(sol.status == ConicSolution::Status::optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.f(0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("linear program via scalar blocks") {
  // min x s.t. x + y = 1, x, y >= 0 -> 0.
  ConicProblem prob;
  int bx = prob.addPsdBlock(1), by = prob.addPsdBlock(1);
  prob.rhs = VectorXd::Ones(1);
  prob.add(0, bx, 0, 0, 1.0);
  prob.add(0, by, 0, 0, 1.0);
  prob.C = {MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1)};
  auto sol = solve_conic(prob);
  REQUIRE(sol.status == ConicSolution::Status::optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(sol.X[1](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minimum eigenvalue as an SDP, against the eigensolver") {
  // min <C,X> s.t. tr X = 1, X PSD  ->  lambda_min(C).
  for (int trial = 0; trial < 4; ++trial) {
    int n = 5;
    MatrixXd Csym = random_sym(n);
    ConicProblem prob;
    int b = prob.addPsdBlock(n);
    prob.rhs = VectorXd::Ones(1);
    for (int i = 0; i < n; ++i) prob.add(0, b, i, i, 1.0);
    prob.C = {Csym};
    auto sol = solve_conic(prob);
    REQUIRE(sol.status == ConicSolution::Status::optimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Csym, Eigen::EigenvaluesOnly);
    CHECK(sol.objective ==
          doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("feasibility wrapper separates PD and indefinite completions") {
  // X PSD with X00 = 1, X01 = 3, X11 = v: feasible iff v >= 9.
  auto make = [](double v) {
    ConicProblem prob;
    int b = prob.addPsdBlock(2);
    prob.rhs = VectorXd(3);
    prob.rhs << 1.0, 3.0, v;
    prob.add(0, b, 0, 0, 1.0);
    prob.add(1, b, 0, 1, 1.0);
    prob.add(2, b, 1, 1, 1.0);
    return prob;
  };
  auto bad = solve_feasibility(make(2.0));
  CHECK(bad.solver_ok);
  CHECK_FALSE(bad.feasible);
  auto good = solve_feasibility(make(10.0));
  REQUIRE(good.feasible);
  CHECK(good.point.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(good.point.X[0](0, 1) == doctest::Approx(3.0).epsilon(1e-5));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(good.point.X[0],
                                             Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("cone membership: images of PSD certificates are feasible") {
  for (int d : {0, 1}) {
    auto cm = cone_membership(d, 2, 1, 1.5);
    MatrixXd M1 = random_psd(cm.psd_size);
    MatrixXd M2 = random_psd(cm.psd_size);
    VectorXd target =
        apply_coeff_map(cm.map1, M1) + apply_coeff_map(cm.map2, M2);
    auto rep = solve_feasibility(membership_problem(cm, target));
    CHECK(rep.feasible);
    if (rep.feasible) {
      VectorXd back = apply_coeff_map(cm.map1, rep.point.X[0]) +
                      apply_coeff_map(cm.map2, rep.point.X[1]);
      CHECK((back - target).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("cone membership: identity-like tuple feasible, indefinite not") {
  double tauK = 1.0;
  for (int d : {0, 1}) {
    auto cm = cone_membership(d, 1, 1, tauK);
    auto op = PqrsOperator::zero(1, 1, {tauK}, cm.tuple_layout.deg_q,
                                 cm.tuple_layout.deg_s, cm.tuple_layout.deg_r);
    op.P(0, 0) = 1.0;
    op.S[0][0](0, 0) = 1.0 / tauK;
    VectorXd target = flatten(cm.tuple_layout, op);
    CHECK(solve_feasibility(membership_problem(cm, target)).feasible);

    // S(s) = s + 0.4 is negative near s = -1, so the operator is not PSD
    // and cannot be in the cone.
    op.S[0][0](0, 0) = 0.4;
    op.S[0][1](0, 0) = 1.0;
    VectorXd bad = flatten(cm.tuple_layout, op);
    CHECK_FALSE(solve_feasibility(membership_problem(cm, bad)).feasible);
  }
}

TEST_CASE("dump format carries every term") {
  ConicProblem prob;
  int b = prob.addPsdBlock(2);
  prob.nfree = 1;
  prob.rhs = VectorXd::Ones(1);
  prob.add(0, b, 0, 1, 2.5);
  prob.addFree(0, 0, -1.0);
  auto text = dump_problem(prob);
  CHECK(text.find("psd 2") != std::string::npos);
  CHECK(text.find("0 0 0 1 2.5") != std::string::npos);
  CHECK(text.find("0 -1 0 0 -1") != std::string::npos);
  CHECK(text.find("rhs 0 1") != std::string::npos);
}
