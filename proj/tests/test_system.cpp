#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delsyn/system.hpp"

#include <cstdio>

using namespace delsyn;
using Eigen::MatrixXd;

TEST_CASE("benchmark plant data") {
  auto a1 = example_a1(1.0);
  CHECK(validate(a1).empty());
  CHECK(a1.A0(0, 0) == -2.0);
  CHECK(a1.A0(1, 1) == -0.9);
  CHECK(a1.A[0](1, 0) == -1.0);
  CHECK(a1.B1(0, 0) == -0.5);
  CHECK(a1.C0(0, 0) == 1.0);
  CHECK(a1.p == 0);

  auto a2 = example_a2(0.5);
  CHECK(validate(a2).empty());
  CHECK(a2.A0(1, 0) == -2.0);
  CHECK(a2.A0(1, 1) == 0.1);
  CHECK(a2.A[0](1, 0) == 1.0);
  CHECK(a2.m == 2);

  auto b1 = example_b1(0.99);
  CHECK(validate(b1).empty());
  CHECK(b1.A0(1, 1) == 1.0);
  CHECK(b1.A[0](1, 1) == -0.9);
  CHECK(b1.q == 2);
  CHECK(b1.D2(1, 0) == 0.1);

  auto b2 = example_b2(0.3);
  CHECK(validate(b2).empty());
  CHECK(b2.B2(0, 0) == 3.0);
  CHECK(b2.C0(0, 1) == -0.5);
  CHECK(b2.D2(1, 0) == 1.0);

  auto b3 = example_b3();
  CHECK(validate(b3).empty());
  CHECK(b3.K == 2);
  CHECK(b3.tau[0] == 1.0);
  CHECK(b3.tau[1] == 2.0);
  CHECK(b3.A[0](0, 0) == 0.6);
  CHECK(b3.A[1](1, 1) == -0.5);
  CHECK(b3.q == 3);
  CHECK(b3.D2(2, 0) == 0.1);
}

TEST_CASE("scalar chain plant: n=1, K=1 gives xdot = -x(t-1) + w + u") {
  auto sys = example_b4(1, 1);
  CHECK(validate(sys).empty());
  CHECK(sys.n == 1);
  CHECK(sys.A0(0, 0) == 0.0);
  CHECK(sys.A[0](0, 0) == -1.0);
  CHECK(sys.tau[0] == 1.0);
  CHECK(sys.B1(0, 0) == 1.0);
  CHECK(sys.B2(0, 0) == 1.0);
  CHECK(sys.C0(0, 0) == 1.0);
  CHECK(sys.C0(1, 0) == 0.0);
  CHECK(sys.D2(1, 0) == 1.0);

  auto big = example_b4(3, 2);
  CHECK(validate(big).empty());
  CHECK(big.tau[0] == 0.5);
  CHECK(big.tau[1] == 1.0);
  CHECK(big.A[0](2, 2) == -0.5);
  CHECK(big.C0.row(0).sum() == 3.0);
}

TEST_CASE("shower plant: single user") {
  auto sys = example_shower(1);
  CHECK(validate(sys).empty());
  CHECK(sys.n == 2);
  CHECK(sys.K == 1);
  MatrixXd A0_want = (MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  CHECK((sys.A0 - A0_want).norm() == 0.0);
  MatrixXd A1_want = (MatrixXd(2, 2) << 0, 0, 0, -1).finished();
  CHECK((sys.A[0] - A1_want).norm() == 0.0);
  CHECK(sys.tau[0] == 1.0);
  // No coupling for a single user: B1 = [-1; alpha].
  CHECK(sys.B1(0, 0) == -1.0);
  CHECK(sys.B1(1, 0) == 1.0);
  CHECK(sys.B2(1, 0) == 1.0);
  CHECK(sys.D2(1, 0) == 0.1);
}

TEST_CASE("shower plant: multi-user coupling structure") {
  const int nu = 4;
  auto sys = example_shower(nu);
  CHECK(validate(sys).empty());
  CHECK(sys.n == 8);
  CHECK(sys.K == 4);
  CHECK(sys.p == 4);
  CHECK(sys.q == 8);
  for (int k = 0; k < nu; ++k) {
    CHECK(sys.tau[k] == k + 1);
    // Channel k only feeds temperature column k.
    for (int i = 0; i < nu; ++i) {
      double want = (i == k) ? -1.0 : 0.25;
      CHECK(sys.A[k](nu + i, nu + k) == want);
      for (int j = 0; j < 2 * nu; ++j)
        if (j != nu + k) CHECK(sys.A[k](nu + i, j) == 0.0);
    }
  }
  // B1 bottom block: diag(alpha) - coupling, row sums 1 - 3*0.25.
  for (int i = 0; i < nu; ++i)
    CHECK(sys.B1.row(nu + i).sum() == doctest::Approx(1.0 - 0.75));
}

TEST_CASE("validate flags bad data") {
  auto sys = example_b3();
  sys.tau = {2.0, 1.0};
  auto errs = validate(sys);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0] == "delays not increasing");

  sys = example_a1();
  sys.A[0] = MatrixXd::Zero(3, 2);
  errs = validate(sys);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("A[0]") != std::string::npos);

  sys = example_a1();
  sys.tau = {-1.0};
  CHECK(!validate(sys).empty());
}

TEST_CASE("json round trip is lossless") {
  for (const auto* name : {"A1", "A2", "B3", "B4", "shower"}) {
    auto sys = example(name);
    auto back = parse_system(serialize_system(sys));
    CHECK(back.n == sys.n);
    CHECK(back.K == sys.K);
    CHECK((back.A0 - sys.A0).norm() == 0.0);
    for (int i = 0; i < sys.K; ++i) {
      CHECK((back.A[i] - sys.A[i]).norm() == 0.0);
      CHECK(back.tau[i] == sys.tau[i]);
      CHECK((back.C[i] - sys.C[i]).norm() == 0.0);
    }
    CHECK((back.B1 - sys.B1).norm() == 0.0);
    CHECK((back.B2 - sys.B2).norm() == 0.0);
    CHECK((back.C0 - sys.C0).norm() == 0.0);
    CHECK((back.D1 - sys.D1).norm() == 0.0);
    CHECK((back.D2 - sys.D2).norm() == 0.0);
  }
}

TEST_CASE("file round trip and parse errors") {
  auto sys = example_b4(2, 2);
  std::string path = "/tmp/delsyn_sys_test.json";
  save_system(sys, path);
  auto back = load_system(path);
  CHECK((back.A[1] - sys.A[1]).norm() == 0.0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_system("not json"), std::runtime_error);
  CHECK_THROWS_AS(parse_system("{\"n\": 1}"), std::runtime_error);
  CHECK_THROWS_AS(load_system("/nonexistent/file.json"), std::runtime_error);
}

TEST_CASE("example dispatch") {
  CHECK(example("B4", {3, 2}).n == 3);
  CHECK(example("shower", {2}).n == 4);
  CHECK_THROWS_AS(example("Z9"), std::runtime_error);
}
