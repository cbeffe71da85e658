#include "delsyn/system.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace delsyn {

namespace {

using nlohmann::json;

void check_shape(std::vector<std::string>& errs, const MatrixXd& M,
                 int rows, int cols, const std::string& name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << M.rows()
       << "x" << M.cols();
    errs.push_back(os.str());
  }
}

json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error(name + ": expected a 2-D array");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw std::runtime_error(name + ": ragged rows");
    for (int c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
  }
  return M;
}

}  // namespace

std::vector<std::string> validate(const DelaySystem& sys) {
  std::vector<std::string> errs;
  if (sys.n <= 0) errs.push_back("state dimension n must be positive");
  if (sys.m <= 0) errs.push_back("disturbance dimension m must be positive");
  if (sys.p < 0) errs.push_back("input dimension p must be non-negative");
  if (sys.q <= 0) errs.push_back("output dimension q must be positive");
  if (sys.K <= 0) errs.push_back("delay count K must be positive");
  if (!errs.empty()) return errs;

  if (static_cast<int>(sys.A.size()) != sys.K)
    errs.push_back("A list length must equal K");
  if (static_cast<int>(sys.C.size()) != sys.K)
    errs.push_back("C list length must equal K");
  if (static_cast<int>(sys.tau.size()) != sys.K)
    errs.push_back("tau list length must equal K");
  if (!errs.empty()) return errs;

  check_shape(errs, sys.A0, sys.n, sys.n, "A0");
  for (int i = 0; i < sys.K; ++i)
    check_shape(errs, sys.A[i], sys.n, sys.n, "A[" + std::to_string(i) + "]");
  check_shape(errs, sys.B1, sys.n, sys.m, "B1");
  check_shape(errs, sys.B2, sys.n, sys.p, "B2");
  check_shape(errs, sys.C0, sys.q, sys.n, "C0");
  for (int i = 0; i < sys.K; ++i)
    check_shape(errs, sys.C[i], sys.q, sys.n, "C[" + std::to_string(i) + "]");
  check_shape(errs, sys.D1, sys.q, sys.m, "D1");
  check_shape(errs, sys.D2, sys.q, sys.p, "D2");

  if (!sys.tau.empty() && sys.tau[0] <= 0)
    errs.push_back("delays must be positive");
  for (int i = 1; i < static_cast<int>(sys.tau.size()); ++i)
    if (sys.tau[i] <= sys.tau[i - 1]) {
      errs.push_back("delays not increasing");
      break;
    }
  return errs;
}

std::string serialize_system(const DelaySystem& sys) {
  json j;
  j["n"] = sys.n;
  j["m"] = sys.m;
  j["p"] = sys.p;
  j["q"] = sys.q;
  j["K"] = sys.K;
  j["A0"] = matrix_to_json(sys.A0);
  j["A"] = json::array();
  for (const auto& M : sys.A) j["A"].push_back(matrix_to_json(M));
  j["tau"] = sys.tau;
  j["B1"] = matrix_to_json(sys.B1);
  j["B2"] = matrix_to_json(sys.B2);
  j["C0"] = matrix_to_json(sys.C0);
  j["C"] = json::array();
  for (const auto& M : sys.C) j["C"].push_back(matrix_to_json(M));
  j["D1"] = matrix_to_json(sys.D1);
  j["D2"] = matrix_to_json(sys.D2);
  return j.dump(2);
}

DelaySystem parse_system(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("system file: ") + e.what());
  }
  DelaySystem sys;
  try {
    sys.n = j.at("n").get<int>();
    sys.m = j.at("m").get<int>();
    sys.p = j.at("p").get<int>();
    sys.q = j.at("q").get<int>();
    sys.K = j.at("K").get<int>();
    sys.A0 = matrix_from_json(j.at("A0"), "A0");
    for (const auto& M : j.at("A")) sys.A.push_back(matrix_from_json(M, "A"));
    sys.tau = j.at("tau").get<std::vector<double>>();
    sys.B1 = matrix_from_json(j.at("B1"), "B1");
    sys.B2 = matrix_from_json(j.at("B2"), "B2");
    sys.C0 = matrix_from_json(j.at("C0"), "C0");
    for (const auto& M : j.at("C")) sys.C.push_back(matrix_from_json(M, "C"));
    sys.D1 = matrix_from_json(j.at("D1"), "D1");
    sys.D2 = matrix_from_json(j.at("D2"), "D2");
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("system file: ") + e.what());
  }
  auto errs = validate(sys);
  if (!errs.empty()) {
    std::string msg = "system file invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return sys;
}

DelaySystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

void save_system(const DelaySystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_system(sys) << "\n";
}

namespace {

DelaySystem open_loop(int n, int K) {
  DelaySystem sys;
  sys.n = n;
  sys.K = K;
  sys.A.assign(K, MatrixXd::Zero(n, n));
  sys.C.assign(K, MatrixXd());  // shapes filled by caller
  return sys;
}

}  // namespace

DelaySystem example_a1(double tau) {
  DelaySystem sys = open_loop(2, 1);
  sys.m = 1;
  sys.p = 0;
  sys.q = 1;
  sys.A0 = (MatrixXd(2, 2) << -2, 0, 0, -0.9).finished();
  sys.A[0] = (MatrixXd(2, 2) << -1, 0, -1, -1).finished();
  sys.tau = {tau};
  sys.B1 = (MatrixXd(2, 1) << -0.5, 1).finished();
  sys.B2 = MatrixXd::Zero(2, 0);
  sys.C0 = (MatrixXd(1, 2) << 1, 0).finished();
  sys.C[0] = MatrixXd::Zero(1, 2);
  sys.D1 = MatrixXd::Zero(1, 1);
  sys.D2 = MatrixXd::Zero(1, 0);
  return sys;
}

DelaySystem example_a2(double tau) {
  DelaySystem sys = open_loop(2, 1);
  sys.m = 2;
  sys.p = 0;
  sys.q = 1;
  sys.A0 = (MatrixXd(2, 2) << 0, 1, -2, 0.1).finished();
  sys.A[0] = (MatrixXd(2, 2) << 0, 0, 1, 0).finished();
  sys.tau = {tau};
  sys.B1 = MatrixXd::Identity(2, 2);
  sys.B2 = MatrixXd::Zero(2, 0);
  sys.C0 = (MatrixXd(1, 2) << 0, 1).finished();
  sys.C[0] = MatrixXd::Zero(1, 2);
  sys.D1 = MatrixXd::Zero(1, 2);
  sys.D2 = MatrixXd::Zero(1, 0);
  return sys;
}

DelaySystem example_b1(double tau) {
  DelaySystem sys = open_loop(2, 1);
  sys.m = 1;
  sys.p = 1;
  sys.q = 2;
  sys.A0 = (MatrixXd(2, 2) << 0, 0, 0, 1).finished();
  sys.A[0] = (MatrixXd(2, 2) << -1, -1, 0, -0.9).finished();
  sys.tau = {tau};
  sys.B1 = (MatrixXd(2, 1) << 1, 1).finished();
  sys.B2 = (MatrixXd(2, 1) << 0, 1).finished();
  sys.C0 = (MatrixXd(2, 2) << 1, 0, 0, 0).finished();
  sys.C[0] = MatrixXd::Zero(2, 2);
  sys.D1 = MatrixXd::Zero(2, 1);
  sys.D2 = (MatrixXd(2, 1) << 0, 0.1).finished();
  return sys;
}

DelaySystem example_b2(double tau) {
  DelaySystem sys = open_loop(2, 1);
  sys.m = 1;
  sys.p = 1;
  sys.q = 2;
  sys.A0 = (MatrixXd(2, 2) << 2, 1, 0, -1).finished();
  sys.A[0] = (MatrixXd(2, 2) << -1, 0, -1, 1).finished();
  sys.tau = {tau};
  sys.B1 = (MatrixXd(2, 1) << -0.5, 1).finished();
  sys.B2 = (MatrixXd(2, 1) << 3, 1).finished();
  sys.C0 = (MatrixXd(2, 2) << 1, -0.5, 0, 0).finished();
  sys.C[0] = MatrixXd::Zero(2, 2);
  sys.D1 = MatrixXd::Zero(2, 1);
  sys.D2 = (MatrixXd(2, 1) << 0, 1).finished();
  return sys;
}

DelaySystem example_b3(double tau1, double tau2) {
  DelaySystem sys = open_loop(2, 2);
  sys.m = 1;
  sys.p = 1;
  sys.q = 3;
  sys.A0 = (MatrixXd(2, 2) << -1, 2, 0, 1).finished();
  sys.A[0] = (MatrixXd(2, 2) << 0.6, -0.4, 0, 0).finished();
  sys.A[1] = (MatrixXd(2, 2) << 0, 0, 0, -0.5).finished();
  sys.tau = {tau1, tau2};
  sys.B1 = (MatrixXd(2, 1) << 1, 1).finished();
  sys.B2 = (MatrixXd(2, 1) << 0, 1).finished();
  sys.C0 = (MatrixXd(3, 2) << 1, 0, 0, 1, 0, 0).finished();
  sys.C[0] = MatrixXd::Zero(3, 2);
  sys.C[1] = MatrixXd::Zero(3, 2);
  sys.D1 = MatrixXd::Zero(3, 1);
  sys.D2 = (MatrixXd(3, 1) << 0, 0, 0.1).finished();
  return sys;
}

DelaySystem example_b4(int n, int K) {
  if (n <= 0 || K <= 0) throw std::runtime_error("B4: n, K must be positive");
  DelaySystem sys = open_loop(n, K);
  sys.m = 1;
  sys.p = 1;
  sys.q = 2;
  sys.A0 = MatrixXd::Zero(n, n);
  for (int i = 0; i < K; ++i) {
    sys.A[i] = -MatrixXd::Identity(n, n) / K;
    sys.tau.push_back(static_cast<double>(i + 1) / K);
    sys.C[i] = MatrixXd::Zero(2, n);
  }
  sys.B1 = MatrixXd::Ones(n, 1);
  sys.B2 = MatrixXd::Ones(n, 1);
  sys.C0 = MatrixXd::Zero(2, n);
  sys.C0.row(0).setOnes();
  sys.D1 = MatrixXd::Zero(2, 1);
  sys.D2 = (MatrixXd(2, 1) << 0, 1).finished();
  return sys;
}

DelaySystem example_shower(int n_u, std::vector<double> alpha,
                           std::vector<std::vector<double>> gamma,
                           std::vector<double> tau) {
  if (n_u <= 0) throw std::runtime_error("shower: n_u must be positive");
  if (alpha.empty()) alpha.assign(n_u, 1.0);
  if (gamma.empty())
    gamma.assign(n_u, std::vector<double>(n_u, 1.0 / n_u));
  if (tau.empty())
    for (int i = 1; i <= n_u; ++i) tau.push_back(i);
  if (static_cast<int>(alpha.size()) != n_u ||
      static_cast<int>(gamma.size()) != n_u ||
      static_cast<int>(tau.size()) != n_u)
    throw std::runtime_error("shower: parameter lengths must equal n_u");

  const int n = 2 * n_u;
  DelaySystem sys = open_loop(n, n_u);
  sys.m = n_u;
  sys.p = n_u;
  sys.q = 2 * n_u;
  sys.tau = tau;

  // x = (tap positions T1, water temperatures T2). Delay channel k carries
  // the user-k temperature feedback plus its couplings into other users.
  sys.A0 = MatrixXd::Zero(n, n);
  sys.A0.topRightCorner(n_u, n_u).setIdentity();
  for (int k = 0; k < n_u; ++k) {
    MatrixXd Ak = MatrixXd::Zero(n, n);
    for (int i = 0; i < n_u; ++i)
      Ak(n_u + i, n_u + k) = (i == k) ? -alpha[k] : gamma[i][k] * alpha[k];
    sys.A[k] = Ak;
    sys.C[k] = MatrixXd::Zero(sys.q, n);
  }

  // Coupling matrix with entries alpha_j * gamma_ij, zero diagonal.
  MatrixXd Gh = MatrixXd::Zero(n_u, n_u);
  for (int i = 0; i < n_u; ++i)
    for (int j = 0; j < n_u; ++j)
      if (i != j) Gh(i, j) = alpha[j] * gamma[i][j];

  sys.B1 = MatrixXd::Zero(n, n_u);
  sys.B1.topRows(n_u) = -MatrixXd::Identity(n_u, n_u);
  sys.B1.bottomRows(n_u) =
      MatrixXd(Eigen::VectorXd::Map(alpha.data(), n_u).asDiagonal()) - Gh;

  sys.B2 = MatrixXd::Zero(n, n_u);
  sys.B2.bottomRows(n_u).setIdentity();

  sys.C0 = MatrixXd::Zero(sys.q, n);
  sys.C0.topLeftCorner(n_u, n_u).setIdentity();
  sys.D1 = MatrixXd::Zero(sys.q, n_u);
  sys.D2 = MatrixXd::Zero(sys.q, n_u);
  sys.D2.bottomRows(n_u) = 0.1 * MatrixXd::Identity(n_u, n_u);
  return sys;
}

DelaySystem example(const std::string& name,
                    const std::vector<double>& params) {
  auto arg = [&](size_t i, double dflt) {
    return i < params.size() ? params[i] : dflt;
  };
  if (name == "A1") return example_a1(arg(0, 0.846));
  if (name == "A2") return example_a2(arg(0, 1.0));
  if (name == "B1") return example_b1(arg(0, 0.99));
  if (name == "B2") return example_b2(arg(0, 0.3));
  if (name == "B3") return example_b3(arg(0, 1.0), arg(1, 2.0));
  if (name == "B4")
    return example_b4(static_cast<int>(arg(0, 1)), static_cast<int>(arg(1, 1)));
  if (name == "shower")
    return example_shower(static_cast<int>(arg(0, 1)));
  throw std::runtime_error("unknown example: " + name);
}

}  // namespace delsyn
