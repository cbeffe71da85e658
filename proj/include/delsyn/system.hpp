#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

// Linear plant with multiple discrete state delays:
//   xdot(t) = A0 x(t) + sum_i Ai x(t - tau_i) + B1 w(t) + B2 u(t)
//   y(t)    = C0 x(t) + sum_i Ci x(t - tau_i) + D1 w(t) + D2 u(t)

namespace delsyn {

using Eigen::MatrixXd;

struct DelaySystem {
  int n = 0;  // states
  int m = 0;  // disturbances
  int p = 0;  // control inputs
  int q = 0;  // regulated outputs
  int K = 0;  // delay channels

  MatrixXd A0;
  std::vector<MatrixXd> A;   // K entries, n x n
  std::vector<double> tau;   // K entries, strictly increasing, positive
  MatrixXd B1, B2, C0;
  std::vector<MatrixXd> C;   // K entries, q x n
  MatrixXd D1, D2;

  double tauMax() const { return tau.empty() ? 0.0 : tau.back(); }
};

// Returns the list of invariant violations; empty means the system is valid.
std::vector<std::string> validate(const DelaySystem& sys);

// JSON system-file round trip. parse throws std::runtime_error on malformed
// input or an invalid system.
std::string serialize_system(const DelaySystem& sys);
DelaySystem parse_system(const std::string& json_text);
DelaySystem load_system(const std::string& path);
void save_system(const DelaySystem& sys, const std::string& path);

// Benchmark plants. Delay/size parameters are explicit where the source
// model leaves them free.
DelaySystem example_a1(double tau = 0.846);
DelaySystem example_a2(double tau);
DelaySystem example_b1(double tau);
DelaySystem example_b2(double tau);
DelaySystem example_b3(double tau1 = 1.0, double tau2 = 2.0);
DelaySystem example_b4(int n, int K);
// Shared hot-water plant with n_u users: 2*n_u states, n_u delays.
// Empty parameter vectors select the defaults alpha_i = 1,
// gamma_ij = 1/n_u, tau_i = i.
DelaySystem example_shower(int n_u, std::vector<double> alpha = {},
                           std::vector<std::vector<double>> gamma = {},
                           std::vector<double> tau = {});

// Dispatch by name: A1, A2, B1, B2, B3, B4, shower. `params` are the
// numeric arguments in declaration order; missing entries take defaults.
DelaySystem example(const std::string& name,
                    const std::vector<double>& params = {});

}  // namespace delsyn
