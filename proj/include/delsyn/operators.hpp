#pragma once

#include "delsyn/polymat.hpp"

#include <random>
#include <vector>

// Operators P{P, Q_i, S_i, R_ij} acting on R^m x prod_i L2^n[-tau_i, 0]:
//   matrix part:  P x + sum_i int Q_i(s) phi_i(s) ds
//   channel i:    tauK Q_i(s)^T x + tauK S_i(s) phi_i(s)
//                 + sum_j int R_ij(s,theta) phi_j(theta) dtheta
// with inner product tauK y^T x + sum_i int psi_i^T phi_i.

namespace delsyn {

using Eigen::VectorXd;

struct PqrsOperator {
  int m = 0;  // matrix-part dimension
  int n = 0;  // function-part dimension per channel
  int K = 0;
  MatrixXd P;                            // m x m
  std::vector<PolyMat1> Q;               // K entries, m x n on [-tau_i, 0]
  std::vector<PolyMat1> S;               // K entries, n x n
  std::vector<std::vector<PolyMat2>> R;  // K x K, n x n
  std::vector<double> tau;

  double tauMax() const { return tau.back(); }
  static PqrsOperator zero(int m, int n, const std::vector<double>& tau,
                           int deg_q, int deg_s, int deg_r);
};

// Element of R^m x prod_i L2^n[-tau_i,0], each channel sampled on a uniform
// grid with N_i+1 nodes spanning exactly [-tau_i, 0].
struct SampledZ {
  VectorXd x;
  std::vector<MatrixXd> phi;  // n rows, N_i+1 columns
  std::vector<double> tau;

  static SampledZ zero(int m, int n, const std::vector<double>& tau,
                       int nodes = 200);
  int channels() const { return static_cast<int>(phi.size()); }
};

SampledZ apply(const PqrsOperator& op, const SampledZ& z);
double inner_product(const SampledZ& a, const SampledZ& b);

// <z, P z> evaluated with exact polynomial algebra when every channel is a
// polynomial; reference path for the quadrature used by apply.
double quad_form_exact(const PqrsOperator& op, const VectorXd& x,
                       const std::vector<PolyMat1>& phi);

// Flat coefficient indexing of a PqrsOperator with fixed per-part degrees.
// Order: P (row-major), then Q_1..Q_K (degree-major, row-major), S likewise,
// then R_11, R_12, ..., R_KK (s-degree-major, theta-degree, row-major).
struct PqrsLayout {
  int m = 0, n = 0, K = 0;
  int deg_q = 0, deg_s = 0, deg_r = 0;
  std::vector<double> tau;

  int sizeP() const { return m * m; }
  int sizeQ() const { return (deg_q + 1) * m * n; }
  int sizeS() const { return (deg_s + 1) * n * n; }
  int sizeR() const { return (deg_r + 1) * (deg_r + 1) * n * n; }
  int offsetP() const { return 0; }
  int offsetQ(int i) const { return sizeP() + i * sizeQ(); }
  int offsetS(int i) const { return sizeP() + K * sizeQ() + i * sizeS(); }
  int offsetR(int i, int j) const {
    return sizeP() + K * (sizeQ() + sizeS()) + (i * K + j) * sizeR();
  }
  int total() const { return sizeP() + K * (sizeQ() + sizeS()) + K * K * sizeR(); }

  int idxP(int r, int c) const { return r * m + c; }
  int idxQ(int i, int k, int r, int c) const {
    return offsetQ(i) + (k * m + r) * n + c;
  }
  int idxS(int i, int k, int r, int c) const {
    return offsetS(i) + (k * n + r) * n + c;
  }
  int idxR(int i, int j, int a, int b, int r, int c) const {
    return offsetR(i, j) + ((a * (deg_r + 1) + b) * n + r) * n + c;
  }
};

VectorXd flatten(const PqrsLayout& layout, const PqrsOperator& op);
PqrsOperator unflatten(const PqrsLayout& layout, const VectorXd& v);

// Homogeneous affine constraint sum_k coeff_k * v[idx_k] = 0 over the
// flattened coefficient vector.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
};

// Self-adjointness structure: S_i symmetric, R_ij(s,t) = R_ji(t,s)^T,
// P = tauK Q_i(0)^T + tauK S_i(0) for each i, Q_j(s) = R_ij(0,s) for all
// i, j. Requires layout.m == layout.n.
std::vector<LinearConstraint> structural_constraints(const PqrsLayout& layout);

// Random operator satisfying structural_constraints, built by projecting an
// i.i.d. draw onto the constraint nullspace.
PqrsOperator random_structured(const PqrsLayout& layout, std::mt19937& rng);

// Multi-delay to single-delay rewrite: the result has one channel of
// dimension n*K on [-tauK, 0] and the same quadratic form under the change
// of variables phi~_i(s) = sqrt(a_i) phi_i(a_i s), a_i = tau_i / tauK.
PqrsOperator l1_transform(const PqrsOperator& op);
// The matching change of variables on samples; requires equal node counts
// per channel so the rescaled grids line up exactly.
SampledZ l1_transform_sample(const SampledZ& z);

}  // namespace delsyn
