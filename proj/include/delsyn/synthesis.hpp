#pragma once

#include "delsyn/conic.hpp"
#include "delsyn/positivity.hpp"
#include "delsyn/system.hpp"

#include <optional>

// Full-state-feedback controller synthesis with a closed-loop L2-gain bound
// gamma. The decision operator P{P,Q_i,S_i,R_ij} is parameterized through
// the positivity cone of degree d; the control operator
//   u = Z0 x + sum_i Z1i phi_i(-tau_i) + sum_i int Z2i(s) phi_i(s) ds
// is free. Feasibility at fixed gamma is one SDP; gamma is bisected.

namespace delsyn {

struct ControlOperatorZ {
  int p = 0, n = 0, K = 0;
  MatrixXd Z0;                // p x n
  std::vector<MatrixXd> Z1;   // K entries, p x n
  std::vector<PolyMat1> Z2;   // K entries, p x n on [-tau_i, 0]

  static ControlOperatorZ zero(int p, int n, const std::vector<double>& tau,
                               int deg);
};

// u for a polynomial history element (x, phi).
VectorXd apply_control(const ControlOperatorZ& Z, const VectorXd& x,
                       const std::vector<PolyMat1>& phi);

// Closed-loop dissipation blocks {D, E_i, Sdot_i, G_ij}, packaged as an
// operator tuple on R^{q+m+n(K+1)} x prod_i L2^n so the structured-operator
// machinery (quadratic forms, single-delay rewrite) applies directly.
// Block order of the matrix part: v (q), w (m), y1 (n), f_1..f_K (n each).
PqrsOperator assemble_blocks(const DelaySystem& sys, const PqrsOperator& op,
                             const ControlOperatorZ& Z, double gamma);

// Infinitesimal generator on polynomial elements:
// [x; phi_i] -> (A0 x + sum_i A_i phi_i(-tau_i) + B2 u, phidot_i).
std::pair<VectorXd, std::vector<PolyMat1>> apply_generator(
    const DelaySystem& sys, const VectorXd& x,
    const std::vector<PolyMat1>& phi, const VectorXd& u);

// Fixed-degree SDP for one plant. Free variables are the coefficients of
// the degree-d decision polynomials P, Q_i, S_i, R_ij followed by the
// controller coefficients Z0, Z1i, Z2i (Z2 of degree d); PSD blocks are
// [M1a, M1b, M2a, M2b], the two certificates of each cone membership.
// Equality rows impose the self-adjointness structure on the decision
// tuple and match both memberships slot by slot. gamma enters the
// right-hand side only.
struct SynthesisSDP {
  DelaySystem sys;
  int d = 0;
  double eps = 0;
  ConeMembership cm1;  // Xi_{d, n, nK}
  ConeMembership cm2;  // Xi_{d, q+m+n(K+1), nK}
  PqrsLayout dec;      // decision tuple layout, all parts degree d
  PqrsLayout ext2;     // matching layout for the transformed blocks
  int tdim = 0;        // decision tuple coefficients
  int zdim = 0;        // Z0, Z1i, Z2i coefficients
  int z2deg = 0;
  ConicProblem base;   // rhs at gamma = 0
  VectorXd rhs_gamma;  // full rhs = base.rhs + gamma * rhs_gamma
};

// eps <= 0 selects the default 1e-4 * max(1, |A0|).
SynthesisSDP build_sdp(const DelaySystem& sys, int d, double eps = -1.0);
ConicProblem instantiate(const SynthesisSDP& sdp, double gamma);

// Decision-variable recovery from a solved point.
PqrsOperator recover_operator(const SynthesisSDP& sdp,
                              const ConicSolution& sol);
ControlOperatorZ recover_control(const SynthesisSDP& sdp,
                                 const ConicSolution& sol);

struct SolveReport {
  enum class Status { optimal, infeasible, numerical_failure };
  Status status = Status::numerical_failure;
  double gamma = 0;
  PqrsOperator op;
  ControlOperatorZ Z;
  int iterations = 0;
  double rp = 0, mu = 0;
  int solves = 0;  // feasibility SDPs solved (bisection)
};

SolveReport solve_at_gamma(const SynthesisSDP& sdp, double gamma,
                           const ConicOptions& opt = {});

// Bisection on gamma; expands gamma_hi by x10 (up to 1e6) until feasible.
// status == infeasible means no feasible gamma <= 1e6 at this degree.
SolveReport bisect_gamma(const DelaySystem& sys, int d, double eps = -1.0,
                         double tol = 1e-4, double gamma_lo = 0.0,
                         double gamma_hi = 1.0,
                         const ConicOptions& opt = {});

// Delay-free H-infinity state feedback:
//   [PA' + AP + Z'B2' + B2Z,  B1,    PC' + Z'D2';
//    B1',                     -gI,   D1';
//    CP + D2Z,                D1,    -gI] < 0,  P > 0,  K = Z P^{-1}.
struct OdeSynthesis {
  MatrixXd P, Z, K;
};
std::optional<OdeSynthesis> synthesize_ode(const MatrixXd& A,
                                           const MatrixXd& B1,
                                           const MatrixXd& B2,
                                           const MatrixXd& C,
                                           const MatrixXd& D1,
                                           const MatrixXd& D2, double gamma,
                                           bool* solver_ok = nullptr);

}  // namespace delsyn
