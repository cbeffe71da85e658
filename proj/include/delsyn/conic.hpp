#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

// Solver-agnostic equality-form semidefinite program:
//   find / min  sum_b <C_b, X_b> + c_f . f
//   subject to  sum_b <A_rb, X_b> + a_rf . f = b_r   for every row r,
//               X_b symmetric PSD, f free.
// Solved by a primal-dual interior-point method with Nesterov-Todd scaling.

namespace delsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ConicProblem {
  std::vector<int> psd;  // PSD block sizes
  int nfree = 0;

  // One addend of an equality row: coefficient c on entry (i,j) of block
  // `block` (the matrix is symmetric; (i,j) and (j,i) refer to the same
  // unknown), or on free variable i when block == -1.
  struct Term {
    int row;
    int block;  // -1 for a free variable
    int i, j;
    double c;
  };
  std::vector<Term> terms;
  VectorXd rhs;

  std::vector<MatrixXd> C;  // objective per block; empty means zero
  VectorXd cfree;           // objective on free vars; empty means zero

  int rows() const { return static_cast<int>(rhs.size()); }
  int addPsdBlock(int size) {
    psd.push_back(size);
    return static_cast<int>(psd.size()) - 1;
  }
  void add(int row, int block, int i, int j, double c) {
    terms.push_back({row, block, i, j, c});
  }
  void addFree(int row, int var, double c) {
    terms.push_back({row, -1, var, 0, c});
  }
};

struct ConicOptions {
  int max_iter = 100;
  double tol_feas = 1e-9;   // primal/dual residual, relative
  double tol_gap = 1e-10;   // complementarity mu, relative
  double reg = 1e-11;       // static normal-matrix regularization
  bool verbose = false;
  VectorXd f0;              // optional initial free variables (else zero)
  std::vector<MatrixXd> X0; // optional initial PSD blocks (else scaled I)
};

struct ConicSolution {
  enum class Status { optimal, max_iter, failure };
  Status status = Status::failure;
  std::vector<MatrixXd> X;
  VectorXd f;
  VectorXd y;
  double objective = 0;
  double mu = 0, rp = 0, rd = 0;
  int iters = 0;

  // Best nearly-primal-feasible iterate, kept independently of the
  // dual-accurate solution above; feasibility queries need only this.
  std::vector<MatrixXd> Xp;
  VectorXd fp;
  double rp_p = 1e300, obj_p = 0;

  // Final iterate (most complementarity progress), kept separately: on
  // degenerate instances the residuals plateau and the best-merit iterate
  // can predate most of the objective progress.
  VectorXd f_last;
  double mu_last = 1e300, rp_last = 1e300, rd_last = 1e300, obj_last = 0;
};

ConicSolution solve_conic(const ConicProblem& prob,
                          const ConicOptions& opt = {});

// Two-phase feasibility: phase I minimizes an artificial scalar t with
// A(X,f) + t (b - A(I,0)) = b, which starts strictly feasible at
// (X,f,t) = (I,0,1); the system is feasible when min t <= 0 (within
// tolerance). On success phase II re-solves the original constraints with
// zero objective to return a well-centered interior point.
struct FeasibilityReport {
  bool feasible = false;
  bool solver_ok = true;
  double t_star = 1.0;
  double mu = 0, rp = 0, rd = 0;  // phase-I iterate backing t_star
  ConicSolution point;            // populated when feasible
};

FeasibilityReport solve_feasibility(const ConicProblem& prob,
                                    const ConicOptions& opt = {});

// Sparse triplet text dump (one line per term plus rhs), for debugging
// against external solvers.
std::string dump_problem(const ConicProblem& prob);

}  // namespace delsyn
