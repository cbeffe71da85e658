#include "delsyn/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace delsyn {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

MatrixXd eye(int n) { return MatrixXd::Identity(n, n); }

// Z variable layout: Z0 row-major, then Z1_1..Z1_K, then Z2_i coefficients
// (degree-major, row-major).
int zvar_count(const DelaySystem& sys, int z2deg) {
  return sys.p * sys.n * (1 + sys.K + sys.K * (z2deg + 1));
}

ControlOperatorZ unpack_z(const DelaySystem& sys, int z2deg,
                          const VectorXd& v) {
  const int p = sys.p, n = sys.n, K = sys.K;
  ControlOperatorZ Z = ControlOperatorZ::zero(p, n, sys.tau, z2deg);
  int at = 0;
  auto take = [&](MatrixXd& M) {
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < n; ++c) M(r, c) = v(at++);
  };
  take(Z.Z0);
  for (int i = 0; i < K; ++i) take(Z.Z1[i]);
  for (int i = 0; i < K; ++i)
    for (int k = 0; k <= z2deg; ++k) take(Z.Z2[i][k]);
  return Z;
}

double default_eps(const DelaySystem& sys) {
  return 1e-4 * std::max(1.0, sys.A0.norm());
}

}  // namespace

ControlOperatorZ ControlOperatorZ::zero(int p, int n,
                                        const std::vector<double>& tau,
                                        int deg) {
  ControlOperatorZ Z;
  Z.p = p;
  Z.n = n;
  Z.K = static_cast<int>(tau.size());
  Z.Z0 = MatrixXd::Zero(p, n);
  for (double t : tau) {
    Z.Z1.push_back(MatrixXd::Zero(p, n));
    Z.Z2.emplace_back(p, n, deg, t);
  }
  return Z;
}

VectorXd apply_control(const ControlOperatorZ& Z, const VectorXd& x,
                       const std::vector<PolyMat1>& phi) {
  check(static_cast<int>(phi.size()) == Z.K, "apply_control: channel count");
  VectorXd u = Z.Z0 * x;
  for (int i = 0; i < Z.K; ++i) {
    u += Z.Z1[i] * VectorXd(evaluate(phi[i], -phi[i].tau()));
    u += VectorXd(definite_integral(mul(Z.Z2[i], phi[i])));
  }
  return u;
}

std::pair<VectorXd, std::vector<PolyMat1>> apply_generator(
    const DelaySystem& sys, const VectorXd& x,
    const std::vector<PolyMat1>& phi, const VectorXd& u) {
  VectorXd head = sys.A0 * x + sys.B2 * u;
  std::vector<PolyMat1> dot;
  for (int i = 0; i < sys.K; ++i) {
    head += sys.A[i] * VectorXd(evaluate(phi[i], -sys.tau[i]));
    dot.push_back(differentiate(phi[i]));
  }
  return {head, dot};
}

PqrsOperator assemble_blocks(const DelaySystem& sys, const PqrsOperator& op,
                             const ControlOperatorZ& Z, double gamma) {
  const int n = sys.n, m = sys.m, p = sys.p, q = sys.q, K = sys.K;
  check(op.m == n && op.n == n && op.K == K, "assemble_blocks: operator dims");
  check(Z.p == p && Z.n == n && Z.K == K, "assemble_blocks: control dims");
  const double tauK = sys.tauMax();
  const int m0 = q + m + n * (K + 1);
  const int ov = 0, ow = q, oy = q + m;
  auto of = [&](int i) { return q + m + n + i * n; };

  MatrixXd L0 = sys.A0 * op.P + sys.B2 * Z.Z0;
  MatrixXd L1m = sys.C0 * op.P / tauK + sys.D2 * Z.Z0 / tauK;
  for (int i = 0; i < K; ++i) {
    MatrixXd Qit = evaluate(op.Q[i], -sys.tau[i]).transpose();
    L0 += tauK * sys.A[i] * Qit + 0.5 * evaluate(op.S[i], 0.0);
    L1m += sys.C[i] * Qit;
  }

  PqrsOperator gen = PqrsOperator::zero(
      m0, n, sys.tau, /*deg_q*/ 0, /*deg_s*/ 0, /*deg_r*/ 0);
  MatrixXd D = MatrixXd::Zero(m0, m0);
  D.block(ov, ov, q, q) = -(gamma / tauK) * eye(q);
  D.block(ow, ow, m, m) = -(gamma / tauK) * eye(m);
  D.block(oy, oy, n, n) = L0 + L0.transpose();
  D.block(ov, ow, q, m) = sys.D1 / tauK;
  D.block(ow, ov, m, q) = sys.D1.transpose() / tauK;
  D.block(ow, oy, m, n) = sys.B1.transpose();
  D.block(oy, ow, n, m) = sys.B1;
  D.block(ov, oy, q, n) = L1m;
  D.block(oy, ov, n, q) = L1m.transpose();
  for (int i = 0; i < K; ++i) {
    MatrixXd Si = evaluate(op.S[i], -sys.tau[i]);
    MatrixXd L2 = sys.C[i] * Si + sys.D2 * Z.Z1[i] / tauK;
    MatrixXd L3 = tauK * sys.A[i] * Si + sys.B2 * Z.Z1[i];
    D.block(of(i), of(i), n, n) = -Si;
    D.block(ov, of(i), q, n) = L2;
    D.block(of(i), ov, n, q) = L2.transpose();
    D.block(oy, of(i), n, n) = L3;
    D.block(of(i), oy, n, n) = L3.transpose();
  }
  gen.P = D;

  for (int i = 0; i < K; ++i) {
    double ti = sys.tau[i];
    PolyMat1 top = mul(PolyMat1::constant(sys.C0, ti), op.Q[i]);
    PolyMat1 mid = add(mul(PolyMat1::constant(sys.A0, ti), op.Q[i]),
                       differentiate(op.Q[i]));
    for (int j = 0; j < K; ++j) {
      PolyMat1 Rji = evaluate_partial(op.R[j][i], Var::s, -sys.tau[j]);
      top = add(top, mul(PolyMat1::constant(sys.C[j], ti), Rji));
      mid = add(mid, mul(PolyMat1::constant(sys.A[j], ti), Rji));
    }
    top = add(top, mul(PolyMat1::constant(sys.D2, ti), Z.Z2[i]));
    mid = add(mid, mul(PolyMat1::constant(sys.B2, ti), Z.Z2[i]));
    top = scale(top, 1.0 / tauK);
    int deg = std::max(top.degree(), mid.degree());
    PolyMat1 Ei(m0, n, deg, ti);
    for (int k = 0; k <= deg; ++k) {
      if (k <= top.degree()) Ei[k].middleRows(ov, q) = top[k];
      if (k <= mid.degree()) Ei[k].middleRows(oy, n) = mid[k];
    }
    gen.Q[i] = Ei;
    gen.S[i] = differentiate(op.S[i]);
    for (int j = 0; j < K; ++j)
      gen.R[i][j] = add(differentiate(op.R[i][j], Var::s),
                        differentiate(op.R[i][j], Var::theta));
  }
  return gen;
}

SynthesisSDP build_sdp(const DelaySystem& sys, int d, double eps) {
  const int n = sys.n, K = sys.K, p = sys.p;
  const int nK = n * K;
  const int m0 = sys.q + sys.m + n * (K + 1);
  const double tauK = sys.tauMax();
  check(d >= 0, "build_sdp: degree must be nonnegative");
  check(validate(sys).empty(), "build_sdp: invalid system");

  SynthesisSDP sdp;
  sdp.sys = sys;
  sdp.d = d;
  sdp.eps = eps > 0 ? eps : default_eps(sys);
  sdp.cm1 = cone_membership(d, n, nK, tauK);
  sdp.cm2 = cone_membership(2 * d + 2, m0, nK, tauK);
  // Decision degrees fill the first cone's image exactly (Q at d+2, S and
  // R at 2d+2). The transformed blocks then have degree at most 2d+2, which
  // is exactly the Q-image degree of a membership at parameter 2d, so the
  // second membership loses nothing to truncation.
  sdp.z2deg = 2 * d + 4;
  sdp.zdim = zvar_count(sys, sdp.z2deg);
  sdp.dec.m = n;
  sdp.dec.n = n;
  sdp.dec.K = K;
  sdp.dec.deg_q = d + 2;
  sdp.dec.deg_s = 2 * d + 2;
  sdp.dec.deg_r = 2 * d + 2;
  sdp.dec.tau = sys.tau;
  sdp.tdim = sdp.dec.total();
  sdp.ext2 = sdp.cm2.tuple_layout;

  const PqrsLayout& dec = sdp.dec;
  const PqrsLayout& lay1 = sdp.cm1.tuple_layout;
  const PqrsLayout& ext2 = sdp.ext2;

  ConicProblem& prob = sdp.base;
  prob.addPsdBlock(sdp.cm1.psd_size);  // 0: first-cone, multiplier g1
  prob.addPsdBlock(sdp.cm1.psd_size);  // 1: first-cone, multiplier g2
  prob.addPsdBlock(sdp.cm2.psd_size);  // 2: second-cone, g1
  prob.addPsdBlock(sdp.cm2.psd_size);  // 3: second-cone, g2
  prob.nfree = sdp.tdim + sdp.zdim;

  // Canonical slot -> row maps for the two membership matchings; the
  // non-canonical partner of each slot carries an equation that is
  // identical modulo the self-adjointness rows added below.
  int nrows = 0;
  auto slot_rows = [&nrows](const PqrsLayout& lt) {
    std::vector<int> sr(lt.total(), -1);
    for (int r = 0; r < lt.m; ++r)
      for (int c = r; c < lt.m; ++c) sr[lt.idxP(r, c)] = nrows++;
    for (int k = 0; k <= lt.deg_q; ++k)
      for (int r = 0; r < lt.m; ++r)
        for (int c = 0; c < lt.n; ++c) sr[lt.idxQ(0, k, r, c)] = nrows++;
    for (int k = 0; k <= lt.deg_s; ++k)
      for (int r = 0; r < lt.n; ++r)
        for (int c = r; c < lt.n; ++c) sr[lt.idxS(0, k, r, c)] = nrows++;
    for (int a = 0; a <= lt.deg_r; ++a)
      for (int b = 0; b <= lt.deg_r; ++b)
        for (int r = 0; r < lt.n; ++r)
          for (int c = 0; c < lt.n; ++c)
            if (std::tie(a, r, c) <= std::tie(b, c, r))
              sr[lt.idxR(0, 0, a, b, r, c)] = nrows++;
    return sr;
  };
  std::vector<int> row1 = slot_rows(lay1);
  std::vector<int> row2 = slot_rows(ext2);
  const int match_rows = nrows;

  // Certificate terms: first membership reads  L1(tuple - epsT) = image,
  // second reads  L1(blocks + shifts) + image = 0.
  auto add_cert = [&](const std::vector<int>& rows, const ConeMembership& cm,
                      int blk, double sign) {
    const PqrsLayout& lt = cm.tuple_layout;
    for (int s = 0; s < lt.total(); ++s)
      if (rows[s] >= 0) {
        for (const auto& e : cm.map1.slots[s])
          prob.add(rows[s], blk, e.row, e.col, sign * e.w);
        for (const auto& e : cm.map2.slots[s])
          prob.add(rows[s], blk + 1, e.row, e.col, sign * e.w);
      }
  };
  add_cert(row1, sdp.cm1, 0, -1.0);
  add_cert(row2, sdp.cm2, 2, 1.0);

  // Affine pipelines from the decision coefficients to the two matchings.
  auto pipe1 = [&](const PqrsOperator& op) {
    return flatten(lay1, l1_transform(op));
  };
  const int oy = sys.q + sys.m;
  auto pipe2 = [&](const PqrsOperator& op, const VectorXd& zvec, double gamma,
                   double e) {
    ControlOperatorZ Z = unpack_z(sys, sdp.z2deg, zvec);
    PqrsOperator gen = assemble_blocks(sys, op, Z, gamma);
    gen.P.block(oy, oy, n, n) += e * eye(n);
    for (int i = 0; i < K; ++i) gen.S[i][0] += e * eye(n);
    return flatten(ext2, l1_transform(gen));
  };

  const PqrsOperator zop = PqrsOperator::zero(n, n, sys.tau, d, d, d);
  const VectorXd zeroz = VectorXd::Zero(sdp.zdim);
  // Constant system blocks (B1, D1) appear at zero input; probes are
  // measured relative to this baseline.
  const VectorXd base0 = pipe2(zop, zeroz, 0.0, 0.0);
  VectorXd c0 = pipe2(zop, zeroz, 0.0, sdp.eps);
  VectorXd c1 = pipe2(zop, zeroz, 1.0, sdp.eps) - c0;

  auto probe_column = [&](const VectorXd& col, const std::vector<int>& rows,
                          int var) {
    double mx = col.size() ? col.cwiseAbs().maxCoeff() : 0.0;
    double drop = 1e-13 * std::max(1.0, mx);
    for (int s = 0; s < col.size(); ++s)
      if (std::abs(col(s)) > drop && rows[s] >= 0)
        prob.addFree(rows[s], var, col(s));
  };

  for (int t = 0; t < sdp.tdim; ++t) {
    VectorXd v = VectorXd::Zero(sdp.tdim);
    v(t) = 1.0;
    PqrsOperator op = unflatten(dec, v);
    probe_column(pipe1(op), row1, t);
    probe_column(VectorXd(pipe2(op, zeroz, 0.0, 0.0) - base0), row2, t);
  }
  for (int k = 0; k < sdp.zdim; ++k) {
    VectorXd zv = VectorXd::Zero(sdp.zdim);
    zv(k) = 1.0;
    probe_column(VectorXd(pipe2(zop, zv, 0.0, 0.0) - base0), row2,
                 sdp.tdim + k);
  }

  // Self-adjointness rows on the decision coefficients.
  std::vector<LinearConstraint> structure = structural_constraints(dec);
  for (size_t s = 0; s < structure.size(); ++s)
    for (const auto& [idx, coef] : structure[s].terms)
      prob.addFree(match_rows + static_cast<int>(s), idx, coef);
  nrows += static_cast<int>(structure.size());

  // Right-hand sides: eps shift of the first membership, constant and
  // gamma-proportional parts of the second.
  PqrsOperator epsT = PqrsOperator::zero(n, n, sys.tau, d, d, d);
  epsT.P = sdp.eps * eye(n);
  for (int i = 0; i < K; ++i) epsT.S[i][0] = sdp.eps * eye(n);
  VectorXd rhs1 = pipe1(epsT);

  prob.rhs = VectorXd::Zero(nrows);
  sdp.rhs_gamma = VectorXd::Zero(nrows);
  for (int s = 0; s < lay1.total(); ++s)
    if (row1[s] >= 0) prob.rhs(row1[s]) = rhs1(s);
  for (int s = 0; s < ext2.total(); ++s)
    if (row2[s] >= 0) {
      prob.rhs(row2[s]) = -c0(s);
      sdp.rhs_gamma(row2[s]) = -c1(s);
    }
  return sdp;
}

ConicProblem instantiate(const SynthesisSDP& sdp, double gamma) {
  ConicProblem prob = sdp.base;
  prob.rhs += gamma * sdp.rhs_gamma;
  return prob;
}

PqrsOperator recover_operator(const SynthesisSDP& sdp,
                              const ConicSolution& sol) {
  return unflatten(sdp.dec, sol.f.head(sdp.tdim));
}

ControlOperatorZ recover_control(const SynthesisSDP& sdp,
                                 const ConicSolution& sol) {
  return unpack_z(sdp.sys, sdp.z2deg, sol.f.segment(sdp.tdim, sdp.zdim));
}

SolveReport solve_at_gamma(const SynthesisSDP& sdp, double gamma,
                           const ConicOptions& opt) {
  SolveReport rep;
  rep.gamma = gamma;
  rep.solves = 1;
  auto feas = solve_feasibility(instantiate(sdp, gamma), opt);
  if (!feas.solver_ok) {
    rep.status = SolveReport::Status::numerical_failure;
    return rep;
  }
  if (!feas.feasible) {
    rep.status = SolveReport::Status::infeasible;
    return rep;
  }
  rep.status = SolveReport::Status::optimal;
  rep.op = recover_operator(sdp, feas.point);
  rep.Z = recover_control(sdp, feas.point);
  rep.iterations = feas.point.iters;
  rep.rp = feas.point.rp;
  rep.mu = feas.point.mu;
  return rep;
}

SolveReport bisect_gamma(const DelaySystem& sys, int d, double eps,
                         double tol, double gamma_lo, double gamma_hi,
                         const ConicOptions& opt) {
  SynthesisSDP sdp = build_sdp(sys, d, eps);
  SolveReport best;
  best.status = SolveReport::Status::infeasible;
  int solves = 0;

  double lo = gamma_lo, hi = gamma_hi;
  for (;;) {
    SolveReport r = solve_at_gamma(sdp, hi, opt);
    solves += r.solves;
    if (r.status == SolveReport::Status::optimal) {
      best = r;
      break;
    }
    lo = hi;
    hi *= 10.0;
    if (hi > 1e6) {
      best.solves = solves;
      return best;  // not stabilizable at this degree
    }
  }

  while (hi - lo > tol * hi) {
    double mid = 0.5 * (lo + hi);
    SolveReport r = solve_at_gamma(sdp, mid, opt);
    solves += r.solves;
    if (r.status == SolveReport::Status::optimal) {
      best = r;
      hi = mid;
    } else {
      lo = mid;
    }
  }
  best.solves = solves;
  return best;
}

std::optional<OdeSynthesis> synthesize_ode(const MatrixXd& A,
                                           const MatrixXd& B1,
                                           const MatrixXd& B2,
                                           const MatrixXd& C,
                                           const MatrixXd& D1,
                                           const MatrixXd& D2, double gamma,
                                           bool* solver_ok) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B1.cols());
  const int p = static_cast<int>(B2.cols());
  const int q = static_cast<int>(C.rows());
  check(A.cols() == n && B1.rows() == n && B2.rows() == n && C.cols() == n &&
            D1.rows() == q && D1.cols() == m && D2.rows() == q &&
            D2.cols() == p,
        "synthesize_ode: dimension mismatch");
  const int nl = n + m + q;
  const double delta = 1e-6 * std::max(1.0, A.norm());

  auto lmi = [&](const MatrixXd& P, const MatrixXd& Z) {
    MatrixXd M = MatrixXd::Zero(nl, nl);
    M.topLeftCorner(n, n) = P * A.transpose() + A * P +
                            Z.transpose() * B2.transpose() + B2 * Z;
    M.block(0, n, n, m) = B1;
    M.block(n, 0, m, n) = B1.transpose();
    M.block(0, n + m, n, q) = P * C.transpose() + Z.transpose() * D2.transpose();
    M.block(n + m, 0, q, n) = C * P + D2 * Z;
    M.block(n, n, m, m) = -gamma * eye(m);
    M.block(n, n + m, m, q) = D1.transpose();
    M.block(n + m, n, q, m) = D1;
    M.block(n + m, n + m, q, q) = -gamma * eye(q);
    return M;
  };

  // P = Pb + delta I with Pb PSD; slack Y PSD with lmi(P,Z) + Y = -delta I.
  ConicProblem prob;
  int bP = prob.addPsdBlock(n);
  int bY = prob.addPsdBlock(nl);
  prob.nfree = p * n;
  int nrows = nl * (nl + 1) / 2;
  prob.rhs = VectorXd::Zero(nrows);

  auto row_of = [&](int r, int c) {  // r <= c
    return r * nl - r * (r - 1) / 2 + (c - r);
  };
  MatrixXd base = lmi(delta * eye(n), MatrixXd::Zero(p, n));
  for (int r = 0; r < nl; ++r)
    for (int c = r; c < nl; ++c) {
      int row = row_of(r, c);
      prob.add(row, bY, r, c, 1.0);
      prob.rhs(row) = -(r == c ? delta : 0.0) - base(r, c);
    }
  MatrixXd zeroZ = MatrixXd::Zero(p, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      MatrixXd Pb = MatrixXd::Zero(n, n);
      Pb(i, j) = Pb(j, i) = 1.0;
      MatrixXd dM = lmi(Pb, zeroZ) - lmi(MatrixXd::Zero(n, n), zeroZ);
      for (int r = 0; r < nl; ++r)
        for (int c = r; c < nl; ++c)
          if (dM(r, c) != 0.0) prob.add(row_of(r, c), bP, i, j, dM(r, c));
    }
  MatrixXd lmi0 = lmi(MatrixXd::Zero(n, n), zeroZ);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) {
      MatrixXd Zb = MatrixXd::Zero(p, n);
      Zb(i, j) = 1.0;
      MatrixXd dM = lmi(MatrixXd::Zero(n, n), Zb) - lmi0;
      for (int r = 0; r < nl; ++r)
        for (int c = r; c < nl; ++c)
          if (dM(r, c) != 0.0) prob.addFree(row_of(r, c), i * n + j, dM(r, c));
    }

  auto rep = solve_feasibility(prob);
  if (solver_ok) *solver_ok = rep.solver_ok;
  if (!rep.feasible) return std::nullopt;
  OdeSynthesis out;
  out.P = rep.point.X[bP] + delta * eye(n);
  out.Z = MatrixXd::Zero(p, n);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) out.Z(i, j) = rep.point.f(i * n + j);
  out.K = out.Z * out.P.inverse();
  return out;
}

}  // namespace delsyn
