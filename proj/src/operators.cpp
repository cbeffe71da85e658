#include "delsyn/operators.hpp"

namespace delsyn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Quadrature weight for node k of N+1 uniform nodes spanning length len:
// trapezoid with Gregory endpoint corrections (O(h^4)) when the grid is
// long enough, plain trapezoid otherwise. Weights are symmetric in k, so
// discrete quadratic forms built from them stay symmetric.
double trap_w(int k, int N, double len) {
  double h = len / N;
  if (N < 6) return (k == 0 || k == N) ? 0.5 * h : h;
  int d = std::min(k, N - k);
  if (d == 0) return 3.0 / 8.0 * h;
  if (d == 1) return 7.0 / 6.0 * h;
  if (d == 2) return 23.0 / 24.0 * h;
  return h;
}

}  // namespace

PqrsOperator PqrsOperator::zero(int m, int n, const std::vector<double>& tau,
                                int deg_q, int deg_s, int deg_r) {
  PqrsOperator op;
  op.m = m;
  op.n = n;
  op.K = static_cast<int>(tau.size());
  op.tau = tau;
  op.P = MatrixXd::Zero(m, m);
  for (int i = 0; i < op.K; ++i) {
    op.Q.emplace_back(m, n, deg_q, tau[i]);
    op.S.emplace_back(n, n, deg_s, tau[i]);
    op.R.emplace_back();
    for (int j = 0; j < op.K; ++j)
      op.R.back().emplace_back(n, n, deg_r, deg_r, tau[i], tau[j]);
  }
  return op;
}

SampledZ SampledZ::zero(int m, int n, const std::vector<double>& tau,
                        int nodes) {
  SampledZ z;
  z.x = VectorXd::Zero(m);
  z.tau = tau;
  for (size_t i = 0; i < tau.size(); ++i)
    z.phi.push_back(MatrixXd::Zero(n, nodes + 1));
  return z;
}

SampledZ apply(const PqrsOperator& op, const SampledZ& z) {
  check(op.K == z.channels() && op.m == z.x.size(),
        "apply: dimension mismatch");
  const double tauK = op.tauMax();
  SampledZ out = z;
  out.x = op.P * z.x;

  for (int i = 0; i < op.K; ++i) {
    check(op.n == z.phi[i].rows(), "apply: channel dimension mismatch");
    const int Ni = static_cast<int>(z.phi[i].cols()) - 1;
    for (int k = 0; k <= Ni; ++k) {
      double s = -op.tau[i] + k * op.tau[i] / Ni;
      out.x += trap_w(k, Ni, op.tau[i]) * evaluate(op.Q[i], s) * z.phi[i].col(k);
    }
  }

  for (int i = 0; i < op.K; ++i) {
    const int Ni = static_cast<int>(z.phi[i].cols()) - 1;
    for (int k = 0; k <= Ni; ++k) {
      double s = -op.tau[i] + k * op.tau[i] / Ni;
      VectorXd v = tauK * evaluate(op.Q[i], s).transpose() * z.x +
                   tauK * evaluate(op.S[i], s) * z.phi[i].col(k);
      for (int j = 0; j < op.K; ++j) {
        const int Nj = static_cast<int>(z.phi[j].cols()) - 1;
        for (int l = 0; l <= Nj; ++l) {
          double theta = -op.tau[j] + l * op.tau[j] / Nj;
          v += trap_w(l, Nj, op.tau[j]) * evaluate(op.R[i][j], s, theta) *
               z.phi[j].col(l);
        }
      }
      out.phi[i].col(k) = v;
    }
  }
  return out;
}

double inner_product(const SampledZ& a, const SampledZ& b) {
  check(a.x.size() == b.x.size() && a.channels() == b.channels(),
        "inner_product: dimension mismatch");
  double tauK = a.tau.back();
  double acc = tauK * a.x.dot(b.x);
  for (int i = 0; i < a.channels(); ++i) {
    check(a.phi[i].cols() == b.phi[i].cols(),
          "inner_product: grid mismatch");
    const int Ni = static_cast<int>(a.phi[i].cols()) - 1;
    for (int k = 0; k <= Ni; ++k)
      acc += trap_w(k, Ni, a.tau[i]) * a.phi[i].col(k).dot(b.phi[i].col(k));
  }
  return acc;
}

double quad_form_exact(const PqrsOperator& op, const VectorXd& x,
                       const std::vector<PolyMat1>& phi) {
  check(static_cast<int>(phi.size()) == op.K, "quad_form_exact: channels");
  const double tauK = op.tauMax();
  double acc = tauK * x.dot(op.P * x);
  for (int i = 0; i < op.K; ++i) {
    // 2 tauK x^T int Q_i phi_i  (Q term appears in both components)
    acc += 2.0 * tauK * x.dot(VectorXd(definite_integral(mul(op.Q[i], phi[i]))));
    // tauK int phi_i^T S_i phi_i
    acc += tauK * definite_integral(
                      mul(transpose(phi[i]), mul(op.S[i], phi[i])))(0, 0);
    // int int phi_i(s)^T R_ij(s,t) phi_j(t): separable in the monomial grid,
    // using u_a = int s^a phi(s) ds per channel.
    for (int j = 0; j < op.K; ++j) {
      const PolyMat2& Rij = op.R[i][j];
      std::vector<VectorXd> ui(Rij.degS() + 1), uj(Rij.degT() + 1);
      for (int a = 0; a <= Rij.degS(); ++a) {
        PolyMat1 mono(1, 1, a, op.tau[i]);
        mono[a](0, 0) = 1.0;
        ui[a] = definite_integral(mul(phi[i], mono));
      }
      for (int b = 0; b <= Rij.degT(); ++b) {
        PolyMat1 mono(1, 1, b, op.tau[j]);
        mono[b](0, 0) = 1.0;
        uj[b] = definite_integral(mul(phi[j], mono));
      }
      for (int a = 0; a <= Rij.degS(); ++a)
        for (int b = 0; b <= Rij.degT(); ++b)
          acc += ui[a].dot(Rij.at(a, b) * uj[b]);
    }
  }
  return acc;
}

VectorXd flatten(const PqrsLayout& lt, const PqrsOperator& op) {
  VectorXd v = VectorXd::Zero(lt.total());
  for (int r = 0; r < lt.m; ++r)
    for (int c = 0; c < lt.m; ++c) v(lt.idxP(r, c)) = op.P(r, c);
  for (int i = 0; i < lt.K; ++i) {
    for (int k = 0; k <= lt.deg_q; ++k)
      for (int r = 0; r < lt.m; ++r)
        for (int c = 0; c < lt.n; ++c)
          v(lt.idxQ(i, k, r, c)) = k <= op.Q[i].degree() ? op.Q[i][k](r, c) : 0;
    for (int k = 0; k <= lt.deg_s; ++k)
      for (int r = 0; r < lt.n; ++r)
        for (int c = 0; c < lt.n; ++c)
          v(lt.idxS(i, k, r, c)) = k <= op.S[i].degree() ? op.S[i][k](r, c) : 0;
    for (int j = 0; j < lt.K; ++j)
      for (int a = 0; a <= lt.deg_r; ++a)
        for (int b = 0; b <= lt.deg_r; ++b)
          for (int r = 0; r < lt.n; ++r)
            for (int c = 0; c < lt.n; ++c)
              v(lt.idxR(i, j, a, b, r, c)) =
                  (a <= op.R[i][j].degS() && b <= op.R[i][j].degT())
                      ? op.R[i][j].at(a, b)(r, c)
                      : 0;
  }
  return v;
}

PqrsOperator unflatten(const PqrsLayout& lt, const VectorXd& v) {
  check(v.size() == lt.total(), "unflatten: size mismatch");
  PqrsOperator op =
      PqrsOperator::zero(lt.m, lt.n, lt.tau, lt.deg_q, lt.deg_s, lt.deg_r);
  for (int r = 0; r < lt.m; ++r)
    for (int c = 0; c < lt.m; ++c) op.P(r, c) = v(lt.idxP(r, c));
  for (int i = 0; i < lt.K; ++i) {
    for (int k = 0; k <= lt.deg_q; ++k)
      for (int r = 0; r < lt.m; ++r)
        for (int c = 0; c < lt.n; ++c)
          op.Q[i][k](r, c) = v(lt.idxQ(i, k, r, c));
    for (int k = 0; k <= lt.deg_s; ++k)
      for (int r = 0; r < lt.n; ++r)
        for (int c = 0; c < lt.n; ++c)
          op.S[i][k](r, c) = v(lt.idxS(i, k, r, c));
    for (int j = 0; j < lt.K; ++j)
      for (int a = 0; a <= lt.deg_r; ++a)
        for (int b = 0; b <= lt.deg_r; ++b)
          for (int r = 0; r < lt.n; ++r)
            for (int c = 0; c < lt.n; ++c)
              op.R[i][j].at(a, b)(r, c) = v(lt.idxR(i, j, a, b, r, c));
  }
  return op;
}

std::vector<LinearConstraint> structural_constraints(const PqrsLayout& lt) {
  check(lt.m == lt.n, "structural_constraints: requires m == n");
  const double tauK = lt.tau.back();
  std::vector<LinearConstraint> rows;

  // S_i(s) symmetric, per coefficient.
  for (int i = 0; i < lt.K; ++i)
    for (int k = 0; k <= lt.deg_s; ++k)
      for (int r = 0; r < lt.n; ++r)
        for (int c = r + 1; c < lt.n; ++c)
          rows.push_back({{{lt.idxS(i, k, r, c), 1.0},
                           {lt.idxS(i, k, c, r), -1.0}}});

  // R_ij(s,t) = R_ji(t,s)^T: one row per unordered coefficient-slot pair.
  for (int i = 0; i < lt.K; ++i)
    for (int j = i; j < lt.K; ++j)
      for (int a = 0; a <= lt.deg_r; ++a)
        for (int b = 0; b <= lt.deg_r; ++b)
          for (int r = 0; r < lt.n; ++r)
            for (int c = 0; c < lt.n; ++c) {
              int lhs = lt.idxR(i, j, a, b, r, c);
              int rhs = lt.idxR(j, i, b, a, c, r);
              if (lhs < rhs) rows.push_back({{{lhs, 1.0}, {rhs, -1.0}}});
            }

  // P = tauK Q_i(0)^T + tauK S_i(0) for every i.
  for (int i = 0; i < lt.K; ++i)
    for (int r = 0; r < lt.n; ++r)
      for (int c = 0; c < lt.n; ++c)
        rows.push_back({{{lt.idxP(r, c), 1.0},
                         {lt.idxQ(i, 0, c, r), -tauK},
                         {lt.idxS(i, 0, r, c), -tauK}}});

  // Q_j(s) = R_ij(0,s) for every i, j; coefficients above either degree
  // bound are pinned to zero.
  for (int i = 0; i < lt.K; ++i)
    for (int j = 0; j < lt.K; ++j)
      for (int b = 0; b <= std::max(lt.deg_q, lt.deg_r); ++b)
        for (int r = 0; r < lt.n; ++r)
          for (int c = 0; c < lt.n; ++c) {
            LinearConstraint row;
            if (b <= lt.deg_q) row.terms.push_back({lt.idxQ(j, b, r, c), 1.0});
            if (b <= lt.deg_r)
              row.terms.push_back({lt.idxR(i, j, 0, b, r, c), -1.0});
            if (!row.terms.empty()) rows.push_back(std::move(row));
          }
  return rows;
}

PqrsOperator random_structured(const PqrsLayout& lt, std::mt19937& rng) {
  auto rows = structural_constraints(lt);
  MatrixXd A = MatrixXd::Zero(static_cast<int>(rows.size()), lt.total());
  for (size_t r = 0; r < rows.size(); ++r)
    for (auto [idx, w] : rows[r].terms) A(static_cast<int>(r), idx) += w;

  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXd v(lt.total());
  for (int k = 0; k < lt.total(); ++k) v(k) = gauss(rng);

  // Project onto the nullspace of the (redundant, homogeneous) constraints:
  // v <- v - pinv(A) A v.
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
  v -= cod.solve((A * v).eval());
  return unflatten(lt, v);
}

PqrsOperator l1_transform(const PqrsOperator& op) {
  const double tauK = op.tauMax();
  const int n = op.n, K = op.K, nK = n * K;
  int deg_q = 0, deg_s = 0, deg_r = 0;
  for (int i = 0; i < K; ++i) {
    deg_q = std::max(deg_q, op.Q[i].degree());
    deg_s = std::max(deg_s, op.S[i].degree());
    for (int j = 0; j < K; ++j)
      deg_r = std::max({deg_r, op.R[i][j].degS(), op.R[i][j].degT()});
  }
  PqrsOperator out = PqrsOperator::zero(op.m, nK, {tauK}, deg_q, deg_s, deg_r);
  out.P = op.P;
  for (int i = 0; i < K; ++i) {
    double ai = op.tau[i] / tauK;
    PolyMat1 Qi = rescale_argument(op.Q[i], ai);
    for (int k = 0; k <= Qi.degree(); ++k)
      out.Q[0][k].middleCols(i * n, n) = std::sqrt(ai) * Qi[k];
    PolyMat1 Si = rescale_argument(op.S[i], ai);
    for (int k = 0; k <= Si.degree(); ++k)
      out.S[0][k].block(i * n, i * n, n, n) = Si[k];
    for (int j = 0; j < K; ++j) {
      double aj = op.tau[j] / tauK;
      PolyMat2 Rij = rescale_argument(op.R[i][j], ai, aj);
      for (int a = 0; a <= Rij.degS(); ++a)
        for (int b = 0; b <= Rij.degT(); ++b)
          out.R[0][0].at(a, b).block(i * n, j * n, n, n) =
              std::sqrt(ai * aj) * Rij.at(a, b);
    }
  }
  return out;
}

SampledZ l1_transform_sample(const SampledZ& z) {
  const double tauK = z.tau.back();
  const int K = z.channels();
  const int n = static_cast<int>(z.phi[0].rows());
  const int N = static_cast<int>(z.phi[0].cols()) - 1;
  for (int i = 1; i < K; ++i)
    check(z.phi[i].cols() == N + 1, "l1_transform_sample: node counts differ");

  SampledZ out;
  out.x = z.x;
  out.tau = {tauK};
  MatrixXd stacked(n * K, N + 1);
  // Node k of the [-tauK,0] grid maps to node k of channel i's own grid
  // under s -> a_i s, so the rescaled sample is exact.
  for (int i = 0; i < K; ++i) {
    double ai = z.tau[i] / tauK;
    stacked.middleRows(i * n, n) = std::sqrt(ai) * z.phi[i];
  }
  out.phi.push_back(stacked);
  return out;
}

}  // namespace delsyn
