#include "delsyn/positivity.hpp"

namespace delsyn {

namespace {

PolyMat1 multiplier_g(int which_g, double tauK) {
  if (which_g == 1) return PolyMat1::constant(MatrixXd::Ones(1, 1), tauK);
  PolyMat1 g(1, 1, 2, tauK);  // -s(s + tauK)
  g[1](0, 0) = -tauK;
  g[2](0, 0) = -1.0;
  return g;
}

// int_{-tau}^0 g(h) h^a dh
double g_moment(const PolyMat1& g, int a) {
  PolyMat1 mono(1, 1, a, g.tau());
  mono[a](0, 0) = 1.0;
  return definite_integral(mul(g, mono))(0, 0);
}

// Scalar polynomial times polynomial matrix.
PolyMat1 mul_scalar(const PolyMat1& g, const PolyMat1& a) {
  PolyMat1 out(a.rows(), a.cols(), a.degree() + g.degree(), a.tau());
  for (int k = 0; k <= g.degree(); ++k)
    for (int j = 0; j <= a.degree(); ++j) out[k + j] += g[k](0, 0) * a[j];
  return out;
}

// Product of a scalar polynomial in the first variable with a PolyMat2.
PolyMat2 mul_scalar_s(const PolyMat1& g, const PolyMat2& a) {
  PolyMat2 out(a.rows(), a.cols(), a.degS() + g.degree(), a.degT(), a.tauS(),
               a.tauT());
  for (int k = 0; k <= g.degree(); ++k)
    for (int p = 0; p <= a.degS(); ++p)
      for (int q = 0; q <= a.degT(); ++q)
        out.at(p + k, q) += g[k](0, 0) * a.at(p, q);
  return out;
}

// Product PolyMat1(s) * PolyMat2(s,t).
PolyMat2 mul_1_2(const PolyMat1& a, const PolyMat2& b) {
  PolyMat2 out(a.rows(), b.cols(), a.degree() + b.degS(), b.degT(), b.tauS(),
               b.tauT());
  for (int k = 0; k <= a.degree(); ++k)
    for (int p = 0; p <= b.degS(); ++p)
      for (int q = 0; q <= b.degT(); ++q)
        out.at(p + k, q) += a[k] * b.at(p, q);
  return out;
}

}  // namespace

PositivityBasis build_basis(int d, int n, double tauK) {
  PositivityBasis b;
  b.d = d;
  b.n = n;
  b.tauK = tauK;
  const int m1 = n * (d + 1), m2 = n * (d + 1) * (d + 1);
  b.Y1 = PolyMat1(m1, n, d, tauK);
  for (int k = 0; k <= d; ++k)
    b.Y1[k].middleRows(k * n, n) = MatrixXd::Identity(n, n);
  b.Y2 = PolyMat2(m2, n, d, d, tauK, tauK);
  for (int a = 0; a <= d; ++a)
    for (int c = 0; c <= d; ++c)
      b.Y2.at(a, c).middleRows((a * (d + 1) + c) * n, n) =
          MatrixXd::Identity(n, n);
  return b;
}

PqrsLayout cone_tuple_layout(int d, int m, int n, double tauK) {
  PqrsLayout lt;
  lt.m = m;
  lt.n = n;
  lt.K = 1;
  lt.deg_q = d + 2;
  lt.deg_s = 2 * d + 2;
  lt.deg_r = 2 * d + 2;
  lt.tau = {tauK};
  return lt;
}

PqrsOperator certificate_to_pqrs(const PositivityCertificate& cert) {
  const int d = cert.d, m = cert.m, n = cert.n;
  const double tauK = cert.tauK;
  auto basis = build_basis(d, n, tauK);
  const int m1 = n * (d + 1), m2 = n * (d + 1) * (d + 1);
  auto lt = cone_tuple_layout(d, m, n, tauK);
  PqrsOperator out =
      PqrsOperator::zero(m, n, {tauK}, lt.deg_q, lt.deg_s, lt.deg_r);

  for (int which = 1; which <= 2; ++which) {
    const MatrixXd& M = which == 1 ? cert.M1 : cert.M2;
    if (M.size() == 0) continue;
    PolyMat1 g = multiplier_g(which, tauK);
    MatrixXd M11 = M.topLeftCorner(m, m);
    MatrixXd M12 = M.block(0, m, m, m1);
    MatrixXd M13 = M.block(0, m + m1, m, m2);
    MatrixXd M22 = M.block(m, m, m1, m1);
    MatrixXd M23 = M.block(m, m + m1, m1, m2);
    MatrixXd M33 = M.block(m + m1, m + m1, m2, m2);

    out.P += M11 * (g_moment(g, 0) / tauK);

    // Q: g(s) M12 Y1(s) + int g(h) M13 Y2(h,s) dh, over tauK.
    PolyMat1 q1 = mul_scalar(g, mul(PolyMat1::constant(M12, tauK), basis.Y1));
    PolyMat2 q2 = mul_scalar_s(
        g, mul_1_2(PolyMat1::constant(M13, tauK), basis.Y2));
    PolyMat1 q = add(q1, partial_integral(q2, Var::s));
    out.Q[0] = add(out.Q[0], scale(q, 1.0 / tauK).padded(lt.deg_q));

    // S: g(s) Y1^T M22 Y1 / tauK.
    PolyMat1 s = mul_scalar(
        g, mul(transpose(basis.Y1),
               mul(PolyMat1::constant(M22, tauK), basis.Y1)));
    out.S[0] = add(out.S[0], scale(s, 1.0 / tauK).padded(lt.deg_s));

    // R term 1: g(s) Y1(s)^T M23 Y2(s,t); term 2 is its (s,t)-swap
    // transpose since M32 = M23^T; term 3: int g(h) Y2(h,s)^T M33 Y2(h,t).
    PolyMat1 gy1t = mul_scalar(g, transpose(basis.Y1));  // n x m1
    PolyMat2 t1(n, n, gy1t.degree() + basis.Y2.degS(), basis.Y2.degT(), tauK,
                tauK);
    for (int k = 0; k <= gy1t.degree(); ++k)
      for (int a = 0; a <= basis.Y2.degS(); ++a)
        for (int b = 0; b <= basis.Y2.degT(); ++b)
          t1.at(k + a, b) += gy1t[k] * M23 * basis.Y2.at(a, b);
    PolyMat2 rsum = add(t1, transpose_swap(t1));

    PolyMat2 t3(n, n, d, d, tauK, tauK);
    for (int a = 0; a <= d; ++a)
      for (int a2 = 0; a2 <= d; ++a2) {
        double w = g_moment(g, a + a2);
        for (int b = 0; b <= d; ++b)
          for (int b2 = 0; b2 <= d; ++b2)
            t3.at(b, b2) += w * basis.Y2.at(a, b).transpose() * M33 *
                            basis.Y2.at(a2, b2);
      }
    rsum = add(rsum, t3);
    out.R[0][0] = add(out.R[0][0].padded(lt.deg_r, lt.deg_r),
                      rsum.padded(lt.deg_r, lt.deg_r));
  }
  return out;
}

CoeffMap build_coeff_map(int d, int m, int n, double tauK, int which_g) {
  auto lt = cone_tuple_layout(d, m, n, tauK);
  PolyMat1 g = multiplier_g(which_g, tauK);
  const int nb = d + 1;  // basis blocks per variable
  const int m1 = n * nb;
  auto rowY1 = [&](int k, int r) { return m + k * n + r; };
  auto rowY2 = [&](int a, int b, int r) {
    return m + m1 + (a * nb + b) * n + r;
  };
  std::vector<double> gm(4 * d + 4, 0.0);
  for (int a = 0; a < static_cast<int>(gm.size()); ++a)
    gm[a] = g_moment(g, a);

  CoeffMap map;
  map.slots.resize(lt.total());
  auto put = [&](int slot, int row, int col, double w) {
    if (w != 0.0) map.slots[slot].push_back({row, col, w});
  };

  // P = (gm0 / tauK) M11.
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      put(lt.idxP(r, c), r, c, gm[0] / tauK);

  // Q coefficient of s^t: sum_{j+k=t} g_j M12[., k-block] / tauK
  //                      + sum_{a} gm[a] M13[., (a,t)-block] / tauK.
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      for (int j = 0; j <= g.degree(); ++j)
        for (int k = 0; k <= d; ++k)
          put(lt.idxQ(0, j + k, r, c), r, rowY1(k, c), g[j](0, 0) / tauK);
      for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= d; ++b)
          put(lt.idxQ(0, b, r, c), r, rowY2(a, b, c), gm[a] / tauK);
    }

  // S coefficient of s^t: sum_{j+k+k2=t} g_j M22[k-block, k2-block] / tauK.
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int j = 0; j <= g.degree(); ++j)
        for (int k = 0; k <= d; ++k)
          for (int k2 = 0; k2 <= d; ++k2)
            put(lt.idxS(0, j + k + k2, r, c), rowY1(k, r), rowY1(k2, c),
                g[j](0, 0) / tauK);

  // R term 1 coefficient of s^{j+k+a} t^b: g_j M23[k-block, (a,b)-block];
  // term 2 is the swap-transpose; term 3: gm[a+a2] M33 pairing.
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      for (int j = 0; j <= g.degree(); ++j)
        for (int k = 0; k <= d; ++k)
          for (int a = 0; a <= d; ++a)
            for (int b = 0; b <= d; ++b) {
              double w = g[j](0, 0);
              put(lt.idxR(0, 0, j + k + a, b, r, c), rowY1(k, r),
                  rowY2(a, b, c), w);
              // swapped term: R(s,t) += t1(t,s)^T
              put(lt.idxR(0, 0, b, j + k + a, r, c), rowY1(k, c),
                  rowY2(a, b, r), w);
            }
      for (int a = 0; a <= d; ++a)
        for (int a2 = 0; a2 <= d; ++a2)
          for (int b = 0; b <= d; ++b)
            for (int b2 = 0; b2 <= d; ++b2)
              put(lt.idxR(0, 0, b, b2, r, c), rowY2(a, b, r),
                  rowY2(a2, b2, c), gm[a + a2]);
    }
  return map;
}

ConeMembership cone_membership(int d, int m, int n, double tauK) {
  ConeMembership cm;
  cm.d = d;
  cm.m = m;
  cm.n = n;
  cm.tauK = tauK;
  cm.psd_size = m + n * (d + 1) + n * (d + 1) * (d + 1);
  cm.tuple_layout = cone_tuple_layout(d, m, n, tauK);
  cm.map1 = build_coeff_map(d, m, n, tauK, 1);
  cm.map2 = build_coeff_map(d, m, n, tauK, 2);
  return cm;
}

VectorXd apply_coeff_map(const CoeffMap& map, const MatrixXd& M) {
  VectorXd out = VectorXd::Zero(static_cast<int>(map.slots.size()));
  for (size_t s = 0; s < map.slots.size(); ++s)
    for (const auto& e : map.slots[s]) out(static_cast<int>(s)) += e.w * M(e.row, e.col);
  return out;
}

}  // namespace delsyn
