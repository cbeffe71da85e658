#pragma once

#include "delsyn/operators.hpp"

// LMI representation of operator positivity on R^m x L2^n[-tauK,0]:
// a PSD matrix M = [M11 M12 M13; * M22 M23; * * M33] induces
//   P      = M11 (1/tauK) int g
//   Q(s)   = (1/tauK) ( g(s) M12 Y1(s) + int g(h) M13 Y2(h,s) dh )
//   S(s)   = (1/tauK) g(s) Y1(s)^T M22 Y1(s)
//   R(s,t) = g(s) Y1(s)^T M23 Y2(s,t) + g(t) Y2(t,s)^T M32 Y1(t)
//            + int g(h) Y2(h,s)^T M33 Y2(h,t) dh
// with Y1 = Z_d(s) (x) I_n, Y2 = Z_d(h,s) (x) I_n, and the cone sums the
// g = 1 and g = -s(s+tauK) contributions of two PSD matrices.

namespace delsyn {

// Y1 is m1 x n with m1 = n(d+1); Y2 is m2 x n with m2 = n(d+1)^2.
struct PositivityBasis {
  int d = 0, n = 0;
  double tauK = 1.0;
  PolyMat1 Y1;
  PolyMat2 Y2;
};
PositivityBasis build_basis(int d, int n, double tauK);

struct PositivityCertificate {
  int d = 0, m = 0, n = 0;
  double tauK = 1.0;
  MatrixXd M1;  // multiplier g = 1
  MatrixXd M2;  // multiplier g = -s(s+tauK)
  int blockSize() const { return m + n * (d + 1) + n * (d + 1) * (d + 1); }
};

// Single-channel tuple induced by the certificate, assembled with exact
// polynomial algebra from the formulas above.
PqrsOperator certificate_to_pqrs(const PositivityCertificate& cert);

// The same map in sparse coefficient form: for every coefficient slot of
// the induced tuple (indexed by tuple_layout), the list of (row, col,
// weight) entries of one M matrix whose weighted sum gives that slot.
struct CoeffMap {
  struct Entry {
    int row, col;
    double w;
  };
  std::vector<std::vector<Entry>> slots;
};

// Coefficient layout shared by both multipliers: deg Q <= d+2,
// deg S <= 2d+2, deg R <= 2d+2 per variable.
PqrsLayout cone_tuple_layout(int d, int m, int n, double tauK);
CoeffMap build_coeff_map(int d, int m, int n, double tauK, int which_g);

// Cone membership data for "tuple in Xi_{d,m,n}": two PSD blocks of equal
// size and the exact monomial-matching maps. The matching equalities are
// tuple_slot = map1(M1) + map2(M2) for every slot of tuple_layout.
struct ConeMembership {
  int d = 0, m = 0, n = 0;
  double tauK = 1.0;
  int psd_size = 0;  // per M block
  PqrsLayout tuple_layout;
  CoeffMap map1, map2;
};
ConeMembership cone_membership(int d, int m, int n, double tauK);

// Apply a CoeffMap to a numeric M.
VectorXd apply_coeff_map(const CoeffMap& map, const MatrixXd& M);

}  // namespace delsyn
