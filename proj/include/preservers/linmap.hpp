#ifndef PRESERVERS_LINMAP_HPP
#define PRESERVERS_LINMAP_HPP

#include <vector>

#include "preservers/matcore.hpp"

namespace preservers {

// Linear map M_{m,n} -> M_{r,s}, stored as the ordered list of basis
// images Phi(E_ij), row-major in (i,j).
struct LinMap {
  int m = 0, n = 0, r = 0, s = 0;
  Field field = Field::Real;
  std::vector<Mat> images;

  // Image of E_ij (zero-based indices).
  const Mat& image(int i, int j) const { return images[i * n + j]; }
};

LinMap from_images(int m, int n, int r, int s, Field field,
                   std::vector<Mat> images);

Mat apply(const LinMap& phi, const Mat& A);

// X -> Uleft * Phi(X) * Vright, image-wise. Factors are checked to be
// unitary within 1e-8.
LinMap conjugate(const LinMap& phi, const Mat& Uleft, const Mat& Vright);

bool maps_equal(const LinMap& phi, const LinMap& psi, const Tolerances& tol);

LinMap identity_map(int m, int n, Field field);
LinMap transpose_map(int m, int n, Field field);

}  // namespace preservers

#endif
