#pragma once

#include <vector>

#include "finitenet/types.hpp"

namespace finitenet {

/// Linear accuracy conditions A c = b on a stencil coefficient vector,
/// together with the precomputed affine map of the minimal-perturbation
/// projection onto the feasible set:
///
///   project(c_hat) = c_hat + A^T (A A^T)^{-1} (b - A c_hat)
///                  = projector * c_hat + particular.
///
/// The map is fixed once the constraint is built, so it can sit behind a
/// network output as a constant linear layer.
struct OrderConstraint {
  int derivative_order = 0;  // 0 for face-value interpolation
  int accuracy_order = 0;
  Mat A;
  Vec b;
  Mat projector;    // I - A^T (A A^T)^{-1} A, symmetric
  Vec particular;   // A^T (A A^T)^{-1} b
};

/// Taylor moment conditions for a finite-difference stencil approximating
/// the d-th derivative to accuracy order n: rows m = 0..d+n-1 of
/// sum_k c_k k^m / m! = delta_{m,d}. Rejects d + n > width.
OrderConstraint build_constraint_system(int derivative_order,
                                        int accuracy_order,
                                        const std::vector<int>& offsets);

/// Cell-average-to-face conditions for FV face reconstruction: the
/// coefficients reproduce the point value at offset +1/2 exactly for
/// polynomials up to degree n-1.
OrderConstraint build_face_constraint_system(int accuracy_order,
                                             const std::vector<int>& offsets);

/// Minimum-2-norm correction of c_hat onto {c : A c = b}.
Vec project_coefficients(const Vec& c_hat, const OrderConstraint& oc);

}  // namespace finitenet
