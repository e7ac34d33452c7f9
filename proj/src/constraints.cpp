#include "finitenet/constraints.hpp"

#include <cmath>
#include <stdexcept>

#include "finitenet/stencils.hpp"

namespace finitenet {

namespace {

OrderConstraint finish(int d, int n, Mat A, Vec b) {
  OrderConstraint oc;
  oc.derivative_order = d;
  oc.accuracy_order = n;
  oc.A = std::move(A);
  oc.b = std::move(b);

  const Mat gram = oc.A * oc.A.transpose();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("order constraint: A A^T not positive definite");
  }
  const Mat pinv_rows = llt.solve(oc.A);  // (A A^T)^{-1} A
  const int width = static_cast<int>(oc.A.cols());
  oc.projector = Mat::Identity(width, width) - oc.A.transpose() * pinv_rows;
  oc.particular = oc.A.transpose() * llt.solve(oc.b);
  return oc;
}

}  // namespace

OrderConstraint build_constraint_system(int derivative_order,
                                        int accuracy_order,
                                        const std::vector<int>& offsets) {
  const int width = static_cast<int>(offsets.size());
  if (derivative_order < 1 || accuracy_order < 1) {
    throw std::invalid_argument("constraint orders must be >= 1");
  }
  const int rows = derivative_order + accuracy_order;
  if (rows > width) {
    throw std::invalid_argument(
        "constraint system infeasible: d + n exceeds stencil width");
  }
  Mat A(rows, width);
  Vec b = Vec::Zero(rows);
  for (int m = 0; m < rows; ++m) {
    for (int k = 0; k < width; ++k) A(m, k) = point_moment(offsets[k], m);
  }
  b[derivative_order] = 1.0;
  return finish(derivative_order, accuracy_order, std::move(A), std::move(b));
}

OrderConstraint build_face_constraint_system(int accuracy_order,
                                             const std::vector<int>& offsets) {
  const int width = static_cast<int>(offsets.size());
  if (accuracy_order < 1 || accuracy_order > width) {
    throw std::invalid_argument("face constraint: need 1 <= n <= width");
  }
  Mat A(accuracy_order, width);
  Vec b(accuracy_order);
  for (int m = 0; m < accuracy_order; ++m) {
    for (int k = 0; k < width; ++k) A(m, k) = cell_average_moment(offsets[k], m);
    b[m] = point_moment(1, m) * std::pow(0.5, m);
  }
  return finish(0, accuracy_order, std::move(A), std::move(b));
}

Vec project_coefficients(const Vec& c_hat, const OrderConstraint& oc) {
  if (c_hat.size() != oc.projector.cols()) {
    throw std::invalid_argument("project_coefficients: width mismatch");
  }
  return oc.projector * c_hat + oc.particular;
}

}  // namespace finitenet
