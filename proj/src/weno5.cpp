#include "finitenet/weno5.hpp"

namespace finitenet {

Weno5Eval weno5_from_window(const std::array<double, 5>& w, double eps) {
  const double um2 = w[0], um1 = w[1], u0 = w[2], up1 = w[3], up2 = w[4];

  // Candidate three-cell reconstructions of the face value.
  const double v0 = (2.0 * um2 - 7.0 * um1 + 11.0 * u0) / 6.0;
  const double v1 = (-um1 + 5.0 * u0 + 2.0 * up1) / 6.0;
  const double v2 = (2.0 * u0 + 5.0 * up1 - up2) / 6.0;

  const double b0 = (13.0 / 12.0) * (um2 - 2.0 * um1 + u0) * (um2 - 2.0 * um1 + u0) +
                    0.25 * (um2 - 4.0 * um1 + 3.0 * u0) * (um2 - 4.0 * um1 + 3.0 * u0);
  const double b1 = (13.0 / 12.0) * (um1 - 2.0 * u0 + up1) * (um1 - 2.0 * u0 + up1) +
                    0.25 * (um1 - up1) * (um1 - up1);
  const double b2 = (13.0 / 12.0) * (u0 - 2.0 * up1 + up2) * (u0 - 2.0 * up1 + up2) +
                    0.25 * (3.0 * u0 - 4.0 * up1 + up2) * (3.0 * u0 - 4.0 * up1 + up2);

  const double a0 = 0.1 / ((eps + b0) * (eps + b0));
  const double a1 = 0.6 / ((eps + b1) * (eps + b1));
  const double a2 = 0.3 / ((eps + b2) * (eps + b2));
  const double inv_sum = 1.0 / (a0 + a1 + a2);

  Weno5Eval out;
  out.weights = {a0 * inv_sum, a1 * inv_sum, a2 * inv_sum};
  out.value = out.weights[0] * v0 + out.weights[1] * v1 + out.weights[2] * v2;
  return out;
}

Vec weno5_face_values(const Vec& ubar, FaceBias bias, double eps) {
  const int n = static_cast<int>(ubar.size());
  Vec faces(n);
  std::array<double, 5> w;
  for (int i = 0; i < n; ++i) {
    if (bias == FaceBias::Left) {
      for (int k = 0; k < 5; ++k) w[k] = ubar[wrap_index(i - 2 + k, n)];
    } else {
      // Mirror image: window of cell i+1 traversed right-to-left puts the
      // target face between window cells 2 and 3 again.
      for (int k = 0; k < 5; ++k) w[k] = ubar[wrap_index(i + 3 - k, n)];
    }
    faces[i] = weno5_from_window(w, eps).value;
  }
  return faces;
}

}  // namespace finitenet
