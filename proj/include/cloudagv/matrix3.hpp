#pragma once

#include <array>
#include <cmath>

namespace cloudagv {

/// Row-major 3x3 real matrix.
using Matrix3 = std::array<std::array<double, 3>, 3>;

[[nodiscard]] constexpr Matrix3 identity3() noexcept {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

[[nodiscard]] constexpr Matrix3 diag3(double a, double b, double c) noexcept {
  return {{{a, 0.0, 0.0}, {0.0, b, 0.0}, {0.0, 0.0, c}}};
}

[[nodiscard]] constexpr double trace(const Matrix3& m) noexcept {
  return m[0][0] + m[1][1] + m[2][2];
}

[[nodiscard]] constexpr double determinant(const Matrix3& m) noexcept {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Sum of the three principal 2x2 minors.
[[nodiscard]] constexpr double principal_minor_sum(const Matrix3& m) noexcept {
  return (m[0][0] * m[1][1] - m[0][1] * m[1][0]) + (m[0][0] * m[2][2] - m[0][2] * m[2][0]) +
         (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
}

[[nodiscard]] constexpr Matrix3 multiply(const Matrix3& a, const Matrix3& b) noexcept {
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

[[nodiscard]] constexpr Matrix3 transpose(const Matrix3& m) noexcept {
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m[j][i];
  return out;
}

[[nodiscard]] inline double max_abs_entry(const Matrix3& m) noexcept {
  double s = 0.0;
  for (const auto& row : m)
    for (double v : row) s = std::fmax(s, std::abs(v));
  return s;
}

}  // namespace cloudagv
