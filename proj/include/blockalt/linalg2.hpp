#pragma once

#include <cmath>
#include <stdexcept>

// Just enough 2-vector / 2x2 arithmetic for the thermal control demo.

namespace blockalt {

struct Vec2 {
  double a = 0.0;
  double b = 0.0;

  Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
  Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
  Vec2 operator*(double s) const { return {a * s, b * s}; }
  double dot(const Vec2& o) const { return a * o.a + b * o.b; }
  double norm() const { return std::sqrt(a * a + b * b); }
};

struct Mat2 {
  double m11 = 0.0, m12 = 0.0;
  double m21 = 0.0, m22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

  Vec2 operator*(const Vec2& v) const {
    return {m11 * v.a + m12 * v.b, m21 * v.a + m22 * v.b};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
            m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
  }
  Mat2 operator+(const Mat2& o) const {
    return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22};
  }
  Mat2 operator*(double s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
  Mat2 transposed() const { return {m11, m21, m12, m22}; }
  double det() const { return m11 * m22 - m12 * m21; }
  double max_abs() const {
    return std::max(std::max(std::fabs(m11), std::fabs(m12)),
                    std::max(std::fabs(m21), std::fabs(m22)));
  }

  // Quadratic form v' M v.
  double quad(const Vec2& v) const {
    return v.a * (m11 * v.a + m12 * v.b) + v.b * (m21 * v.a + m22 * v.b);
  }

  // Symmetric positive definiteness via Cholesky (strict, no tolerance).
  bool cholesky_pd() const {
    if (m11 <= 0.0) return false;
    double l11 = std::sqrt(m11);
    double l21 = m21 / l11;
    double rest = m22 - l21 * l21;
    return rest > 0.0;
  }

  // Spectral radius of a real 2x2 (complex pair handled via the determinant).
  double spectral_radius() const {
    double tr = m11 + m22;
    double disc = tr * tr - 4.0 * det();
    if (disc >= 0.0) {
      double root = std::sqrt(disc);
      return std::max(std::fabs(0.5 * (tr + root)), std::fabs(0.5 * (tr - root)));
    }
    return std::sqrt(det());
  }
};

// Solve [a11 a12; a21 a22] [x; y] = [r1; r2].
inline Vec2 solve2x2(double a11, double a12, double a21, double a22, double r1,
                     double r2) {
  double det = a11 * a22 - a12 * a21;
  if (std::fabs(det) < 1e-300) throw std::runtime_error("singular 2x2 system");
  return {(r1 * a22 - r2 * a12) / det, (a11 * r2 - a21 * r1) / det};
}

}  // namespace blockalt
