#pragma once

#include <algorithm>
#include <cmath>

#include "eqlab/common.hpp"
#include "eqlab/rng.hpp"

namespace eqlab {

inline constexpr double kSimplexTol = 1e-12;

inline bool is_simplex(const Vector& p, double tol = 1e-9) {
  if (p.size() == 0) return false;
  if ((p.array() < -tol).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

inline Vector uniform_simplex(Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

// softmax(z) with max-subtraction; stable for large accumulated logits.
inline Vector softmax(const Vector& z) {
  const double m = z.maxCoeff();
  Vector e = (z.array() - m).exp();
  return e / e.sum();
}

// Lowest index attaining the minimum.
inline Index argmin(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

inline Index argmax(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline Vector one_hot(Index n, Index i) {
  Vector v = Vector::Zero(n);
  v[i] = 1.0;
  return v;
}

// x log x with the 0 log 0 := 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Negative entropy sum_i p_i log p_i; convex on the simplex, minimized at uniform.
inline double negentropy(const Vector& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) s += xlogx(p[i]);
  return s;
}

// Euclidean projection onto the probability simplex (sort-based).
inline Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (Index i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i) + 1;
      theta = t;
    }
  }
  (void)rho;
  return (v.array() - theta).max(0.0);
}

// Uniform sample from the simplex (exponential spacings).
inline Vector random_simplex(Index n, Rng& rng) {
  Vector v(n);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    double u = 0.0;
    while (u <= 0.0) u = rng.uniform();
    v[i] = -std::log(u);
    sum += v[i];
  }
  return v / sum;
}

// Sample an index from a probability vector.
inline int sample_index(const Vector& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

}  // namespace eqlab
