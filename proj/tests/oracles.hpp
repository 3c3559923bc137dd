// Test-only oracles, independent of the library's support-function path:
// explicit vertex enumeration, RK4 integration, and seeded random inputs.
#pragma once

#include <random>

#include "reachdesign/sets.hpp"

namespace oracles {

using reachdesign::Mat;
using reachdesign::Vec;
using reachdesign::Zonotope;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double lo,
                      double hi) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

inline Zonotope random_zonotope(std::mt19937_64& rng, Eigen::Index n,
                                Eigen::Index g, double scale = 1.0) {
  return Zonotope(random_vec(rng, n, -scale, scale),
                  [&] {
                    Mat m(n, g);
                    for (Eigen::Index j = 0; j < g; ++j) {
                      m.col(j) = random_vec(rng, n, -scale, scale);
                    }
                    return m;
                  }());
}

// All 2^g sign-combination vertices (g <= ~20 expected).
inline std::vector<Vec> vertices(const Zonotope& z) {
  const Eigen::Index g = z.num_generators();
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(1) << g);
  for (long mask = 0; mask < (1L << g); ++mask) {
    Vec v = z.center();
    for (Eigen::Index j = 0; j < g; ++j) {
      v += ((mask >> j) & 1) ? z.generators().col(j)
                             : Vec(-z.generators().col(j));
    }
    out.push_back(v);
  }
  return out;
}

// max l'v over the sign-combination vertices; brute-force support value.
inline double brute_force_support(const Zonotope& z, const Vec& l) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& v : vertices(z)) best = std::max(best, l.dot(v));
  return best;
}

// Uniform sample from the zonotope's parameter cube.
inline Vec sample_point(const Zonotope& z, std::mt19937_64& rng) {
  Vec x = z.center();
  for (Eigen::Index j = 0; j < z.num_generators(); ++j) {
    x += uniform(rng, -1.0, 1.0) * z.generators().col(j);
  }
  return x;
}

// Classic fixed-step RK4 for xdot = A x + B u + E v with u, v held constant.
inline Vec rk4(const Mat& a, const Mat& b, const Mat& e, Vec x, const Vec& u,
               const Vec& v, double t_end, double h) {
  const auto f = [&](const Vec& state) -> Vec {
    Vec dx = a * state;
    if (b.cols() > 0) dx += b * u;
    if (e.cols() > 0) dx += e * v;
    return dx;
  };
  double t = 0.0;
  while (t < t_end - 1e-15) {
    const double step = std::min(h, t_end - t);
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * step * k1);
    const Vec k3 = f(x + 0.5 * step * k2);
    const Vec k4 = f(x + step * k3);
    x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += step;
  }
  return x;
}

}  // namespace oracles
