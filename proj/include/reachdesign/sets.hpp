// Convex set representations (zonotopes, H-rep polytopes, boxes) and the
// support-function machinery built on them. All types are immutable values;
// every operation is pure.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace reachdesign {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Absolute tolerance used by comparisons unless a caller overrides.
inline constexpr double kDefaultTol = 1e-9;

class HPolytope;
class DirectionSet;

// {c + sum_i xi_i * g_i : xi_i in [-1,1]}; generators are the columns of G.
// An empty generator matrix (n x 0) represents the singleton {c}.
class Zonotope {
 public:
  Zonotope(Vec center, Mat generators);
  static Zonotope singleton(Vec center);

  const Vec& center() const { return center_; }
  const Mat& generators() const { return generators_; }
  Eigen::Index dim() const { return center_.size(); }
  Eigen::Index num_generators() const { return generators_.cols(); }

  // rho(l) = l'c + sum_i |l'g_i|; exact max of l'z over the set.
  double support(const Vec& l) const;

 private:
  Vec center_;
  Mat generators_;
};

// {x : Hx <= f}. A polytope with zero rows is the whole space (ambient
// dimension kept explicitly so empty constraint sets stay well-typed).
class HPolytope {
 public:
  HPolytope() : HPolytope(1, Mat(0, 1), Vec(0)) {}  // whole real line
  HPolytope(Mat normals, Vec offsets);
  HPolytope(Eigen::Index dim, Mat normals, Vec offsets);

  const Mat& normals() const { return normals_; }
  const Vec& offsets() const { return offsets_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index num_rows() const { return normals_.rows(); }

  bool contains(const Vec& x, double tol = kDefaultTol) const;

 private:
  void validate() const;

  Eigen::Index dim_;
  Mat normals_;
  Vec offsets_;
};

// Axis-aligned box [lower, upper]; converts losslessly to both other forms.
struct Box {
  Vec lower;
  Vec upper;

  Box() : Box(Vec::Zero(1), Vec::Zero(1)) {}  // degenerate placeholder
  Box(Vec lo, Vec hi);

  Eigen::Index dim() const { return lower.size(); }
  Vec center() const { return 0.5 * (lower + upper); }
  Vec half_widths() const { return 0.5 * (upper - lower); }
  bool contains(const Vec& x, double tol = kDefaultTol) const;

  Zonotope to_zonotope() const;    // center + axis-aligned generators
  HPolytope to_hpolytope() const;  // rows (+e_i, upper_i), (-e_i, -lower_i)
};

// Ordered, nonempty list of unit directions, stored as rows.
class DirectionSet {
 public:
  explicit DirectionSet(Mat directions);

  // L_h = {e_1..e_n, -e_1..-e_n}
  static DirectionSet cardinal(Eigen::Index n);

  const Mat& rows() const { return rows_; }
  Eigen::Index count() const { return rows_.rows(); }
  Eigen::Index dim() const { return rows_.cols(); }

 private:
  Mat rows_;
};

struct ContainmentReport {
  bool contained = false;
  Vec margins;  // f_i - rho_Z(h_i), reported even when not contained
};

Zonotope linear_map(const Mat& m, const Zonotope& z);
Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);
Zonotope translate(const Zonotope& z, const Vec& t);

// Rows are (l_i, rho_Z(l_i)); the result contains Z and every face touches it.
HPolytope template_polyhedron(const Zonotope& z, const DirectionSet& dirs);

ContainmentReport contained_in(const Zonotope& z, const HPolytope& x,
                               double tol = kDefaultTol);

// Over-approximates Z with at most max_generators generators by box-merging
// the smallest ones (never shrinks the set). Requires max_generators >= dim.
Zonotope reduce_order(const Zonotope& z, Eigen::Index max_generators);

}  // namespace reachdesign
