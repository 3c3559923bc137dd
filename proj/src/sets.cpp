#include "reachdesign/sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reachdesign {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Zonotope::Zonotope(Vec center, Mat generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (generators_.size() == 0 && generators_.rows() != center_.size()) {
    generators_.resize(center_.size(), 0);
  }
  require(generators_.rows() == center_.size(),
          "zonotope: generator dimension must match center");
  require(center_.allFinite() && generators_.allFinite(),
          "zonotope: entries must be finite");
  require(center_.size() > 0, "zonotope: dimension must be positive");
}

Zonotope Zonotope::singleton(Vec center) {
  Mat none(center.size(), 0);
  return Zonotope(std::move(center), std::move(none));
}

double Zonotope::support(const Vec& l) const {
  require(l.size() == dim(), "support: direction dimension mismatch");
  double rho = l.dot(center_);
  for (Eigen::Index i = 0; i < generators_.cols(); ++i) {
    rho += std::abs(l.dot(generators_.col(i)));
  }
  return rho;
}

HPolytope::HPolytope(Mat normals, Vec offsets)
    : dim_(normals.cols()),  // read before the move below
      normals_(std::move(normals)),
      offsets_(std::move(offsets)) {
  validate();
}

HPolytope::HPolytope(Eigen::Index dim, Mat normals, Vec offsets)
    : dim_(dim), normals_(std::move(normals)), offsets_(std::move(offsets)) {
  if (normals_.size() == 0 && normals_.rows() == 0) normals_.resize(0, dim_);
  validate();
}

void HPolytope::validate() const {
  require(dim_ > 0, "polytope: dimension must be positive");
  require(normals_.cols() == dim_, "polytope: normal dimension mismatch");
  require(normals_.rows() == offsets_.size(),
          "polytope: row count must match offset count");
  require(normals_.allFinite() && offsets_.allFinite(),
          "polytope: entries must be finite");
  for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
    require(normals_.row(i).norm() > 0.0, "polytope: rows must be nonzero");
  }
}

bool HPolytope::contains(const Vec& x, double tol) const {
  require(x.size() == dim_, "contains: point dimension mismatch");
  for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
    if (normals_.row(i).dot(x) > offsets_(i) + tol) return false;
  }
  return true;
}

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  require(lower.size() == upper.size(), "box: bound dimension mismatch");
  require(lower.size() > 0, "box: dimension must be positive");
  require(lower.allFinite() && upper.allFinite(), "box: bounds must be finite");
  require((lower.array() <= upper.array()).all(),
          "box: lower must not exceed upper");
}

bool Box::contains(const Vec& x, double tol) const {
  require(x.size() == dim(), "box contains: dimension mismatch");
  return (x.array() >= lower.array() - tol).all() &&
         (x.array() <= upper.array() + tol).all();
}

Zonotope Box::to_zonotope() const {
  Mat gens = half_widths().asDiagonal();
  return Zonotope(center(), gens);
}

HPolytope Box::to_hpolytope() const {
  const Eigen::Index n = dim();
  Mat h(2 * n, n);
  Vec f(2 * n);
  h.topRows(n) = Mat::Identity(n, n);
  h.bottomRows(n) = -Mat::Identity(n, n);
  f.head(n) = upper;
  f.tail(n) = -lower;
  return HPolytope(std::move(h), std::move(f));
}

DirectionSet::DirectionSet(Mat directions) : rows_(std::move(directions)) {
  require(rows_.rows() > 0, "direction set: must be nonempty");
  require(rows_.allFinite(), "direction set: entries must be finite");
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    const double norm = rows_.row(i).norm();
    require(norm > 0.0, "direction set: zero direction rejected");
    rows_.row(i) /= norm;
  }
}

DirectionSet DirectionSet::cardinal(Eigen::Index n) {
  Mat dirs(2 * n, n);
  dirs.topRows(n) = Mat::Identity(n, n);
  dirs.bottomRows(n) = -Mat::Identity(n, n);
  return DirectionSet(std::move(dirs));
}

Zonotope linear_map(const Mat& m, const Zonotope& z) {
  if (m.cols() != z.dim()) {
    throw std::invalid_argument("linear_map: matrix/zonotope dimension mismatch");
  }
  return Zonotope(m * z.center(), m * z.generators());
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("minkowski_sum: dimension mismatch");
  }
  Mat gens(a.dim(), a.num_generators() + b.num_generators());
  gens << a.generators(), b.generators();
  return Zonotope(a.center() + b.center(), std::move(gens));
}

Zonotope translate(const Zonotope& z, const Vec& t) {
  return minkowski_sum(z, Zonotope::singleton(t));
}

HPolytope template_polyhedron(const Zonotope& z, const DirectionSet& dirs) {
  if (dirs.dim() != z.dim()) {
    throw std::invalid_argument("template_polyhedron: dimension mismatch");
  }
  Vec offsets(dirs.count());
  for (Eigen::Index i = 0; i < dirs.count(); ++i) {
    offsets(i) = z.support(dirs.rows().row(i).transpose());
  }
  return HPolytope(dirs.rows(), std::move(offsets));
}

ContainmentReport contained_in(const Zonotope& z, const HPolytope& x,
                               double tol) {
  if (x.dim() != z.dim()) {
    throw std::invalid_argument("contained_in: dimension mismatch");
  }
  ContainmentReport report;
  report.margins.resize(x.num_rows());
  report.contained = true;
  for (Eigen::Index i = 0; i < x.num_rows(); ++i) {
    report.margins(i) =
        x.offsets()(i) - z.support(x.normals().row(i).transpose());
    if (report.margins(i) < -tol) report.contained = false;
  }
  return report;
}

Zonotope reduce_order(const Zonotope& z, Eigen::Index max_generators) {
  const Eigen::Index n = z.dim();
  if (max_generators < n) {
    throw std::invalid_argument("reduce_order: budget below dimension");
  }
  const Eigen::Index g = z.num_generators();
  if (g <= max_generators) return z;

  // Merge the (g - max_generators + n) generators that are closest to
  // axis-aligned (small ||.||_1 - ||.||_inf) into an axis-aligned box.
  const Eigen::Index keep = max_generators - n;
  std::vector<Eigen::Index> order(static_cast<size_t>(g));
  std::iota(order.begin(), order.end(), 0);
  Vec score(g);
  for (Eigen::Index i = 0; i < g; ++i) {
    score(i) = z.generators().col(i).lpNorm<1>() -
               z.generators().col(i).lpNorm<Eigen::Infinity>();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return score(a) < score(b);
                   });

  Mat kept(n, keep);
  Vec box = Vec::Zero(n);
  for (Eigen::Index idx = 0; idx < g; ++idx) {
    const Eigen::Index col = order[static_cast<size_t>(idx)];
    if (idx >= g - keep) {
      kept.col(idx - (g - keep)) = z.generators().col(col);
    } else {
      box += z.generators().col(col).cwiseAbs();
    }
  }
  Mat gens(n, keep + n);
  gens << kept, Mat(box.asDiagonal());
  return Zonotope(z.center(), std::move(gens));
}

}  // namespace reachdesign
