#include "reachdesign/constraints.hpp"

#include <cmath>
#include <sstream>

#include "reachdesign/json_io.hpp"

namespace reachdesign {

namespace {

double norm_scale(double f) { return std::max(std::abs(f), 1e-12); }

}  // namespace

Vec ConstraintMargins::flattened_norm() const {
  const Eigen::Index total =
      safety_norm.size() + input_norm.size() + invariance_norm.size();
  Vec out(total);
  Eigen::Index at = 0;
  for (Eigen::Index k = 0; k < safety_norm.rows(); ++k) {
    for (Eigen::Index i = 0; i < safety_norm.cols(); ++i) {
      out(at++) = safety_norm(k, i);
    }
  }
  for (Eigen::Index k = 0; k < input_norm.rows(); ++k) {
    for (Eigen::Index i = 0; i < input_norm.cols(); ++i) {
      out(at++) = input_norm(k, i);
    }
  }
  for (Eigen::Index i = 0; i < invariance_norm.size(); ++i) {
    out(at++) = invariance_norm(i);
  }
  return out;
}

ConstraintMargins evaluate(const ReachResult& result, const ReachSpec& spec,
                           const Box& design_bounds, const Vec& p,
                           double tolerance) {
  if (p.size() != design_bounds.dim()) {
    throw std::invalid_argument("evaluate: design vector dimension mismatch");
  }
  if (result.rho_x.rows() != spec.N ||
      result.rho_x.cols() != spec.X_safe.num_rows()) {
    throw std::invalid_argument("evaluate: result does not match spec");
  }

  ConstraintMargins m;
  m.tolerance = tolerance;

  m.safety.resize(spec.N, spec.X_safe.num_rows());
  m.safety_norm.resizeLike(m.safety);
  for (Eigen::Index k = 0; k < spec.N; ++k) {
    for (Eigen::Index i = 0; i < spec.X_safe.num_rows(); ++i) {
      m.safety(k, i) = spec.X_safe.offsets()(i) - result.rho_x(k, i);
      m.safety_norm(k, i) = m.safety(k, i) / norm_scale(spec.X_safe.offsets()(i));
    }
  }

  m.input.resize(spec.N, spec.U_adm.num_rows());
  m.input_norm.resizeLike(m.input);
  for (Eigen::Index k = 0; k < spec.N; ++k) {
    for (Eigen::Index i = 0; i < spec.U_adm.num_rows(); ++i) {
      m.input(k, i) = spec.U_adm.offsets()(i) - result.rho_u(k, i);
      m.input_norm(k, i) = m.input(k, i) / norm_scale(spec.U_adm.offsets()(i));
    }
  }

  m.invariance.resize(spec.R0_poly.num_rows());
  m.invariance_norm.resizeLike(m.invariance);
  for (Eigen::Index i = 0; i < spec.R0_poly.num_rows(); ++i) {
    m.invariance(i) = spec.R0_poly.offsets()(i) - result.rho_r(i);
    m.invariance_norm(i) =
        m.invariance(i) / norm_scale(spec.R0_poly.offsets()(i));
  }

  const Eigen::Index np = p.size();
  m.realizability.resize(2 * np);
  m.realizability_norm.resizeLike(m.realizability);
  for (Eigen::Index i = 0; i < np; ++i) {
    const double span =
        std::max(design_bounds.upper(i) - design_bounds.lower(i), 1e-12);
    m.realizability(i) = p(i) - design_bounds.lower(i);
    m.realizability(np + i) = design_bounds.upper(i) - p(i);
    m.realizability_norm(i) = m.realizability(i) / span;
    m.realizability_norm(np + i) = m.realizability(np + i) / span;
  }

  // Locate the most violated constraint (by normalized margin).
  m.min_margin = std::numeric_limits<double>::infinity();
  m.min_margin_norm = std::numeric_limits<double>::infinity();
  m.worst = "none";
  const auto consider = [&](double raw, double norm, std::string id) {
    m.min_margin = std::min(m.min_margin, raw);
    if (norm < m.min_margin_norm) {
      m.min_margin_norm = norm;
      m.worst = std::move(id);
    }
  };
  for (Eigen::Index k = 0; k < m.safety.rows(); ++k) {
    for (Eigen::Index i = 0; i < m.safety.cols(); ++i) {
      std::ostringstream id;
      id << "safety[k=" << (k + 1) << ",row=" << i << "]";
      consider(m.safety(k, i), m.safety_norm(k, i), id.str());
    }
  }
  for (Eigen::Index k = 0; k < m.input.rows(); ++k) {
    for (Eigen::Index i = 0; i < m.input.cols(); ++i) {
      std::ostringstream id;
      id << "input[k=" << k << ",row=" << i << "]";
      consider(m.input(k, i), m.input_norm(k, i), id.str());
    }
  }
  for (Eigen::Index i = 0; i < m.invariance.size(); ++i) {
    std::ostringstream id;
    id << "invariance[row=" << i << "]";
    consider(m.invariance(i), m.invariance_norm(i), id.str());
  }
  for (Eigen::Index i = 0; i < m.realizability.size(); ++i) {
    std::ostringstream id;
    id << "realizability[" << i << "]";
    consider(m.realizability(i), m.realizability_norm(i), id.str());
  }

  m.feasible = m.min_margin >= -tolerance;
  return m;
}

namespace {

nlohmann::json certificate_payload(const ReachResult& result,
                                   const ReachSpec& spec,
                                   const DiscreteClosedLoop& model,
                                   const ConstraintMargins& margins,
                                   const Vec& p) {
  nlohmann::json doc;
  doc["format"] = "reachdesign-certificate";
  doc["version"] = 1;
  doc["claim"] =
      "union of R(0..N-1) is robustly positive invariant; the closed-loop "
      "system stays in the safe set for all time";
  doc["tolerance"] = margins.tolerance;
  doc["design"] = to_json(p);
  doc["model"] = {{"Ad", to_json(model.Ad)},
                  {"Ed", to_json(model.Ed)},
                  {"K", to_json(model.K)},
                  {"dt", model.dt}};
  doc["spec"] = {
      {"R0", {{"lower", to_json(spec.R0.lower)}, {"upper", to_json(spec.R0.upper)}}},
      {"V", {{"lower", to_json(spec.V.lower)}, {"upper", to_json(spec.V.upper)}}},
      {"N", spec.N},
      {"X_safe", {{"H", to_json(spec.X_safe.normals())}, {"f", to_json(spec.X_safe.offsets())}}},
      {"U_adm",
       {{"dim", spec.U_adm.dim()},
        {"H", to_json(spec.U_adm.normals())},
        {"f", to_json(spec.U_adm.offsets())}}}};
  doc["supports"] = {{"rho_lx", to_json(result.rho_lx)},
                     {"rho_x", to_json(result.rho_x)},
                     {"rho_u", to_json(result.rho_u)},
                     {"rho_r", to_json(result.rho_r)}};
  doc["min_margin"] = margins.min_margin;
  return doc;
}

std::string integrity_stamp(const nlohmann::json& payload) {
  std::ostringstream hex;
  hex << std::hex << fnv1a64(payload.dump());
  return hex.str();
}

}  // namespace

nlohmann::json certificate(const ReachResult& result, const ReachSpec& spec,
                           const DiscreteClosedLoop& model,
                           const ConstraintMargins& margins, const Vec& p) {
  if (!margins.feasible) {
    throw std::logic_error(
        "certificate: refusing to certify an infeasible candidate (worst: " +
        margins.worst + ")");
  }
  nlohmann::json doc = certificate_payload(result, spec, model, margins, p);
  doc["integrity"] = integrity_stamp(doc);
  return doc;
}

CertificateCheck verify_certificate(const nlohmann::json& doc) {
  CertificateCheck check;
  try {
    if (doc.at("format") != "reachdesign-certificate" ||
        doc.at("version") != 1) {
      check.reason = "unknown certificate format or version";
      return check;
    }
    nlohmann::json payload = doc;
    payload.erase("integrity");
    if (integrity_stamp(payload) != doc.at("integrity").get<std::string>()) {
      check.reason = "integrity stamp mismatch";
      return check;
    }

    const auto& sj = doc.at("spec");
    Box r0(vec_from_json(sj.at("R0").at("lower"), "R0.lower"),
           vec_from_json(sj.at("R0").at("upper"), "R0.upper"));
    Box v(vec_from_json(sj.at("V").at("lower"), "V.lower"),
          vec_from_json(sj.at("V").at("upper"), "V.upper"));
    const auto& uj = sj.at("U_adm");
    HPolytope u_adm(uj.at("dim").get<Eigen::Index>(),
                    uj.at("H").empty() ? Mat(0, uj.at("dim").get<Eigen::Index>())
                                       : mat_from_json(uj.at("H"), "U_adm.H"),
                    vec_from_json(uj.at("f"), "U_adm.f"));
    ReachSpec spec(std::move(r0), std::move(v), sj.at("N").get<int>(),
                   HPolytope(mat_from_json(sj.at("X_safe").at("H"), "X_safe.H"),
                             vec_from_json(sj.at("X_safe").at("f"), "X_safe.f")),
                   std::move(u_adm));

    const auto& mj = doc.at("model");
    DiscreteClosedLoop model;
    model.Ad = mat_from_json(mj.at("Ad"), "Ad");
    model.Ed = mat_from_json(mj.at("Ed"), "Ed");
    model.K = mj.at("K").empty() ? Mat(0, model.Ad.rows())
                                 : mat_from_json(mj.at("K"), "K");
    model.dt = mj.at("dt").get<double>();

    ReachOptions opts;
    opts.store_tubes = false;
    const ReachResult fresh =
        reach(spec, model, Mat::Identity(model.Ad.rows(), model.Ad.rows()),
              opts);

    const auto& stored = doc.at("supports");
    const auto diff = [&](const Mat& a, const nlohmann::json& b,
                          const char* what) {
      const Mat bm = b.empty() ? Mat(a.rows(), 0) : mat_from_json(b, what);
      if (a.rows() != bm.rows() || a.cols() != bm.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
      }
      return a.size() ? (a - bm).cwiseAbs().maxCoeff() : 0.0;
    };
    double worst = diff(fresh.rho_lx, stored.at("rho_lx"), "rho_lx");
    worst = std::max(worst, diff(fresh.rho_x, stored.at("rho_x"), "rho_x"));
    worst = std::max(worst, diff(fresh.rho_u, stored.at("rho_u"), "rho_u"));
    worst = std::max(
        worst, (fresh.rho_r - vec_from_json(stored.at("rho_r"), "rho_r"))
                   .cwiseAbs()
                   .maxCoeff());
    check.max_support_discrepancy = worst;
    if (worst > 1e-9) {
      check.reason = "recomputed supports disagree with stored values";
      return check;
    }

    // Re-check the containment conditions from the stored supports.
    const double tol = doc.at("tolerance").get<double>();
    for (Eigen::Index k = 0; k < fresh.rho_x.rows(); ++k) {
      for (Eigen::Index i = 0; i < fresh.rho_x.cols(); ++i) {
        if (fresh.rho_x(k, i) > spec.X_safe.offsets()(i) + tol) {
          check.reason = "safety condition does not hold";
          return check;
        }
      }
    }
    for (Eigen::Index k = 0; k < fresh.rho_u.rows(); ++k) {
      for (Eigen::Index i = 0; i < fresh.rho_u.cols(); ++i) {
        if (fresh.rho_u(k, i) > spec.U_adm.offsets()(i) + tol) {
          check.reason = "input condition does not hold";
          return check;
        }
      }
    }
    for (Eigen::Index i = 0; i < fresh.rho_r.size(); ++i) {
      if (fresh.rho_r(i) > spec.R0_poly.offsets()(i) + tol) {
        check.reason = "invariance condition does not hold";
        return check;
      }
    }
    check.ok = true;
  } catch (const std::exception& e) {
    check.ok = false;
    check.reason = std::string("malformed certificate: ") + e.what();
  }
  return check;
}

}  // namespace reachdesign
