#include "reachdesign/constraints.hpp"

#include <doctest.h>

#include "oracles.hpp"
#include "reachdesign/benchmarks.hpp"

using namespace reachdesign;

namespace {

// Frozen dynamics with R0 strictly inside the safe set and K = 0.
struct FrozenCase {
  ReachSpec spec;
  SystemFamily family;

  FrozenCase()
      : spec(Box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)),
             Box((Vec(1) << 0.0).finished(), (Vec(1) << 0.0).finished()), 3,
             Box(Vec::Constant(2, -5.0), Vec::Constant(2, 5.0)).to_hpolytope(),
             HPolytope((Mat(2, 1) << 1, -1).finished(), Vec::Ones(2))) {
    family.bounds = Box(Vec::Zero(1), Vec::Ones(1));
    family.build = [](const Vec&) {
      DiscreteClosedLoop model;
      model.Ad = Mat::Identity(2, 2);
      model.Ed = Mat::Zero(2, 1);
      model.K = Mat::Zero(1, 2);
      model.dt = 1.0;
      return model;
    };
  }
};

}  // namespace

TEST_CASE("frozen case is feasible with exact-return invariance margins") {
  FrozenCase fc;
  const Vec p = Vec::Constant(1, 0.5);
  const ReachResult res = reach(fc.spec, fc.family, p);
  const ConstraintMargins m = evaluate(res, fc.spec, fc.family.bounds, p);
  CHECK(m.feasible);
  CHECK(m.invariance.cwiseAbs().maxCoeff() == 0.0);  // R(N) = R0 exactly
  CHECK(m.safety.minCoeff() == doctest::Approx(4.0));
  CHECK(m.input.minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("margins are exactly bound minus support") {
  FrozenCase fc;
  const Vec p = Vec::Constant(1, 0.5);
  const ReachResult res = reach(fc.spec, fc.family, p);
  const ConstraintMargins m = evaluate(res, fc.spec, fc.family.bounds, p);
  for (Eigen::Index k = 0; k < m.safety.rows(); ++k) {
    for (Eigen::Index i = 0; i < m.safety.cols(); ++i) {
      CHECK(m.safety(k, i) ==
            fc.spec.X_safe.offsets()(i) - res.rho_x(k, i));
    }
  }
  for (Eigen::Index i = 0; i < m.invariance.size(); ++i) {
    CHECK(m.invariance(i) == fc.spec.R0_poly.offsets()(i) - res.rho_r(i));
  }
}

TEST_CASE("out-of-bounds design flags realizability regardless of reach") {
  FrozenCase fc;
  const Vec p = Vec::Constant(1, 1.5);  // above the upper bound
  const ReachResult res = reach(fc.spec, fc.family, p);
  const ConstraintMargins m = evaluate(res, fc.spec, fc.family.bounds, p);
  CHECK_FALSE(m.feasible);
  CHECK(m.realizability.minCoeff() == doctest::Approx(-0.5));
  CHECK(m.worst.substr(0, 13) == "realizability");
}

TEST_CASE("over-approximated supports only shrink margins") {
  std::mt19937_64 rng(47);
  DiscreteClosedLoop model;
  model.Ad = Mat::NullaryExpr(3, 3, [&] { return oracles::uniform(rng, -0.5, 0.5); });
  model.Ed = Mat::NullaryExpr(3, 2, [&] { return oracles::uniform(rng, -0.2, 0.2); });
  model.K = Mat::Zero(1, 3);
  model.dt = 1.0;
  ReachSpec spec(Box(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)),
                 Box(Vec::Constant(2, -0.2), Vec::Constant(2, 0.2)), 8,
                 Box(Vec::Constant(3, -9.0), Vec::Constant(3, 9.0))
                     .to_hpolytope(),
                 HPolytope((Mat(2, 1) << 1, -1).finished(), Vec::Ones(2)));
  SystemFamily family;
  family.bounds = Box(Vec::Zero(1), Vec::Ones(1));
  family.build = [model](const Vec&) { return model; };
  const Vec p = Vec::Constant(1, 0.5);

  const ReachResult exact = reach(spec, model, Mat::Identity(3, 3));
  ReachOptions opts;
  opts.max_generators = 5;
  const ReachResult coarse = reach(spec, model, Mat::Identity(3, 3), opts);
  const ConstraintMargins me = evaluate(exact, spec, family.bounds, p);
  const ConstraintMargins mc = evaluate(coarse, spec, family.bounds, p);
  CHECK(((me.safety - mc.safety).array() >= -1e-12).all());
  CHECK(((me.invariance - mc.invariance).array() >= -1e-12).all());
}

TEST_CASE("certificate round trip, simulation soundness and tampering") {
  FrozenCase fc;
  const Vec p = Vec::Constant(1, 0.5);
  const DiscreteClosedLoop model = fc.family.build(p);
  const ReachResult res = reach(fc.spec, fc.family, p);
  const ConstraintMargins m = evaluate(res, fc.spec, fc.family.bounds, p);

  const nlohmann::json cert = certificate(res, fc.spec, model, m, p);
  const CertificateCheck check = verify_certificate(cert);
  CHECK(check.ok);
  CHECK(check.max_support_discrepancy == 0.0);

  // Serialization round trip preserves verifiability.
  const nlohmann::json reparsed = nlohmann::json::parse(cert.dump());
  CHECK(verify_certificate(reparsed).ok);

  // Any edited support must fail re-verification.
  nlohmann::json tampered = cert;
  tampered["supports"]["rho_r"][0] =
      tampered["supports"]["rho_r"][0].get<double>() + 1e-3;
  CHECK_FALSE(verify_certificate(tampered).ok);

  // Certified candidates stay inside the safe set under long simulations.
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec x = fc.spec.R0.lower +
            oracles::random_vec(rng, 2, 0, 1).cwiseProduct(
                fc.spec.R0.upper - fc.spec.R0.lower);
    for (int k = 0; k < 5 * fc.spec.N; ++k) {
      x = model.Ad * x;
      CHECK(fc.spec.X_safe.contains(x));
    }
  }
}

TEST_CASE("certificate round trip for a system without a control channel") {
  DiscreteClosedLoop model;
  model.Ad = 0.5 * Mat::Identity(2, 2);
  model.Ed = Mat::Zero(2, 1);
  model.K = Mat(0, 2);
  model.dt = 1.0;
  ReachSpec spec(Box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)),
                 Box(Vec::Zero(1), Vec::Zero(1)), 3,
                 Box(Vec::Constant(2, -5.0), Vec::Constant(2, 5.0))
                     .to_hpolytope(),
                 HPolytope(1, Mat(0, 1), Vec(0)));
  const Box bounds(Vec::Zero(1), Vec::Ones(1));
  const Vec p = Vec::Constant(1, 0.5);
  const ReachResult res = reach(spec, model, Mat::Identity(2, 2));
  CHECK(res.rho_u.size() == 0);
  const ConstraintMargins m = evaluate(res, spec, bounds, p);
  CHECK(m.feasible);
  const nlohmann::json cert = certificate(res, spec, model, m, p);
  CHECK(verify_certificate(nlohmann::json::parse(cert.dump())).ok);
}

TEST_CASE("certificate refuses infeasible candidates") {
  FrozenCase fc;
  const Vec p = Vec::Constant(1, 2.0);  // realizability violated
  const DiscreteClosedLoop model = fc.family.build(p);
  const ReachResult res = reach(fc.spec, fc.family, p);
  const ConstraintMargins m = evaluate(res, fc.spec, fc.family.bounds, p);
  CHECK_FALSE(m.feasible);
  CHECK_THROWS_AS(certificate(res, fc.spec, model, m, p), std::logic_error);
}
