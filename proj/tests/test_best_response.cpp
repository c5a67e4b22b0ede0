#include <cmath>
#include <utility>

#include <doctest.h>

#include "advsvm/best_response.hpp"
#include "advsvm/errors.hpp"
#include "advsvm/game_eval.hpp"
#include "test_support.hpp"

using namespace advsvm;

namespace {

// One-parameter family used throughout the adversary's derivations: a rank-one
// correction along the classifier plus noise pushed against it.
AdversaryPolicy rank_one_adversary(const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& d, double m,
                                   double s) {
  const double n2 = alpha.squaredNorm();
  AdversaryPolicy p;
  p.a_matrix = Eigen::MatrixXd::Identity(alpha.size(), alpha.size()) -
               alpha * d.transpose() / n2;
  p.w_mean = m * alpha / n2;
  p.w_cov = SymMatrix(s * alpha * alpha.transpose() / (n2 * n2));
  return p;
}

}  // namespace

TEST_CASE("classifier best response against the identity adversary") {
  const GaussianClassModel m = synthetic_example();
  const AdversaryPolicy id = identity_adversary(2);
  const ClassifierResponse r = classifier_best_response(m, id, 0.01);

  CHECK(r.raw.status == conic::Status::optimal);
  CHECK((r.policy.weights - testing::kBaselineAlpha).cwiseAbs().maxCoeff() <=
        2e-4);
  CHECK(r.policy.bias == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(true_negative_prob(m, r.policy) ==
        doctest::Approx(0.9900000).epsilon(1e-4));
  CHECK(r.achieved_tp == doctest::Approx(0.9993250).epsilon(1e-3));
  CHECK(r.achieved_tp == true_positive_prob(m, id, r.policy));

  const double predicted = 0.5 + 0.5 * advsvm::erf(r.raw.objective);
  CHECK(std::abs(predicted - r.achieved_tp) <= 1e-6);
}

TEST_CASE("classifier best response output is normalized") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierResponse r =
      classifier_best_response(m, identity_adversary(2), 0.05);
  const double scale =
      std::max(r.policy.weights.cwiseAbs().maxCoeff(), std::abs(r.policy.bias));
  CHECK(scale == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classifier best response beats a grid over normalized classifiers") {
  const GaussianClassModel m = synthetic_example();
  const AdversaryPolicy id = identity_adversary(2);
  const double delta = 0.01;
  const ClassifierResponse r = classifier_best_response(m, id, delta);

  double best = 0.0;
  const double step = 0.05;
  ClassifierPolicy probe;
  probe.weights.resize(2);
  for (double a0 = -1.0; a0 <= 1.0 + 1e-12; a0 += step) {
    for (double a1 = -1.0; a1 <= 1.0 + 1e-12; a1 += step) {
      for (double b = -1.0; b <= 1.0 + 1e-12; b += step) {
        if (std::abs(a0) + std::abs(a1) + std::abs(b) < 1e-9) continue;
        probe.weights << a0, a1;
        probe.bias = b;
        if (true_negative_prob(m, probe) < 1.0 - delta) continue;
        best = std::max(best, true_positive_prob(m, id, probe));
      }
    }
  }
  CHECK(r.achieved_tp >= best - 1e-3);
}

TEST_CASE("classifier best response rejects bad inputs") {
  const GaussianClassModel m = synthetic_example();
  CHECK_THROWS_AS(classifier_best_response(m, identity_adversary(3), 0.01),
                  ConstructionError);
  CHECK_THROWS_AS(classifier_best_response(m, identity_adversary(2), 0.0),
                  ConstructionError);
  CHECK_THROWS_AS(classifier_best_response(m, identity_adversary(2), 0.5),
                  ConstructionError);
}

TEST_CASE("classifier best response degenerates when positives are erased") {
  const GaussianClassModel m = synthetic_example();
  AdversaryPolicy adv = identity_adversary(2);
  adv.a_matrix.setZero();
  adv.w_mean = m.mu_neg;
  CHECK_THROWS_AS(classifier_best_response(m, adv, 0.01),
                  DegeneratePolicyError);
}

TEST_CASE("manipulation cost of the rank one family has a scalar closed form") {
  const GaussianClassModel m = testing::random_model(3);
  const Eigen::MatrixXd big =
      m.sigma_pos.mat() + m.mu_pos * m.mu_pos.transpose();
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd alpha = testing::random_vector(3);
    const Eigen::VectorXd d = testing::random_vector(3);
    const double mm = testing::random_vector(1)[0];
    const double s = std::abs(testing::random_vector(1)[0]);
    const AdversaryPolicy p = rank_one_adversary(alpha, d, mm, s);
    const double expect =
        (d.dot(big * d) + mm * mm + s) / alpha.squaredNorm();
    CHECK(manipulation_cost(m, p) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("reduced oracle spends the whole budget") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  for (double eps : {0.5, 2.0, 5.0}) {
    auto [policy, fn] = reduced_adversary_oracle(m, clf, eps);
    CHECK(manipulation_cost(m, policy) == doctest::Approx(eps).epsilon(1e-9));
    CHECK(fn == false_negative_prob(m, policy, clf));
    CHECK(fn >= false_negative_prob(m, identity_adversary(2), clf));
  }
}

TEST_CASE("reduced oracle at zero budget is the identity") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  auto [policy, fn] = reduced_adversary_oracle(m, clf, 0.0);
  CHECK(policy.a_matrix == Eigen::MatrixXd::Identity(2, 2));
  CHECK(policy.w_mean == Eigen::Vector2d::Zero());
  CHECK(fn == false_negative_prob(m, identity_adversary(2), clf));
}

TEST_CASE("oracle resolution does not move the synthetic answer") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  const double f50 = reduced_adversary_oracle(m, clf, 2.0, 50).second;
  const double f200 = reduced_adversary_oracle(m, clf, 2.0, 200).second;
  const double f800 = reduced_adversary_oracle(m, clf, 2.0, 800).second;
  CHECK(std::abs(f50 - f200) <= 1e-6);
  CHECK(std::abs(f800 - f200) <= 1e-6);
}

TEST_CASE("adversary best response on the reference game") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  const AdversaryResponse r = adversary_best_response(m, clf, 2.0);

  CHECK(r.achieved_fn >= 0.33);
  CHECK(r.achieved_fn <= 0.36);
  CHECK(manipulation_cost(m, r.policy) <= 2.0 * (1.0 + 1e-6));
  CHECK(r.achieved_fn == false_negative_prob(m, r.policy, clf));

  const double oracle_fn = reduced_adversary_oracle(m, clf, 2.0).second;
  CHECK(r.achieved_fn >= oracle_fn - 1e-3);
  CHECK(!r.winner.empty());
}

TEST_CASE("adversary best response in the sign flipping regime") {
  GaussianClassModel m;
  m.mu_pos = Eigen::Vector2d(0.5, 0.1);
  m.sigma_pos = SymMatrix(0.5 * Eigen::MatrixXd::Identity(2, 2));
  m.mu_neg = Eigen::Vector2d::Zero();
  m.sigma_neg =
      SymMatrix(Eigen::Vector2d(0.2, 1.0).asDiagonal().toDenseMatrix());
  const ClassifierPolicy clf{Eigen::Vector2d(1.0, 0.2), -0.05};

  const double oracle_fn = reduced_adversary_oracle(m, clf, 3.0).second;
  CHECK(oracle_fn == doctest::Approx(1.0).epsilon(1e-6));

  const AdversaryResponse r = adversary_best_response(m, clf, 3.0);
  CHECK(r.achieved_fn >= oracle_fn - 1e-3);
  CHECK(manipulation_cost(m, r.policy) <= 3.0 * (1.0 + 1e-6));
}

TEST_CASE("adversary best response with a zero budget is the identity") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  const AdversaryResponse r = adversary_best_response(m, clf, 0.0);
  CHECK((r.policy.a_matrix - Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() <= 1e-4);
  CHECK(r.policy.w_mean.cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(r.policy.w_cov.mat().cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(std::abs(r.achieved_fn -
                 false_negative_prob(m, identity_adversary(2), clf)) <= 1e-4);
}

TEST_CASE("adversary best response dominates the reduced oracle on random games") {
  for (int trial = 0; trial < 12; ++trial) {
    const GaussianClassModel m = testing::random_model(2);
    const Eigen::VectorXd raw_alpha = testing::random_vector(2);
    if (raw_alpha.cwiseAbs().maxCoeff() < 1e-6) continue;
    const ClassifierPolicy clf =
        normalize_classifier(raw_alpha, testing::random_vector(1)[0]);
    const double eps = 0.5 + std::abs(testing::random_vector(1)[0]);

    const double oracle_fn = reduced_adversary_oracle(m, clf, eps).second;
    const AdversaryResponse r = adversary_best_response(m, clf, eps);
    CHECK(r.achieved_fn >= oracle_fn - 1e-3);
    CHECK(manipulation_cost(m, r.policy) <= eps * (1.0 + 1e-6));
    CHECK(min_eigenvalue(r.policy.w_cov) >= -1e-9);
  }
}

TEST_CASE("adversary relaxation raw output satisfies the budget row") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  const AdversaryResponse r = adversary_best_response(m, clf, 2.0);
  if (r.raw.status == conic::Status::optimal ||
      r.raw.status == conic::Status::inaccurate) {
    CHECK(r.raw.z_prime.trace() <= 2.0 * r.raw.t + 1e-5);
    CHECK(r.raw.t >= -1e-9);
  }
}

TEST_CASE("adversary best response rejects bad inputs") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  CHECK_THROWS_AS(adversary_best_response(m, clf, -1.0), ConstructionError);
  CHECK_THROWS_AS(
      adversary_best_response(m, ClassifierPolicy{Eigen::Vector2d::Zero(), 0.5},
                              2.0),
      DegeneratePolicyError);
  CHECK_THROWS_AS(
      adversary_best_response(m, ClassifierPolicy{Eigen::Vector3d::Ones(), 0.0},
                              2.0),
      ConstructionError);
}

TEST_CASE("plain bias objective still yields a feasible response") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  const AdversaryResponse r = adversary_best_response(
      m, clf, 2.0, 1e-8, AdversaryObjective::plain_bias);
  CHECK(manipulation_cost(m, r.policy) <= 2.0 * (1.0 + 1e-6));
  const double oracle_fn = reduced_adversary_oracle(m, clf, 2.0).second;
  CHECK(r.achieved_fn >= oracle_fn - 1e-3);
}
