#include <cmath>

#include <doctest.h>

#include "advsvm/errors.hpp"
#include "advsvm/game_eval.hpp"
#include "test_support.hpp"

using namespace advsvm;

TEST_CASE("closed form rates at the reference classifier") {
  const GaussianClassModel m = synthetic_example();
  const AdversaryPolicy id = identity_adversary(2);
  const ClassifierPolicy clf = testing::baseline_classifier();

  CHECK(true_negative_prob(m, clf) == doctest::Approx(0.9900000).epsilon(1e-6));
  CHECK(true_positive_prob(m, id, clf) ==
        doctest::Approx(0.9993250).epsilon(1e-6));
  CHECK(false_negative_prob(m, id, clf) ==
        doctest::Approx(1.0 - 0.9993250).epsilon(1e-4));
}

TEST_CASE("rates agree with a direct erf evaluation") {
  const GaussianClassModel m = testing::random_model(3);
  const ClassifierPolicy clf{testing::random_vector(3), 0.3};
  AdversaryPolicy adv;
  adv.a_matrix = testing::random_matrix(3, 3);
  adv.w_mean = testing::random_vector(3);
  adv.w_cov = testing::random_spd(3);

  const Eigen::VectorXd a = clf.weights;
  const double mean_pos =
      -a.dot(adv.a_matrix * m.mu_pos + adv.w_mean) - clf.bias;
  const double var_pos =
      a.dot((adv.a_matrix * m.sigma_pos.mat() * adv.a_matrix.transpose() +
             adv.w_cov.mat()) *
            a);
  const double expect_tp = 0.5 - 0.5 * advsvm::erf(mean_pos / std::sqrt(2.0 * var_pos));
  CHECK(true_positive_prob(m, adv, clf) ==
        doctest::Approx(expect_tp).epsilon(1e-12));

  const double mean_neg = -a.dot(m.mu_neg) - clf.bias;
  const double var_neg = a.dot(m.sigma_neg.mat() * a);
  const double expect_tn = 0.5 + 0.5 * advsvm::erf(mean_neg / std::sqrt(2.0 * var_neg));
  CHECK(true_negative_prob(m, clf) ==
        doctest::Approx(expect_tn).epsilon(1e-12));
}

TEST_CASE("degenerate variance falls back to the sign convention") {
  GaussianClassModel m = synthetic_example();
  AdversaryPolicy adv;
  adv.a_matrix = Eigen::MatrixXd::Zero(2, 2);
  adv.w_cov = SymMatrix::zero(2);
  ClassifierPolicy clf{Eigen::Vector2d(1.0, 0.0), 0.0};

  adv.w_mean = Eigen::Vector2d(2.0, 0.0);
  CHECK(true_positive_prob(m, adv, clf) == 1.0);
  adv.w_mean = Eigen::Vector2d(-2.0, 0.0);
  CHECK(true_positive_prob(m, adv, clf) == 0.0);
  adv.w_mean = Eigen::Vector2d::Zero();
  CHECK(true_positive_prob(m, adv, clf) == 0.5);
}

TEST_CASE("true positive and false negative are complementary") {
  for (int trial = 0; trial < 1000; ++trial) {
    const GaussianClassModel m = testing::random_model(2);
    AdversaryPolicy adv;
    adv.a_matrix = testing::random_matrix(2, 2);
    adv.w_mean = testing::random_vector(2);
    adv.w_cov = testing::random_spd(2);
    const ClassifierPolicy clf{testing::random_vector(2),
                               testing::random_vector(1)[0]};
    const double tp = true_positive_prob(m, adv, clf);
    const double fn = false_negative_prob(m, adv, clf);
    CHECK(std::abs(tp + fn - 1.0) <= 1e-12);
  }
}

TEST_CASE("manipulation cost closed form") {
  const GaussianClassModel m = synthetic_example();
  CHECK(manipulation_cost(m, identity_adversary(2)) == 0.0);

  AdversaryPolicy wipe;
  wipe.a_matrix = Eigen::MatrixXd::Zero(2, 2);
  wipe.w_mean = Eigen::Vector2d::Zero();
  wipe.w_cov = SymMatrix::zero(2);
  CHECK(manipulation_cost(m, wipe) == doctest::Approx(19.2).epsilon(1e-12));

  AdversaryPolicy shift = identity_adversary(2);
  shift.w_mean = Eigen::Vector2d(3.0, 4.0);
  CHECK(manipulation_cost(m, shift) == doctest::Approx(25.0).epsilon(1e-12));

  AdversaryPolicy noisy = identity_adversary(2);
  noisy.w_cov = SymMatrix(Eigen::Vector2d(0.5, 1.5).asDiagonal().toDenseMatrix());
  CHECK(manipulation_cost(m, noisy) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("manipulation cost matches the trace identity on random policies") {
  const GaussianClassModel m = testing::random_model(3);
  const Eigen::MatrixXd big =
      m.sigma_pos.mat() + m.mu_pos * m.mu_pos.transpose();
  for (int trial = 0; trial < 20; ++trial) {
    AdversaryPolicy adv;
    adv.a_matrix = testing::random_matrix(3, 3);
    adv.w_mean = testing::random_vector(3);
    adv.w_cov = testing::random_spd(3);
    const Eigen::MatrixXd r =
        Eigen::MatrixXd::Identity(3, 3) - adv.a_matrix;
    const double expect = (r * big * r.transpose()).trace() +
                          adv.w_mean.squaredNorm() + adv.w_cov.trace();
    CHECK(manipulation_cost(m, adv) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_game bundles the four metrics") {
  const GaussianClassModel m = synthetic_example();
  const AdversaryPolicy id = identity_adversary(2);
  const ClassifierPolicy clf = testing::baseline_classifier();
  const GameMetrics g = evaluate_game(m, id, clf);
  CHECK(g.true_positive == true_positive_prob(m, id, clf));
  CHECK(g.false_negative == false_negative_prob(m, id, clf));
  CHECK(g.true_negative == true_negative_prob(m, clf));
  CHECK(g.manipulation_cost == 0.0);
}

TEST_CASE("feasibility predicates") {
  const GaussianClassModel m = synthetic_example();
  const ClassifierPolicy clf = testing::baseline_classifier();
  CHECK(feasible_classifier(m, clf, 0.01));
  CHECK_FALSE(feasible_classifier(m, clf, 0.001));

  AdversaryPolicy shift = identity_adversary(2);
  shift.w_mean = Eigen::Vector2d(1.0, 1.0);
  CHECK(feasible_adversary(m, shift, 2.0));
  CHECK_FALSE(feasible_adversary(m, shift, 1.0));
  CHECK(feasible_adversary(m, identity_adversary(2), 0.0));
}

TEST_CASE("config validation") {
  GameConfig c;
  c.validate();

  c.epsilon = 0.0;
  c.validate();

  c.epsilon = -0.5;
  CHECK_THROWS_AS(c.validate(), ConstructionError);

  c = GameConfig{};
  c.delta = 0.5;
  CHECK_THROWS_AS(c.validate(), ConstructionError);
  c.delta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConstructionError);

  c = GameConfig{};
  c.varpi = 1.0;
  CHECK_THROWS_AS(c.validate(), ConstructionError);

  c = GameConfig{};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConstructionError);

  c = GameConfig{};
  c.conv_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConstructionError);

  c = GameConfig{};
  c.solver_tol = -1e-8;
  CHECK_THROWS_AS(c.validate(), ConstructionError);
}

TEST_CASE("metrics_to_json carries rates and the game constants") {
  const GameMetrics g{0.9, 0.1, 0.99, 1.5};
  const nlohmann::json j = metrics_to_json(g, 0.01, 2.0);
  CHECK(j.at("true_positive") == 0.9);
  CHECK(j.at("false_negative") == 0.1);
  CHECK(j.at("true_negative") == 0.99);
  CHECK(j.at("manipulation_cost") == 1.5);
  CHECK(j.at("delta") == 0.01);
  CHECK(j.at("epsilon") == 2.0);
}
