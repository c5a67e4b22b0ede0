#include <cmath>
#include <cstdint>

#include <doctest.h>

#include "advsvm/rng.hpp"

using namespace advsvm;

TEST_CASE("word_at is a pure function of seed, stream, index") {
  CHECK(rng::word_at(42, 1, 0) == rng::word_at(42, 1, 0));
  CHECK(rng::word_at(42, 1, 0) != rng::word_at(42, 1, 1));
  CHECK(rng::word_at(42, 1, 0) != rng::word_at(42, 2, 0));
  CHECK(rng::word_at(42, 1, 0) != rng::word_at(43, 1, 0));
}

TEST_CASE("uniform maps land in their half-open intervals") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const std::uint64_t w = rng::word_at(7, 1, i);
    const double open = rng::uniform_open01(w);
    const double half = rng::uniform_half01(w);
    CHECK(open > 0.0);
    CHECK(open <= 1.0);
    CHECK(half >= 0.0);
    CHECK(half < 1.0);
  }
  CHECK(rng::uniform_open01(0) > 0.0);
  CHECK(rng::uniform_half01(0) == 0.0);
}

TEST_CASE("standard_normal is deterministic and index addressable") {
  for (std::uint64_t i = 0; i < 64; ++i) {
    CHECK(rng::standard_normal(42, 3, i) == rng::standard_normal(42, 3, i));
  }
}

TEST_CASE("normal_vector equals elementwise standard_normal draws") {
  const Eigen::VectorXd v = rng::normal_vector(42, 1, 10, 6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    CHECK(v[i] == rng::standard_normal(42, 1, 10 + static_cast<std::uint64_t>(i)));
  }
}

TEST_CASE("chunked generation matches one-shot generation bit for bit") {
  const Eigen::VectorXd whole = rng::normal_vector(99, 2, 0, 100);
  Eigen::VectorXd pieces(100);
  Eigen::Index at = 0;
  for (Eigen::Index len : {7, 13, 33, 47}) {
    pieces.segment(at, len) =
        rng::normal_vector(99, 2, static_cast<std::uint64_t>(at), len);
    at += len;
  }
  CHECK(at == 100);
  CHECK(pieces == whole);
}

TEST_CASE("standard_normal has the right first two moments") {
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng::standard_normal(2024, 1, static_cast<std::uint64_t>(i));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("streams are decorrelated") {
  const int n = 100000;
  double dot = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t idx = static_cast<std::uint64_t>(i);
    dot += rng::standard_normal(42, rng::stream::positive_class, idx) *
           rng::standard_normal(42, rng::stream::negative_class, idx);
  }
  CHECK(std::abs(dot / n) < 0.02);
}
