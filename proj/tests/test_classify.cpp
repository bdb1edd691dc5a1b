#include <cmath>

#include "doctest.h"
#include "preservers/classify.hpp"
#include "preservers/genfuzz.hpp"

using namespace preservers;

namespace {

const Tolerances kTol;

LinMap built(int m, int n, Field f, std::vector<double> q1,
             std::vector<double> q2, int slack = 0,
             std::uint64_t seed = 11) {
  int nq1 = static_cast<int>(q1.size()), nq2 = static_cast<int>(q2.size());
  int r = nq1 * m + nq2 * n + slack;
  int s = nq1 * n + nq2 * m + slack;
  Rng rng = Rng::derive(seed, 42, 0);
  CanonicalForm c = random_canonical(m, n, r, s, f, nq1, nq2, rng);
  c.q1 = std::move(q1);
  c.q2 = std::move(q2);
  return build(c);
}

LinMap squash_map(Field f) {
  std::vector<Mat> images(4, Mat::zero(f, 2, 2));
  images[0] = Mat::unit(f, 2, 2, 0, 0);
  images[3] = Mat::unit(f, 2, 2, 0, 0);
  return from_images(2, 2, 2, 2, f, images);
}

}  // namespace

TEST_CASE("zero triple preserver verdicts") {
  ClassifierVerdict v =
      check_zero_triple_preserver(identity_map(2, 2, Field::Complex), kTol);
  CHECK(v.verdict == Verdict::Yes);
  REQUIRE(v.certificate.has_value());

  v = check_zero_triple_preserver(squash_map(Field::Real), kTol);
  CHECK(v.verdict == Verdict::No);
  REQUIRE(v.witness.size() == 3);
  // The witness triple has a vanishing product whose image does not vanish.
  CHECK(jordan_triple(v.witness[0], v.witness[1], v.witness[2]).max_norm() <=
        1e-12);
  LinMap phi = squash_map(Field::Real);
  CHECK(jordan_triple(apply(phi, v.witness[0]), apply(phi, v.witness[1]),
                      apply(phi, v.witness[2]))
            .max_norm() > 1e-6);

  v = check_zero_triple_preserver(
      built(2, 2, Field::Complex, {0.7}, {0.5}), kTol);
  CHECK(v.verdict == Verdict::Yes);
  REQUIRE(v.certificate.has_value());
  REQUIRE(v.certificate->q1.size() == 1);
  REQUIRE(v.certificate->q2.size() == 1);
  CHECK(v.certificate->q1[0] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(v.certificate->q2[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("triple homomorphism needs unit weights") {
  CHECK(check_triple_homomorphism(identity_map(2, 3, Field::Real), kTol)
            .verdict == Verdict::Yes);

  ClassifierVerdict v =
      check_triple_homomorphism(built(2, 2, Field::Complex, {0.5}, {}), kTol);
  CHECK(v.verdict == Verdict::No);
  CHECK(v.detail == "Q_NOT_IDENTITY");
  REQUIRE(v.witness.size() == 1);

  v = check_triple_homomorphism(
      built(3, 2, Field::Real, {1.0, 1.0}, {1.0}, 2), kTol);
  CHECK(v.verdict == Verdict::Yes);
}

TEST_CASE("partial isometry preserver") {
  CHECK(check_partial_isometry_preserver(transpose_map(2, 3, Field::Complex),
                                         kTol)
            .verdict == Verdict::Yes);
  ClassifierVerdict v = check_partial_isometry_preserver(
      built(2, 2, Field::Real, {2.0}, {}), kTol);
  CHECK(v.verdict == Verdict::No);

  v = check_partial_isometry_preserver(squash_map(Field::Complex), kTol);
  CHECK(v.verdict == Verdict::No);
  CHECK(v.detail == "NOT_PRESERVER");
}

TEST_CASE("the two triple classifiers agree") {
  Rng rng(314);
  for (int t = 0; t < 20; ++t) {
    bool unit = t % 2 == 0;
    int m = rng.uniform_int(2, 3), n = rng.uniform_int(2, 3);
    double w = unit ? 1.0 : 1.0 + 0.1 + rng.uniform();
    LinMap phi = built(m, n, t % 4 < 2 ? Field::Real : Field::Complex, {w},
                       {unit ? 1.0 : w}, 1, 100 + t);
    ClassifierVerdict a = check_triple_homomorphism(phi, kTol);
    ClassifierVerdict b = check_partial_isometry_preserver(phi, kTol);
    CHECK(a.verdict == b.verdict);
    CHECK((a.verdict == Verdict::Yes) == unit);
  }
}

TEST_CASE("schatten isometry classification") {
  CHECK_THROWS_AS(
      check_schatten_isometry(identity_map(2, 2, Field::Real), -1.0, kTol),
      std::invalid_argument);
  ClassifierVerdict v =
      check_schatten_isometry(identity_map(2, 2, Field::Real), 2.0, kTol);
  CHECK(v.verdict == Verdict::Inapplicable);
  CHECK(v.detail == "P_EQUALS_TWO");

  for (double p : {1.0, 3.0, 4.0})
    CHECK(check_schatten_isometry(identity_map(2, 2, Field::Complex), p, kTol)
              .verdict == Verdict::Yes);

  double w = std::pow(2.0, -1.0 / 3.0);
  CHECK(check_schatten_isometry(built(2, 2, Field::Complex, {w}, {w}), 3.0,
                                kTol)
            .verdict == Verdict::Yes);

  v = check_schatten_isometry(built(2, 2, Field::Real, {0.9, 0.9}, {}), 1.0,
                              kTol);
  CHECK(v.verdict == Verdict::No);
  CHECK(v.detail == "SP_NOT_ONE");
}

TEST_CASE("schatten factor scales sampled ratios exactly") {
  Rng rng(2718);
  const double p = 3.0;
  LinMap phi = built(2, 2, Field::Complex, {0.4}, {0.3}, 1, 5);
  double factor = std::pow(std::pow(0.4, p) + std::pow(0.3, p), 1.0 / p);
  for (int t = 0; t < 20; ++t) {
    Mat a = random_rank_two(2, 2, Field::Complex, rng);
    double ratio = schatten_norm(apply(phi, a), p) / schatten_norm(a, p);
    CHECK(std::abs(ratio - factor) <= 1e-9);
  }
}

TEST_CASE("ky fan isometry over the complex field") {
  LinMap phi = built(2, 2, Field::Complex, {0.5}, {0.5});
  ClassifierVerdict v = check_kyfan_isometry(phi, 4, 2, kTol);
  CHECK(v.verdict == Verdict::Yes);
  v = check_kyfan_isometry(phi, 3, 2, kTol);
  CHECK(v.verdict == Verdict::No);
  CHECK(v.detail == "K_TOO_SMALL");

  LinMap off = built(2, 2, Field::Complex, {0.6}, {0.5});
  v = check_kyfan_isometry(off, 4, 2, kTol);
  CHECK(v.verdict == Verdict::No);
  CHECK(v.detail == "TRACE_NOT_ONE");

  CHECK_THROWS_AS(check_kyfan_isometry(phi, 0, 2, kTol),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_kyfan_isometry(phi, 5, 2, kTol),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_kyfan_isometry(phi, 2, 1, kTol),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_kyfan_isometry(phi, 2, 3, kTol),
                  std::invalid_argument);
}

TEST_CASE("ky fan claims only sufficiency over the reals") {
  LinMap phi = built(2, 2, Field::Real, {0.5}, {0.5});
  ClassifierVerdict v = check_kyfan_isometry(phi, 4, 2, kTol);
  CHECK(v.verdict == Verdict::Yes);
  CHECK(v.detail == "REAL_FIELD_SUFFICIENT_ONLY");

  v = check_kyfan_isometry(phi, 3, 2, kTol);
  CHECK(v.verdict == Verdict::Inapplicable);
  CHECK(v.detail == "REAL_FIELD_SUFFICIENT_ONLY");

  v = check_kyfan_isometry(squash_map(Field::Real), 2, 2, kTol);
  CHECK(v.verdict == Verdict::Inapplicable);
  CHECK(v.detail == "REAL_FIELD_SUFFICIENT_ONLY");
}

TEST_CASE("degenerate domains are inapplicable") {
  LinMap phi = identity_map(1, 2, Field::Real);
  ClassifierVerdict v = check_zero_triple_preserver(phi, kTol);
  CHECK(v.verdict == Verdict::Inapplicable);
  CHECK(v.detail == "DEGENERATE_DOMAIN");
  CHECK(check_triple_homomorphism(phi, kTol).verdict == Verdict::Inapplicable);
  CHECK(check_schatten_isometry(phi, 1.0, kTol).verdict ==
        Verdict::Inapplicable);
}
