#include <doctest.h>

#include "strata/matrix.hpp"
#include "strata/parallel.hpp"
#include "test_util.hpp"

using strata::Matrix;

TEST_CASE("matmul matches a hand-computed product") {
  Matrix a(2, 3), b(3, 2);
  double va = 1.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = va++;
  double vb = 1.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) b(r, c) = vb++;
  const Matrix c = strata::matmul(a, b);
  CHECK(c(0, 0) == doctest::Approx(22.0));
  CHECK(c(0, 1) == doctest::Approx(28.0));
  CHECK(c(1, 0) == doctest::Approx(49.0));
  CHECK(c(1, 1) == doctest::Approx(64.0));
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  strata::Rng rng(42);
  for (int iter = 0; iter < 5; ++iter) {
    const int m = rng.uniform_int(1, 90);
    const int k = rng.uniform_int(1, 90);
    const int n = rng.uniform_int(1, 90);
    const Matrix a = testutil::random_matrix(m, k, rng);
    const Matrix b = testutil::random_matrix(k, n, rng);
    const Matrix bt = testutil::random_matrix(n, k, rng);
    const Matrix at = testutil::random_matrix(k, m, rng);

    strata::par::set_enabled(true);
    const Matrix p1 = strata::matmul(a, b);
    const Matrix p2 = strata::matmul_nt(a, bt);
    const Matrix p3 = strata::matmul_tn(at, b);
    strata::par::set_enabled(false);
    CHECK(strata::matmul(a, b) == p1);
    CHECK(strata::matmul_nt(a, bt) == p2);
    CHECK(strata::matmul_tn(at, b) == p3);
    strata::par::set_enabled(true);

    CHECK(p1 == strata::serial::matmul(a, b));
    CHECK(p2 == strata::serial::matmul_nt(a, bt));
    CHECK(p3 == strata::serial::matmul_tn(at, b));
  }
}

TEST_CASE("transposed kernels agree with explicit transposition") {
  strata::Rng rng(7);
  const Matrix a = testutil::random_matrix(4, 6, rng);
  const Matrix b = testutil::random_matrix(5, 6, rng);
  Matrix bt(6, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) bt(c, r) = b(r, c);
  CHECK(strata::matmul_nt(a, b) == strata::matmul(a, bt));

  const Matrix x = testutil::random_matrix(6, 4, rng);
  Matrix xt(4, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 4; ++c) xt(c, r) = x(r, c);
  const Matrix y = testutil::random_matrix(6, 3, rng);
  CHECK(strata::matmul_tn(x, y) == strata::matmul(xt, y));
}

TEST_CASE("shape mismatches are rejected") {
  Matrix a(2, 3), b(2, 2);
  CHECK_THROWS_AS((void)strata::matmul(a, b), strata::Error);
}

TEST_CASE("vector helpers") {
  Matrix a(2, 3);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(0, 2) = 3;
  a(1, 0) = 4;
  a(1, 1) = 5;
  a(1, 2) = 6;
  std::vector<double> x{1.0, 0.0, -1.0};
  std::vector<double> y(2, 0.5);
  strata::addmv({x.data(), x.size()}, a, {y.data(), y.size()});
  CHECK(y[0] == doctest::Approx(0.5 - 2.0));
  CHECK(y[1] == doctest::Approx(0.5 - 2.0));

  std::vector<double> yt(3, 0.0);
  std::vector<double> x2{1.0, 1.0};
  strata::addmtv({x2.data(), x2.size()}, a, {yt.data(), yt.size()});
  CHECK(yt[0] == doctest::Approx(5.0));
  CHECK(yt[1] == doctest::Approx(7.0));
  CHECK(yt[2] == doctest::Approx(9.0));
}
