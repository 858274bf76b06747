#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ssiter/linalg.hpp"
#include "support.hpp"

using namespace ssiter;

TEST(Linalg, InfNormIsMaxAbsRowSum) {
  const Matrix m{{1, -2, 3}, {0, 0, -0.5}, {-4, 1, 1}};
  EXPECT_DOUBLE_EQ(inf_norm(m), 6.0);
  EXPECT_DOUBLE_EQ(inf_norm(Vector{1.0, -7.5, 3.0}), 7.5);
  EXPECT_DOUBLE_EQ(inf_norm(Vector{}), 0.0);
}

TEST(Linalg, JacobiSplitOfTwoByTwo) {
  const JacobiSplit s = jacobi_split(Matrix{{2, 1}, {1, 2}});
  EXPECT_EQ(s.a, (Matrix{{0.5, 0}, {0, 0.5}}));
  EXPECT_EQ(s.b, (Matrix{{0, -0.5}, {-0.5, 0}}));
  EXPECT_DOUBLE_EQ(s.norm_a, 0.5);
  EXPECT_DOUBLE_EQ(s.norm_b, 0.5);
}

TEST(Linalg, JacobiSplitRejectsZeroDiagonal) {
  try {
    jacobi_split(Matrix{{1, 0}, {1, 0}});
    FAIL();
  } catch (const ZeroDiagonal& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

TEST(Linalg, JacobiSplitDiagonalOfBIsExactlyZero) {
  const JacobiSplit s = jacobi_split(fixtures::random_dominant_matrix(12, 0.6, 3.0, 5));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(s.b(i, i), 0.0);
}

TEST(Linalg, FixedPointIdentityHolds) {
  // u = A v + B u for the exact solution u.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = fixtures::random_dominant_matrix(8, 0.5, 2.0, seed);
    const Vector v = fixtures::random_vector(8, -1, 1, seed);
    const Vector u = solve_exact(w, v);
    const JacobiSplit s = jacobi_split(w);
    EXPECT_LT(inf_norm(s.a * v + s.b * u - u), 1e-12 * (1 + inf_norm(u)));
  }
}

TEST(Linalg, NormBoundsOnRandomDominantMatrices) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Matrix w = fixtures::random_dominant_matrix(2 + seed % 30, 0.7, 5.0, seed);
    ASSERT_TRUE(is_normalized_diag_dominant(w));
    const JacobiSplit s = jacobi_split(w);
    EXPECT_LE(s.norm_a, 1.0);
    EXPECT_LT(s.norm_b, 1.0);
  }
}

TEST(Linalg, DominanceCheckNeedsStrictnessAndUnitDiagonal) {
  EXPECT_TRUE(is_normalized_diag_dominant(Matrix{{2, 1}, {1, 2}}));
  EXPECT_FALSE(is_normalized_diag_dominant(Matrix{{2, 2}, {1, 2}}));        // not strict
  EXPECT_FALSE(is_normalized_diag_dominant(Matrix{{0.5, 0.1}, {0.1, 2}}));  // |w_ii| < 1
  EXPECT_TRUE(is_normalized_diag_dominant(Matrix{{-3, 1}, {1, 2}}));
}

TEST(Linalg, SolveExactTwoByTwo) {
  const Vector u = solve_exact(Matrix{{2, 1}, {1, 2}}, Vector{3, 3});
  EXPECT_NEAR(u[0], 1.0, 1e-15);
  EXPECT_NEAR(u[1], 1.0, 1e-15);
}

TEST(Linalg, SolveExactNeedsPivoting) {
  const Vector u = solve_exact(Matrix{{0, 1}, {1, 0}}, Vector{2, 3});
  EXPECT_DOUBLE_EQ(u[0], 3.0);
  EXPECT_DOUBLE_EQ(u[1], 2.0);
}

TEST(Linalg, SolveExactSingular) {
  EXPECT_THROW(solve_exact(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), Singular);
  EXPECT_THROW(solve_exact(Matrix{{0, 0}, {0, 0}}, Vector{1, 1}), Singular);
}

TEST(Linalg, SolveResidualIsSmall) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix w = fixtures::random_dominant_matrix(20, 0.4, 10.0, seed);
    const Vector v = fixtures::random_vector(20, -5, 5, seed);
    const Vector u = solve_exact(w, v);
    EXPECT_LT(inf_norm(w * u - v), 1e-11 * (inf_norm(w) * inf_norm(u) + inf_norm(v)));
  }
}

TEST(Linalg, InverseTimesMatrixIsIdentity) {
  const Matrix w = fixtures::random_dominant_matrix(10, 0.8, 2.0, 3);
  EXPECT_LT(inf_norm(mat_inverse(w) * w - Matrix::identity(10)), 1e-13);
}

TEST(Linalg, DimensionMismatches) {
  EXPECT_THROW(Vector(2) + Vector(3), DimensionMismatch);
  EXPECT_THROW(Matrix(2) * Vector(3), DimensionMismatch);
  EXPECT_THROW(solve_exact(Matrix(2), Vector(3)), DimensionMismatch);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionMismatch);
}

TEST(Linalg, CholeskyReproducesCovariance) {
  const Matrix s{{4, 2, 0.4}, {2, 3, 0.5}, {0.4, 0.5, 1}};
  const Matrix l = cholesky_psd(s);
  EXPECT_LT(inf_norm(l * transpose(l) - s), 1e-14);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) EXPECT_EQ(l(i, j), 0.0);
}

TEST(Linalg, CholeskyAcceptsSemidefinite) {
  EXPECT_EQ(cholesky_psd(Matrix(3)), Matrix(3));
  const Matrix s{{1, 1}, {1, 1}};
  const Matrix l = cholesky_psd(s);
  EXPECT_LT(inf_norm(l * transpose(l) - s), 1e-14);
}

TEST(Linalg, CholeskyRejectsIndefiniteAndAsymmetric) {
  EXPECT_THROW(cholesky_psd(Matrix{{1, 2}, {2, 1}}), BadCovariance);
  EXPECT_THROW(cholesky_psd(Matrix{{1, 0.5}, {0, 1}}), BadCovariance);
  EXPECT_THROW(cholesky_psd(Matrix{{-1, 0}, {0, 1}}), BadCovariance);
}

TEST(Linalg, MatrixTextRoundTripIsExact) {
  const Matrix w = fixtures::random_dominant_matrix(7, 0.5, 1.0 / 3.0, 11);
  std::stringstream ss;
  write_matrix(ss, w);
  EXPECT_EQ(read_matrix(ss), w);
}

TEST(Linalg, MatrixTextErrors) {
  {
    std::istringstream in("2\n1 2\n3 x\n");
    try {
      read_matrix(in);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u);
    }
  }
  {
    std::istringstream in("2\n1 2 3\n3 4\n");
    EXPECT_THROW(read_matrix(in), DimensionMismatch);
  }
  {
    std::istringstream in("3\n1 2 3\n3 4 5\n");
    EXPECT_THROW(read_matrix(in), DimensionMismatch);
  }
  {
    std::istringstream in("");
    EXPECT_THROW(read_matrix(in), ParseError);
  }
  {
    std::istringstream in("-2\n");
    EXPECT_THROW(read_matrix(in), ParseError);
  }
  {
    std::istringstream in("1\n5\n6\n");
    EXPECT_THROW(read_matrix(in), DimensionMismatch);
  }
}

TEST(Linalg, FormatDoubleRoundTrips) {
  for (double x : {1.0 / 3.0, -2.0 / 3.0, 1e-300, 0.1, 12345.678901234567}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}
