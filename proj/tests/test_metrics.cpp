// Copyright 2026 The identconcepts Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "identconcepts/metrics.hpp"
#include "test_util.hpp"

namespace ic = identconcepts;
using ic::Matrix;

namespace {

// Independent 2x2 DCI: importance of code i for factor j is the magnitude of
// the (j, i) entry of the inverse of the row-normalised matrix.
std::pair<double, double> dci_2x2(const Matrix& a) {
  double n[2][2];
  for (int i = 0; i < 2; ++i) {
    const double len = std::hypot(a(i, 0), a(i, 1));
    n[i][0] = a(i, 0) / len;
    n[i][1] = a(i, 1) / len;
  }
  const double det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
  const double inv[2][2] = {{n[1][1] / det, -n[0][1] / det}, {-n[1][0] / det, n[0][0] / det}};
  double r[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = std::abs(inv[j][i]);
  for (int j = 0; j < 2; ++j) {
    const double s = r[0][j] + r[1][j];
    r[0][j] /= s;
    r[1][j] /= s;
  }
  auto h2 = [](double p, double q) {
    double h = 0.0;
    if (p > 0) h -= p * std::log2(p);
    if (q > 0) h -= q * std::log2(q);
    return h;
  };
  const double total = r[0][0] + r[0][1] + r[1][0] + r[1][1];
  double d = 0.0, c = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m = r[i][0] + r[i][1];
    d += m / total * (1.0 - h2(r[i][0] / m, r[i][1] / m));
  }
  for (int j = 0; j < 2; ++j) {
    const double m = r[0][j] + r[1][j];
    c += m / total * (1.0 - h2(r[0][j] / m, r[1][j] / m));
  }
  return {d, c};
}

Matrix uniform_samples(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix z(n, k);
  for (double& v : z.data()) v = u(rng);
  return z;
}

}  // namespace

TEST(DecomposePs, SignedScaledPermutation) {
  const Matrix a{{0, 0, -2}, {3, 0, 0}, {0, 0.5, 0}};
  const auto r = ic::decompose_ps(a);
  EXPECT_EQ(r.permutation, (std::vector<std::size_t>{2, 0, 1}));
  EXPECT_EQ(r.scales, (std::vector<double>{-2, 3, 0.5}));
  EXPECT_EQ(r.residual, 0.0);
}

TEST(DecomposePs, ResidualOfDenseMatrix) {
  const Matrix a{{1, 1}, {0, 1}};
  const auto r = ic::decompose_ps(a);
  EXPECT_NEAR(r.residual, 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_EQ(r.permutation[1], 1u);
}

TEST(DecomposePs, MatchesBruteForceAssignment) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const Matrix a = testutil::random_matrix(5, 5, rng);
    Matrix score(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) score(i, j) = std::abs(a(i, j)) / ic::norm2(a.row(i));
    std::vector<std::size_t> best;
    const double opt = testutil::brute_force_best(score, &best);
    const auto r = ic::decompose_ps(a);
    double got = 0.0;
    for (std::size_t i = 0; i < 5; ++i) got += score(i, r.permutation[i]);
    EXPECT_NEAR(got, opt, 1e-12);
  }
}

TEST(DciFromMatrix, PerfectForSignedScaledPermutations) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto r = ic::dci_from_matrix(testutil::signed_permutation(4, rng, true));
    EXPECT_NEAR(r.disentanglement, 1.0, 1e-12);
    EXPECT_NEAR(r.completeness, 1.0, 1e-12);
  }
}

TEST(DciFromMatrix, UpperTriangularMatchesIndependentOracle) {
  const Matrix a{{1, 1}, {0, 1}};
  const auto [d, c] = dci_2x2(a);
  const auto r = ic::dci_from_matrix(a);
  EXPECT_NEAR(r.disentanglement, d, 1e-12);
  EXPECT_NEAR(r.completeness, c, 1e-12);
  EXPECT_GT(r.disentanglement, 0.0);
  EXPECT_LT(r.disentanglement, 1.0);
}

TEST(DciFromMatrix, RandomTwoByTwoMatchesOracle) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testutil::random_matrix(2, 2, rng);
    const auto [d, c] = dci_2x2(a);
    const auto r = ic::dci_from_matrix(a);
    EXPECT_NEAR(r.disentanglement, d, 1e-10);
    EXPECT_NEAR(r.completeness, c, 1e-10);
  }
}

TEST(DciFromMatrix, FullyEntangledScoresLow) {
  // Equal-magnitude dense rows (a Hadamard pattern) spread every factor over
  // every code.
  const Matrix h{{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  const auto r = ic::dci_from_matrix(h);
  EXPECT_NEAR(r.disentanglement, 0.0, 1e-12);
  EXPECT_NEAR(r.completeness, 0.0, 1e-12);
  EXPECT_THROW(ic::dci_from_matrix(Matrix(3, 3, 1.0)), ic::NumericError);
}

TEST(DciFromMatrix, InvariantToRowScaleAndPermutation) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = testutil::random_matrix(4, 4, rng);
    const Matrix ps = testutil::signed_permutation(4, rng, true);
    const auto r0 = ic::dci_from_matrix(a);
    const auto r1 = ic::dci_from_matrix(ps * a);
    EXPECT_NEAR(r0.disentanglement, r1.disentanglement, 1e-10);
    EXPECT_NEAR(r0.completeness, r1.completeness, 1e-10);
  }
}

TEST(DciFromMatrix, Errors) {
  EXPECT_THROW(ic::dci_from_matrix(Matrix(2, 3, 1.0)), ic::NumericError);
  EXPECT_THROW(ic::dci_from_matrix(Matrix{{1, 0}, {0, 0}}), ic::NumericError);
  EXPECT_THROW(ic::dci_from_matrix(Matrix{{1, NAN}, {0, 1}}), ic::NumericError);
}

TEST(DciFromSamples, AgreesWithMatrixForm) {
  const Matrix z = uniform_samples(10000, 3, 5);
  const Matrix a{{1, 0.2, 0}, {0, 1, 0.3}, {0.1, 0, 1}};
  const Matrix pred = z * a.transpose();
  const auto s = ic::dci_from_samples(z, pred);
  const auto m = ic::dci_from_matrix(a);
  EXPECT_NEAR(s.disentanglement, m.disentanglement, 0.05);
  EXPECT_NEAR(s.completeness, m.completeness, 0.05);
  EXPECT_GT(s.informativeness, 0.99);
}

TEST(DciFromSamples, PerfectCodesAndDenseMixing) {
  const Matrix z = uniform_samples(5000, 4, 6);
  const auto perfect = ic::dci_from_samples(z, z * Matrix{{0, 2, 0, 0},
                                                          {0, 0, 0, -1},
                                                          {3, 0, 0, 0},
                                                          {0, 0, 1, 0}});
  EXPECT_GT(perfect.disentanglement, 0.99);
  std::mt19937_64 rng(6);
  Matrix dense = testutil::random_matrix(4, 4, rng);
  for (double& v : dense.data()) v = 1.0 + 0.1 * v;
  EXPECT_LT(ic::dci_from_samples(z, z * dense).disentanglement, 0.8);
  EXPECT_THROW(ic::dci_from_samples(Matrix(10, 2), Matrix(10, 2)), std::invalid_argument);
}

TEST(Mig, SelfIndependentAndDuplicate) {
  const Matrix z = uniform_samples(20000, 3, 7);
  EXPECT_GT(ic::mig(z, z), 0.99);
  const Matrix other = uniform_samples(20000, 3, 8);
  EXPECT_LT(ic::mig(z, other), 0.05);
  // Duplicating a code leaves no gap for the factor it carries.
  Matrix dup = z;
  for (std::size_t r = 0; r < dup.rows(); ++r) dup(r, 1) = dup(r, 0);
  const auto rep = ic::mig_report(z, dup);
  EXPECT_NEAR(rep.gaps[0], 0.0, 1e-12);
}

TEST(Mig, ConstantFactorIsExcluded) {
  Matrix z = uniform_samples(500, 2, 9);
  for (std::size_t r = 0; r < z.rows(); ++r) z(r, 1) = 0.5;
  const auto rep = ic::mig_report(z, z);
  EXPECT_EQ(rep.excluded_factors, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(std::isnan(rep.gaps[1]));
  EXPECT_THROW(ic::mig(Matrix(50, 2), Matrix(50, 2)), std::invalid_argument);
}

TEST(MatchedCorrelations, RecoversPermutedCodes) {
  const Matrix z = uniform_samples(3000, 3, 10);
  const auto c = ic::matched_correlations(z, z * Matrix{{0, 0, -1}, {2, 0, 0}, {0, 1, 0}});
  for (double v : c) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(MetricsCsv, RowFormat) {
  ic::DciReport r;
  r.disentanglement = 0.5;
  r.completeness = 0.25;
  r.informativeness = 1.0;
  EXPECT_EQ(ic::metrics_csv_header(), "method,dataset,seed,dci_d,dci_c,dci_i,mig,residual");
  EXPECT_EQ(ic::metrics_csv_row("pca", "fourbars", 3, r, 0.125, 1e-9),
            "pca,fourbars,3,0.5,0.25,1,0.125,1e-09");
}
