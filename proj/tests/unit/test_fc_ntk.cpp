#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "ntkmc/errors.hpp"
#include "ntkmc/fc_ntk.hpp"
#include "ntkmc/priors.hpp"
#include "support.hpp"

using namespace ntkmc;
using ntkmc::test::random_matrix;

namespace {

constexpr double kPi = std::numbers::pi;
const double kNan = std::nan("");

// The 3x3 worked example: observed (0,1)=.5, (0,2)=.3, (1,0)=.1, (1,1)=.2,
// (2,0)=.4, everything else missing.
ObservationSet toy_observations() {
  ObservationSet obs(3, 3);
  obs.add(2, 0, 0.4);
  obs.add(0, 2, 0.3);
  obs.add(1, 0, 0.1);
  obs.add(0, 1, 0.5);
  obs.add(1, 1, 0.2);
  return obs;
}

}  // namespace

TEST(FeaturePrior, NormalizesColumns) {
  const Eigen::MatrixXd raw = random_matrix(4, 6, 3);
  const FeaturePrior p = normalize_prior(raw);
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    EXPECT_NEAR(p.data.col(j).norm(), 1.0, 1e-12);
    EXPECT_NEAR(p.column_norms(j), raw.col(j).norm(), 1e-15);
  }
  EXPECT_TRUE(normalize_prior(Eigen::MatrixXd::Identity(3, 3)).data.isIdentity(0.0));
}

TEST(FeaturePrior, ZeroColumnNamed) {
  Eigen::MatrixXd raw = random_matrix(3, 4, 1);
  raw.col(2).setZero();
  try {
    normalize_prior(raw);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(FeaturePrior, AugmentIdentity) {
  const Eigen::MatrixXd raw = random_matrix(2, 3, 5);
  const Eigen::MatrixXd aug = augment_identity(raw, 1.5);
  ASSERT_EQ(aug.rows(), 5);
  EXPECT_EQ(aug.topRows(2), raw);
  EXPECT_TRUE(aug.bottomRows(3).isApprox(1.5 * Eigen::MatrixXd::Identity(3, 3)));
}

TEST(ColumnKernel, IdentityPriorDepthOne) {
  const ColumnKernel k = column_kernel(identity_prior(3), 1, Activation::relu());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(k.matrix(i, j), i == j ? 2.0 : 1.0 / kPi, 1e-15);
}

TEST(ColumnKernel, LinearIsTwiceGram) {
  const FeaturePrior p = normalize_prior(random_matrix(4, 5, 8));
  const ColumnKernel k = column_kernel(p, 1, Activation::linear());
  EXPECT_TRUE(k.matrix.isApprox(2.0 * p.data.transpose() * p.data, 1e-14));
}

TEST(ColumnKernel, ElementwiseKappa) {
  const FeaturePrior p = normalize_prior(random_matrix(4, 5, 9));
  const ColumnKernel k = column_kernel(p, 2, Activation::relu());
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double xi = std::clamp(p.data.col(i).dot(p.data.col(j)), -1.0, 1.0);
      EXPECT_NEAR(k.matrix(i, j), kappa(Activation::relu(), 2, xi), 1e-14);
    }
  EXPECT_TRUE(k.matrix.isApprox(k.matrix.transpose(), 1e-15));
  EXPECT_GE(ntkmc::test::min_eigenvalue(k.matrix), -1e-8 * k.matrix.trace() / 5);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(k.matrix(i, i), 3.0, 1e-13);
}

TEST(ObservationSet, RejectsBadEntries) {
  ObservationSet obs(2, 3);
  obs.add(0, 0, 1.0);
  EXPECT_THROW(obs.add(0, 0, 2.0), FormatError);
  EXPECT_THROW(obs.add(2, 0, 1.0), IndexError);
  EXPECT_THROW(obs.add(0, -1, 1.0), IndexError);
  EXPECT_EQ(obs.size(), 1u);
}

TEST(ObservationSet, DenseRoundTrip) {
  Eigen::MatrixXd m(2, 3);
  m << 1, kNan, 3, kNan, 5, 6;
  const ObservationSet obs = ObservationSet::from_dense(m);
  EXPECT_EQ(obs.size(), 4u);
  const Eigen::MatrixXd back = obs.to_dense();
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      if (std::isnan(m(i, j)))
        EXPECT_TRUE(std::isnan(back(i, j)));
      else
        EXPECT_EQ(back(i, j), m(i, j));
}

TEST(ObservationSet, TriplesCsv) {
  ntkmc::test::TempDir dir;
  const auto path = dir.file("obs.csv");
  std::ofstream(path) << "row,col,value\n0,1,0.5\n2,0,-1.25\n";
  const ObservationSet obs = ObservationSet::from_triples_csv(path);
  EXPECT_EQ(obs.rows(), 3);
  EXPECT_EQ(obs.cols(), 2);
  EXPECT_EQ(obs.to_dense()(2, 0), -1.25);
  const ObservationSet wide = ObservationSet::from_triples_csv(path, 4, 5);
  EXPECT_EQ(wide.cols(), 5);
}

// Worked 3x3 example: block-diagonal observation kernel with blocks
// [[k(1), k(0)], [k(0), k(1)]] per row and the printed k(M_11).
TEST(WorkedExample, KernelStructure) {
  const ObservationSet obs = toy_observations();
  const ColumnKernel ck = column_kernel(identity_prior(3), 1, Activation::relu());
  const Eigen::MatrixXd k = observation_kernel(obs, ck);
  const double k1 = 2.0, k0 = 1.0 / kPi;
  Eigen::MatrixXd expected(5, 5);
  expected << k1, k0, 0, 0, 0,
              k0, k1, 0, 0, 0,
              0, 0, k1, k0, 0,
              0, 0, k0, k1, 0,
              0, 0, 0, 0, k1;
  EXPECT_LE((k - expected).cwiseAbs().maxCoeff(), 1e-12);

  Eigen::VectorXd cross_expected(5);
  cross_expected << k0, k0, 0, 0, 0;
  EXPECT_LE((observation_cross(obs, ck, 0, 0) - cross_expected).cwiseAbs().maxCoeff(), 1e-12);

  const auto e = row_major(obs);
  ASSERT_EQ(e.size(), 5u);
  EXPECT_EQ(e[0].value, 0.5);
  EXPECT_EQ(e[4].value, 0.4);
}

TEST(WorkedExample, PredictionMatchesHandSolve) {
  const ObservationSet obs = toy_observations();
  const ColumnKernel ck = column_kernel(identity_prior(3), 1, Activation::relu());
  Eigen::VectorXd y(5);
  y << 0.5, 0.3, 0.1, 0.2, 0.4;
  const Eigen::MatrixXd k = observation_kernel(obs, ck);
  const Eigen::MatrixXd filled = complete_with_kernel(obs, ck, SolveOptions{});
  for (auto [i, j] : {std::pair{0, 0}, {1, 2}, {2, 1}, {2, 2}}) {
    const double hand = y.dot(k.llt().solve(observation_cross(obs, ck, i, j)));
    EXPECT_NEAR(filled(i, j), hand, 1e-12) << i << "," << j;
  }
  EXPECT_EQ(filled(0, 1), 0.5);
  EXPECT_EQ(filled(2, 0), 0.4);
}

// One-hot prior: predicted constant for a row with l observations, checked
// against K^{-1} 1 from Sherman-Morrison on K = (2 - 1/pi) I + (1/pi) J.
TEST(OneHotPrior, ShermanMorrisonCoefficient) {
  for (int l : {1, 3, 10, 50}) {
    const int n = l + 2;
    ObservationSet obs(1, n);
    double sum = 0.0;
    for (int j = 0; j < l; ++j) {
      const double v = 0.1 + 0.37 * j - 0.002 * j * j;
      obs.add(0, j, v);
      sum += v;
    }
    const Eigen::MatrixXd filled = complete_matrix(obs, identity_prior(n), 1, Activation::relu(), SolveOptions{});
    const double a = 2.0 - 1.0 / kPi, b = 1.0 / kPi;
    const double k_inv_one = 1.0 / (a + b * l);  // every entry of K^{-1} 1
    const double oracle = b * k_inv_one * sum;
    EXPECT_NEAR(filled(0, l), oracle, 1e-12) << l;
    EXPECT_NEAR(filled(0, l + 1), oracle, 1e-12) << l;
    EXPECT_NEAR(oracle, l / (2 * kPi - 1 + l) * (sum / l), 1e-14);
  }
}

TEST(Completion, FullyObservedIsIdentity) {
  const Eigen::MatrixXd m = random_matrix(4, 3, 11);
  const Eigen::MatrixXd out =
      complete_matrix(ObservationSet::from_dense(m), identity_prior(3), 1, Activation::relu(), SolveOptions{});
  EXPECT_EQ(out, m);
}

TEST(Completion, EmptyRowRejected) {
  ObservationSet obs(2, 3);
  obs.add(0, 0, 1.0);
  EXPECT_THROW(complete_matrix(obs, identity_prior(3), 1, Activation::relu(), SolveOptions{}), ShapeError);
}

TEST(Completion, RowsAreIndependent) {
  Eigen::MatrixXd m = random_matrix(5, 6, 12);
  m(0, 4) = m(0, 5) = m(1, 0) = m(3, 2) = m(3, 3) = kNan;
  const FeaturePrior p = normalize_prior(random_matrix(4, 6, 13));
  const Eigen::MatrixXd base =
      complete_matrix(ObservationSet::from_dense(m), p, 2, Activation::relu(), SolveOptions{});
  Eigen::MatrixXd perturbed = m;
  perturbed(1, 3) += 10.0;
  perturbed(4, 1) -= 3.0;
  const Eigen::MatrixXd other =
      complete_matrix(ObservationSet::from_dense(perturbed), p, 2, Activation::relu(), SolveOptions{});
  EXPECT_EQ(base.row(0), other.row(0));
  EXPECT_EQ(base.row(3), other.row(3));
}

TEST(Completion, LinearActivationIsMinNormRegression) {
  const Eigen::MatrixXd raw = random_matrix(8, 6, 14);
  const FeaturePrior p = normalize_prior(raw);
  Eigen::MatrixXd m = random_matrix(3, 6, 15);
  m(0, 5) = m(1, 1) = m(1, 4) = m(2, 0) = kNan;
  const Eigen::MatrixXd out =
      complete_matrix(ObservationSet::from_dense(m), p, 1, Activation::linear(), SolveOptions{});
  for (Eigen::Index i = 0; i < 3; ++i) {
    std::vector<Eigen::Index> seen;
    for (Eigen::Index j = 0; j < 6; ++j)
      if (!std::isnan(m(i, j))) seen.push_back(j);
    Eigen::MatrixXd zs(8, static_cast<Eigen::Index>(seen.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(seen.size()));
    for (std::size_t k = 0; k < seen.size(); ++k) {
      zs.col(static_cast<Eigen::Index>(k)) = p.data.col(seen[k]);
      y(static_cast<Eigen::Index>(k)) = m(i, seen[k]);
    }
    // Minimum-norm beta with zs^T beta = y.
    const Eigen::VectorXd beta = zs.transpose().completeOrthogonalDecomposition().solve(y);
    for (Eigen::Index j = 0; j < 6; ++j)
      if (std::isnan(m(i, j))) EXPECT_NEAR(out(i, j), p.data.col(j).dot(beta), 1e-8);
  }
}

TEST(Completion, PermutationEquivariance) {
  const Eigen::MatrixXd raw = random_matrix(5, 6, 16);
  Eigen::MatrixXd m = random_matrix(3, 6, 17);
  m(0, 1) = m(1, 5) = m(2, 2) = m(2, 3) = kNan;
  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  Eigen::MatrixXd raw_p(5, 6), m_p(3, 6);
  for (int j = 0; j < 6; ++j) {
    raw_p.col(j) = raw.col(perm[j]);
    m_p.col(j) = m.col(perm[j]);
  }
  const Eigen::MatrixXd out = complete_matrix(ObservationSet::from_dense(m), normalize_prior(raw), 2,
                                              Activation::relu(), SolveOptions{});
  const Eigen::MatrixXd out_p = complete_matrix(ObservationSet::from_dense(m_p), normalize_prior(raw_p), 2,
                                                Activation::relu(), SolveOptions{});
  for (int j = 0; j < 6; ++j) EXPECT_LE((out_p.col(j) - out.col(perm[j])).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SharedPattern, OneFactorizationForWholeColumnMissingness) {
  const Eigen::Index rows = 60, cols = 12, seen = 9;
  Eigen::MatrixXd m = random_matrix(rows, cols, 18);
  m.rightCols(cols - seen).setConstant(kNan);
  const FeaturePrior p = normalize_prior(augment_identity(random_matrix(6, cols, 19)));
  const ObservationSet obs = ObservationSet::from_dense(m);
  const ColumnKernel ck = column_kernel(p, 1, Activation::relu());

  CompletionReport rep;
  const Eigen::MatrixXd fast = complete_with_kernel(obs, ck, SolveOptions{}, &rep);
  EXPECT_TRUE(rep.shared_pattern);
  EXPECT_EQ(rep.factorizations, 1u);
  ASSERT_TRUE(shared_pattern_solve(obs, ck, SolveOptions{}).has_value());

  // Per-row oracle: independent solve for every row.
  std::vector<Eigen::Index> obs_cols(seen);
  std::iota(obs_cols.begin(), obs_cols.end(), 0);
  const Eigen::MatrixXd kss = ck.matrix.topLeftCorner(seen, seen);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd alpha = kss.llt().solve(m.row(i).head(seen).transpose());
    for (Eigen::Index j = seen; j < cols; ++j)
      EXPECT_NEAR(fast(i, j), ck.matrix.col(j).head(seen).dot(alpha), 1e-10);
  }
}

TEST(SharedPattern, DifferingPatternsFallBack) {
  Eigen::MatrixXd m = random_matrix(4, 5, 20);
  m(0, 4) = m(1, 3) = kNan;
  const ObservationSet obs = ObservationSet::from_dense(m);
  const ColumnKernel ck = column_kernel(identity_prior(5), 1, Activation::relu());
  EXPECT_FALSE(shared_pattern_solve(obs, ck, SolveOptions{}).has_value());
  CompletionReport rep;
  complete_with_kernel(obs, ck, SolveOptions{}, &rep);
  EXPECT_FALSE(rep.shared_pattern);
  EXPECT_EQ(rep.factorizations, 3u);  // {0..3}, {0,1,2,4}, full rows
}

TEST(Completion, SingularWithoutRidgeSuggestsRidge) {
  // Two identical prior columns make the observed kernel singular.
  Eigen::MatrixXd raw(2, 3);
  raw << 1, 1, 0, 0, 0, 1;
  ObservationSet obs(1, 3);
  obs.add(0, 0, 1.0);
  obs.add(0, 1, 2.0);
  const FeaturePrior p = normalize_prior(raw);
  try {
    complete_matrix(obs, p, 1, Activation::relu(), SolveOptions{});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  SolveOptions o;
  o.ridge = Ridge::trace_scaled(4e-5);
  EXPECT_NO_THROW(complete_matrix(obs, p, 1, Activation::relu(), o));
}
