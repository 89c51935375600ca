#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sgm/kmeans.hpp"
#include "sgm/sbm.hpp"

using namespace sgm;

TEST(Points, Layout) {
  Points p(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(p(1, 0), 4.0);
  EXPECT_EQ(p.row(0)[2], 3.0);
  EXPECT_THROW(Points(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_EQ(squared_distance(p.row(0), p.row(1)), 27.0);
}

TEST(Kmeans, SeparatedLine) {
  const Points p(4, 1, {0, 0.1, 10, 10.1});
  const auto r = kmeans(p, 2);
  const auto& l = r.labels.labels;
  EXPECT_EQ(l[0], l[1]);
  EXPECT_EQ(l[2], l[3]);
  EXPECT_NE(l[0], l[2]);
  EXPECT_NEAR(r.inertia, 0.01, 1e-12);
  EXPECT_FALSE(r.labels.has_empty_cluster);
}

TEST(Kmeans, IdenticalPointsFlagEmptyCluster) {
  const Points p(5, 2, std::vector<double>(10, 3.0));
  const auto r = kmeans(p, 2);
  EXPECT_TRUE(r.labels.has_empty_cluster);
  for (int l : r.labels.labels) EXPECT_EQ(l, 0);
  EXPECT_EQ(r.labels.sizes(), (std::vector<std::size_t>{5, 0}));
  EXPECT_EQ(r.inertia, 0.0);
}

TEST(Kmeans, IndicatorEmbeddingRecoversGroups) {
  const SbmParams prm{3, 5, 0, 0, 0, 0};
  const auto chi = indicator_basis(prm);
  Eigen::MatrixXd m(15, 3);
  for (Eigen::Index j = 0; j < 3; ++j) m.col(j) = oracle::to_eigen(chi[static_cast<std::size_t>(j)]);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ() * Eigen::MatrixXd::Identity(15, 3);
  Points p(15, 3);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = 0; j < 3; ++j) p(i, j) = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const auto l = kmeans(p, 3).labels.labels;
  const auto truth = planted_labels(prm);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = 0; j < 15; ++j) EXPECT_EQ(l[i] == l[j], truth[i] == truth[j]);
}

TEST(Kmeans, DeterministicAndThreadIndependent) {
  Rng rng(3);
  Points p(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    p(i, 0) = rng.normal() + (i % 4 < 2 ? 0.0 : 3.0);
    p(i, 1) = rng.normal() + (i % 2 ? 0.0 : 3.0);
  }
  KmeansOptions a;
  a.seed = 42;
  KmeansOptions b = a;
  b.threads = 4;
  const auto ra = kmeans(p, 4, a), rb = kmeans(p, 4, b), rc = kmeans(p, 4, a);
  EXPECT_EQ(ra.labels.labels, rb.labels.labels);
  EXPECT_EQ(ra.labels.labels, rc.labels.labels);
  EXPECT_EQ(ra.inertia, rb.inertia);
}

TEST(Kmeans, MoreRestartsNeverWorse) {
  Rng rng(5);
  Points p(150, 3);
  for (std::size_t i = 0; i < 150; ++i)
    for (std::size_t j = 0; j < 3; ++j) p(i, j) = rng.normal() + static_cast<double>(i % 5) * (j == 0 ? 1.5 : 0.0);
  KmeansOptions one;
  one.restarts = 1;
  one.seed = 7;
  KmeansOptions many = one;
  many.restarts = 20;
  EXPECT_LE(kmeans(p, 5, many).inertia, kmeans(p, 5, one).inertia);
}

TEST(Kmeans, RejectsBadK) {
  const Points p(2, 1, {0, 1});
  EXPECT_THROW(kmeans(p, 0), std::invalid_argument);
  EXPECT_THROW(kmeans(p, 3), std::invalid_argument);
}
