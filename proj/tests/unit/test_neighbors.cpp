#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "sgm/neighbors.hpp"
#include "sgm/rng.hpp"

using namespace sgm;

namespace {

std::size_t degree(const SparseSymMatrix& w, std::size_t i) { return w.row_cols(i).size(); }

} // namespace

TEST(NeighborGraph, NearestOnLine) {
  const Points p(3, 1, {0, 1, 10});
  const auto w = knn_pos_graph(p, 1);
  EXPECT_EQ(w.at(0, 1), 1.0);
  EXPECT_EQ(w.at(1, 2), 1.0);
  EXPECT_EQ(w.at(0, 2), 0.0);
  EXPECT_EQ(w.nnz(), 4u);
}

TEST(NeighborGraph, FarthestOnLine) {
  const Points p(3, 1, {0, 1, 10});
  const auto w = kfn_neg_graph(p, 1);
  EXPECT_EQ(w.at(0, 2), 1.0);
  EXPECT_EQ(w.at(1, 2), 1.0);
  EXPECT_EQ(w.at(0, 1), 0.0);
}

TEST(NeighborGraph, TwoPoints) {
  const Points p(2, 2, {0, 0, 1, 1});
  EXPECT_EQ(knn_pos_graph(p, 1).nnz(), 2u);
  EXPECT_EQ(kfn_neg_graph(p, 1).nnz(), 2u);
}

TEST(NeighborGraph, IntersectionKeepsMutualOnly) {
  const Points p(3, 1, {0, 1, 10});
  const auto w = knn_pos_graph(p, 1, Symmetrization::intersection_of);
  EXPECT_EQ(w.at(0, 1), 1.0);
  EXPECT_EQ(w.at(1, 2), 0.0);
}

TEST(NeighborGraph, TiesGoToSmallerIndex) {
  const Points p(3, 1, {0, -1, 1});
  const auto mutual = knn_pos_graph(p, 1, Symmetrization::intersection_of);
  EXPECT_EQ(mutual.at(0, 1), 1.0);
  EXPECT_EQ(mutual.at(0, 2), 0.0);
  EXPECT_EQ(knn_pos_graph(p, 1).at(0, 2), 1.0);
}

TEST(NeighborGraph, DuplicatePointsAreNeighbors) {
  const Points p(3, 1, {5, 5, 9});
  EXPECT_EQ(knn_pos_graph(p, 1).at(0, 1), 1.0);
}

TEST(NeighborGraph, GridMinimumDegree) {
  Points p(100, 2);
  for (std::size_t i = 0; i < 100; ++i) {
    p(i, 0) = static_cast<double>(i % 10);
    p(i, 1) = static_cast<double>(i / 10);
  }
  const auto w = knn_pos_graph(p, 3);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_GE(degree(w, i), 3u);
    EXPECT_EQ(w.at(i, i), 0.0);
  }
  const auto inter = knn_pos_graph(p, 3, Symmetrization::intersection_of);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_LE(degree(inter, i), 3u);
}

TEST(NeighborGraph, FarthestEdgesConcentrateOnHubs) {
  Rng rng(12);
  Points p(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    const double cx = i < 100 ? 0.0 : 10.0;
    p(i, 0) = cx + rng.normal();
    p(i, 1) = rng.normal();
  }
  const auto w = kfn_neg_graph(p, 5);
  std::vector<std::size_t> deg(200);
  for (std::size_t i = 0; i < 200; ++i) deg[i] = degree(w, i);
  std::sort(deg.rbegin(), deg.rend());
  std::size_t top = 0, total = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    total += deg[i];
    if (i < 20) top += deg[i];
  }
  EXPECT_GT(static_cast<double>(top) / static_cast<double>(total), 0.4);
}

TEST(NeighborGraph, RejectsBadCount) {
  const Points p(3, 1, {0, 1, 2});
  EXPECT_THROW(knn_pos_graph(p, 0), std::invalid_argument);
  EXPECT_THROW(knn_pos_graph(p, 3), std::invalid_argument);
}

TEST(PointParsing, CommasWhitespaceAndComments) {
  std::istringstream in("# header\n1, 2\n3 4\n\n5,6 # trailing\n");
  const auto p = parse_points(in);
  EXPECT_EQ(p.rows(), 3u);
  EXPECT_EQ(p.cols(), 2u);
  EXPECT_EQ(p(2, 1), 6.0);
}

TEST(PointParsing, Errors) {
  std::istringstream ragged("1 2\n3\n");
  try {
    parse_points(ragged);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad("1 x\n");
  EXPECT_THROW(parse_points(bad), ParseError);
  EXPECT_THROW(load_points("/nonexistent/points.csv"), std::runtime_error);
}

TEST(LabelParsing, ValuesAndErrors) {
  std::istringstream in("0\n1 # c\n\n2\n");
  EXPECT_EQ(parse_labels(in), (std::vector<int>{0, 1, 2}));
  std::istringstream neg("0\n-1\n");
  EXPECT_THROW(parse_labels(neg), ParseError);
  std::istringstream two("0 1\n");
  EXPECT_THROW(parse_labels(two), ParseError);
}
