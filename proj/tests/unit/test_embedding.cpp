#include <doctest.h>

#include <cmath>

#include "macroregime/embedding.hpp"
#include "macroregime/partition.hpp"
#include "test_support.hpp"

using namespace macroregime;

TEST_SUITE("embedding") {

TEST_CASE("points on a line need one axis") {
  Eigen::MatrixXd x(6, 3);
  for (int i = 0; i < 6; ++i) x.row(i) << i, 2 * i + 1, -i;
  const auto e = pca_embed(x, PcaRequest::count(1));
  CHECK(e.dims == 1);
  CHECK(e.explained_variance == doctest::Approx(1.0).epsilon(1e-12));
  const auto v = pca_embed(x, PcaRequest::variance(0.99));
  CHECK(v.dims == 1);
}

TEST_CASE("full rank reconstruction is exact") {
  testing::Rng rng(1);
  const auto x = testing::normal_matrix(rng, 12, 5);
  const auto e = pca_embed(x, PcaRequest::count(5));
  const Eigen::MatrixXd back = (e.points * e.axes.transpose()).rowwise() + e.mean;
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(e.explained_variance == doctest::Approx(1.0));
  CHECK((e.axes.transpose() * e.axes - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("explained ratios are sorted and sum to one") {
  testing::Rng rng(2);
  const auto e = pca_embed(testing::normal_matrix(rng, 30, 8), PcaRequest::count(3));
  CHECK(e.explained_ratio.sum() == doctest::Approx(1.0));
  for (Eigen::Index i = 1; i < e.explained_ratio.size(); ++i)
    CHECK(e.explained_ratio(i - 1) >= e.explained_ratio(i));
  CHECK(e.explained_variance == doctest::Approx(e.explained_ratio.head(3).sum()));
}

TEST_CASE("variance target picks the smallest sufficient dimension") {
  testing::Rng rng(3);
  Eigen::MatrixXd x = testing::normal_matrix(rng, 40, 6);
  x.col(0) *= 10.0;
  x.col(1) *= 5.0;
  for (double target : {0.5, 0.8, 0.95, 1.0}) {
    const auto e = pca_embed(x, PcaRequest::variance(target));
    CHECK(e.explained_variance >= target - 1e-12);
    if (e.dims > 1) CHECK(e.explained_ratio.head(static_cast<Eigen::Index>(e.dims) - 1).sum() < target);
  }
}

TEST_CASE("axis sign makes the largest loading positive") {
  testing::Rng rng(4);
  const auto e = pca_embed(testing::normal_matrix(rng, 20, 4), PcaRequest::count(4));
  for (Eigen::Index c = 0; c < e.axes.cols(); ++c) {
    Eigen::Index arg = 0;
    e.axes.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(e.axes(arg, c) > 0.0);
  }
}

TEST_CASE("requested dims above rank are clamped with a warning") {
  Eigen::MatrixXd x(5, 4);
  for (int i = 0; i < 5; ++i) x.row(i) << i, i * i, 2 * i, 3 * i * i;
  Diagnostics d;
  const auto e = pca_embed(x, PcaRequest::count(4), &d);
  CHECK(e.dims == 2);
  CHECK_FALSE(d.empty());
}

TEST_CASE("pca preconditions") {
  CHECK_THROWS_AS(pca_embed(Eigen::MatrixXd::Ones(1, 3), PcaRequest::count(1)), PreconditionError);
  CHECK_THROWS_AS(pca_embed(Eigen::MatrixXd::Ones(4, 3), PcaRequest::count(1)), PreconditionError);
  CHECK_THROWS_AS(pca_embed(Eigen::MatrixXd::Random(4, 3), PcaRequest{}), PreconditionError);
}

TEST_CASE("kmeans separates two blobs") {
  testing::Rng rng(5);
  Eigen::MatrixXd x = 0.1 * testing::normal_matrix(rng, 40, 2);
  std::vector<int> truth(40);
  for (int i = 0; i < 40; ++i) {
    truth[static_cast<std::size_t>(i)] = i % 2;
    if (i % 2) x.row(i).array() += 5.0;
  }
  const auto r = kmeans(x, 2, {.seed = 9});
  CHECK(adjusted_rand_index(r.labels, truth) == 1.0);
  CHECK(r.labels.front() == 0);
  CHECK(r.centroids(1, 0) > 4.0);
}

TEST_CASE("inertia with one cluster per point is zero") {
  testing::Rng rng(6);
  const auto x = testing::normal_matrix(rng, 9, 3);
  CHECK(kmeans(x, 9).inertia == doctest::Approx(0.0));
  CHECK(kmeans(x, 1).inertia == doctest::Approx(total_inertia(x)));
}

TEST_CASE("kmeans is deterministic for a seed and labels are canonical") {
  testing::Rng rng(7);
  const auto x = testing::normal_matrix(rng, 60, 3);
  const auto a = kmeans(x, 4, {.seed = 3});
  const auto b = kmeans(x, 4, {.seed = 3});
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  CHECK(a.labels == relabel_by_first_occurrence(a.labels));
  // inertia equals the sum of squared distances to the reported centroids
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    inertia += (x.row(i) - a.centroids.row(a.labels[static_cast<std::size_t>(i)])).squaredNorm();
  CHECK(inertia == doctest::Approx(a.inertia));
}

TEST_CASE("more restarts never raise the best inertia") {
  testing::Rng rng(8);
  const auto x = testing::normal_matrix(rng, 80, 2);
  const auto one = kmeans(x, 5, {.seed = 1, .restarts = 1});
  const auto ten = kmeans(x, 5, {.seed = 1, .restarts = 10});
  CHECK(ten.inertia <= one.inertia + 1e-12);
}

TEST_CASE("kmeans handles duplicate points and rejects bad k") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 2);
  x.row(5) << 1, 1;
  const auto r = kmeans(x, 3);
  CHECK(r.labels.size() == 6);
  CHECK(*std::max_element(r.labels.begin(), r.labels.end()) <= 2);
  CHECK_THROWS_AS(kmeans(x, 0), PreconditionError);
  CHECK_THROWS_AS(kmeans(x, 7), PreconditionError);
}

TEST_CASE("relabel by first occurrence") {
  CHECK(relabel_by_first_occurrence(std::vector<int>{5, 5, 2, 9, 2}) == std::vector<int>{0, 0, 1, 2, 1});
}

}  // TEST_SUITE
