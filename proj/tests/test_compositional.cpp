#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htmmiow/compositional.hpp"
#include "htmmiow/rng.hpp"

using namespace htmmiow;

namespace {

CountMatrix make_counts(const Eigen::MatrixXd& values) {
  CountMatrix counts;
  counts.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    counts.sample_ids.push_back("S" + std::to_string(i + 1));
  }
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    counts.taxa_ids.push_back("T" + std::to_string(j + 1));
  }
  return counts;
}

Eigen::VectorXd random_composition(Rng& rng, int p) {
  Eigen::VectorXd v(p);
  for (int j = 0; j < p; ++j) v[j] = 0.05 + rng.uniform();
  return v / v.sum();
}

}  // namespace

TEST_CASE("pseudocount imputation") {
  Eigen::MatrixXd m(3, 3);
  m << 0, 2, 3, 1, 2, 3, 0, 0, 0;
  CountMatrix out = impute_pseudocount(make_counts(m), 0.5);
  CHECK(out.values(0, 0) == 0.5);
  CHECK(out.values(0, 1) == 2.0);
  CHECK(out.values(0, 2) == 3.0);
  CHECK(out.values.row(1).cwiseEqual(m.row(1)).all());
  CHECK(out.values(2, 0) == 0.5);
  CHECK(out.values(2, 1) == 0.5);
  CHECK(out.values(2, 2) == 0.5);

  CHECK_THROWS_AS(impute_pseudocount(make_counts(m), 0.0), InvalidArgument);
  CHECK_THROWS_AS(impute_pseudocount(make_counts(m), -1.0), InvalidArgument);
}

TEST_CASE("closure") {
  Eigen::MatrixXd uniform(1, 4);
  uniform << 1, 1, 1, 1;
  CHECK(close_composition(uniform).values.isApproxToConstant(0.25));

  Eigen::MatrixXd two(1, 2);
  two << 2, 4;
  CompositionMatrix c = close_composition(two);
  CHECK(c.values(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(c.values(0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-14));

  Eigen::MatrixXd bad(1, 2);
  bad << 1, 0;
  CHECK_THROWS_AS(close_composition(bad), DataError);
}

TEST_CASE("closure scale invariance and idempotence") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd x(1, 5);
    for (int j = 0; j < 5; ++j) x(0, j) = 0.1 + rng.uniform() * 9;
    double k = 0.01 + rng.uniform() * 100;
    Eigen::MatrixXd closed = close_composition(x).values;
    CHECK((close_composition(k * x).values - closed).cwiseAbs().maxCoeff() < 1e-14);
    // idempotence is exact
    CHECK(close_composition(closed).values.cwiseEqual(closed).all());
  }
}

TEST_CASE("geometric mean") {
  Eigen::VectorXd ones(2);
  ones << 1, 1;
  CHECK(geometric_mean(ones) == doctest::Approx(1.0));

  Eigen::VectorXd v(2);
  v << 1, 4;
  CHECK(geometric_mean(v) == doctest::Approx(2.0));

  Eigen::VectorXd e(2);
  e << std::exp(1.0), std::exp(3.0);
  CHECK(geometric_mean(e) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(geometric_mean(Eigen::VectorXd()), InvalidArgument);
  Eigen::VectorXd neg(2);
  neg << 1, -1;
  CHECK_THROWS_AS(geometric_mean(neg), DataError);
}

TEST_CASE("ilr balance") {
  Eigen::VectorXd row(2);
  row << std::exp(1.0), 1.0;
  CHECK(ilr_balance(row, {0}, {1}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(ilr_balance(row, {0}, {1}) == doctest::Approx(0.7071068).epsilon(1e-6));

  Eigen::VectorXd equal(4);
  equal << 0.25, 0.25, 0.25, 0.25;
  CHECK(ilr_balance(equal, {0, 1}, {2, 3}) == doctest::Approx(0.0));

  // hand-arithmetic oracle: sqrt(1*2/3) * ln(4 / 1)
  Eigen::VectorXd three(3);
  three << 4, 1, 1;
  double expected = std::sqrt(2.0 / 3.0) * std::log(4.0);
  CHECK(ilr_balance(three, {0}, {1, 2}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ilr_balance(three, {0}, {1, 2}) == doctest::Approx(1.1320).epsilon(1e-4));

  CHECK_THROWS_AS(ilr_balance(three, {0}, {0, 1}), InvalidArgument);
  CHECK_THROWS_AS(ilr_balance(three, {}, {1}), InvalidArgument);
}

TEST_CASE("default partition") {
  BalancePartition p2 = default_partition(2);
  REQUIRE(p2.contrasts.size() == 1);
  CHECK(p2.contrasts[0].left == std::vector<int>{0});
  CHECK(p2.contrasts[0].right == std::vector<int>{1});

  BalancePartition p3 = default_partition(3);
  REQUIRE(p3.contrasts.size() == 2);
  CHECK(p3.contrasts[0].left == std::vector<int>{0});
  CHECK(p3.contrasts[0].right == std::vector<int>{1, 2});
  CHECK(p3.contrasts[1].left == std::vector<int>{1});
  CHECK(p3.contrasts[1].right == std::vector<int>{2});

  BalancePartition p5 = default_partition(5);
  CHECK(p5.contrasts.size() == 4);
  for (std::size_t k = 0; k < p5.contrasts.size(); ++k) {
    CHECK(p5.contrasts[k].left.size() == 1);
    CHECK(p5.contrasts[k].right.size() == 4 - k);
  }
  CHECK_NOTHROW(validate_partition(p5));
  CHECK_THROWS_AS(default_partition(1), InvalidArgument);
}

TEST_CASE("partition validation rejects non-SBP layouts") {
  BalancePartition bad;
  bad.n_parts = 3;
  bad.contrasts = {{{0}, {1}}, {{1}, {2}}};  // first contrast is not a split of {0,1,2}
  CHECK_THROWS_AS(validate_partition(bad), InvalidArgument);

  BalancePartition overlapping;
  overlapping.n_parts = 3;
  overlapping.contrasts = {{{0, 1}, {1, 2}}, {{0}, {1}}};
  CHECK_THROWS_AS(validate_partition(overlapping), InvalidArgument);
}

TEST_CASE("ilr transform basics") {
  Eigen::MatrixXd half(1, 2);
  half << 0.5, 0.5;
  IlrMatrix ilr2 = ilr_transform(close_composition(half), default_partition(2));
  CHECK(ilr2.values(0, 0) == doctest::Approx(0.0));

  Eigen::MatrixXd third(1, 3);
  third << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  IlrMatrix ilr3 = ilr_transform(close_composition(third), default_partition(3));
  CHECK(ilr3.values.cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(ilr_transform(close_composition(third), default_partition(4)), ShapeError);
}

TEST_CASE("isometry: ilr distance equals aitchison distance") {
  Rng rng(11);
  for (int p : {3, 5, 20}) {
    BalancePartition partition = default_partition(p);
    for (int rep = 0; rep < 30; ++rep) {
      Eigen::VectorXd a = random_composition(rng, p);
      Eigen::VectorXd b = random_composition(rng, p);
      Eigen::MatrixXd pair(2, p);
      pair.row(0) = a;
      pair.row(1) = b;
      IlrMatrix ilr = ilr_transform(close_composition(pair), partition);
      double ilr_dist = (ilr.values.row(0) - ilr.values.row(1)).norm();
      CHECK(std::abs(ilr_dist - aitchison_distance(a, b)) <= 1e-9);
    }
  }
}

TEST_CASE("clr transform") {
  Eigen::MatrixXd third(1, 3);
  third << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  CHECK(clr_transform(close_composition(third)).cwiseAbs().maxCoeff() < 1e-14);

  Rng rng(13);
  Eigen::MatrixXd random(20, 6);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) random(i, j) = 0.05 + rng.uniform();
  }
  CompositionMatrix comp = close_composition(random);
  Eigen::MatrixXd clr = clr_transform(comp);
  CHECK(clr.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);

  // direct-formula oracle on one entry
  double g = geometric_mean(comp.values.row(3).transpose());
  CHECK(clr(3, 2) == doctest::Approx(std::log(comp.values(3, 2) / g)).epsilon(1e-12));
}

TEST_CASE("aitchison distance") {
  Eigen::VectorXd a(3), b(3);
  a << 0.2, 0.3, 0.5;
  b << 0.5, 0.3, 0.2;
  CHECK(aitchison_distance(a, a) == doctest::Approx(0.0));
  CHECK(aitchison_distance(a, b) == doctest::Approx(aitchison_distance(b, a)).epsilon(1e-15));
  Eigen::VectorXd c(2);
  c << 0.5, 0.5;
  CHECK_THROWS_AS(aitchison_distance(a, c), ShapeError);
}

TEST_CASE("permutation equivariance of ilr") {
  Rng rng(17);
  const int p = 7;
  Eigen::VectorXd comp = random_composition(rng, p);
  std::vector<int> perm = rng.permutation(p);

  // permuted composition with correspondingly permuted partition indices:
  // inverse[j] is the new position of original taxon j
  std::vector<int> inverse(p);
  Eigen::VectorXd permuted(p);
  for (int j = 0; j < p; ++j) {
    permuted[j] = comp[perm[j]];
    inverse[perm[j]] = j;
  }
  BalancePartition base = default_partition(p);
  BalancePartition mapped = base;
  for (auto& contrast : mapped.contrasts) {
    for (int& j : contrast.left) j = inverse[j];
    for (int& j : contrast.right) j = inverse[j];
  }

  Eigen::MatrixXd m1(1, p), m2(1, p);
  m1.row(0) = comp;
  m2.row(0) = permuted;
  IlrMatrix a = ilr_transform(close_composition(m1), base);
  IlrMatrix b = ilr_transform(close_composition(m2), mapped);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}
