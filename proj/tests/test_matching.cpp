#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dcl/matching.hpp"
#include "dcl/serialize.hpp"
#include "support.hpp"

using namespace dcl;
using namespace testing_support;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

std::string message_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

ViewPairBatch shaped(std::size_t n, std::size_t hw) {
  std::mt19937_64 rng(n * 1000 + hw);
  return random_batch(rng, n, 1, hw, 3);
}

Vector uniform(Eigen::Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

Matrix random_cost(std::mt19937_64 &rng, std::size_t rows, std::size_t cols) {
  const Matrix a = unit_columns(gaussian(rng, 8, rows));
  const Matrix b = unit_columns(gaussian(rng, 8, cols));
  return (1.0 - (a.transpose() * b).array()).matrix();
}

} // namespace

TEST_CASE("index-wise negative counts") {
  CHECK(index_wise_pairs(shaped(1, 4)).negatives_per_anchor() == 3);
  CHECK(index_wise_pairs(shaped(2, 49)).negatives_per_anchor() == 146);
  for (std::size_t n : {2, 4, 8})
    for (std::size_t hw : {4, 16, 49, 64})
      CHECK(index_wise_pairs(shaped(n, hw)).negatives_per_anchor() == (hw - 1) + (n - 1) * 2 * hw);
  PairAssignment big;
  big.instances = 128;
  big.positions = 49;
  CHECK(big.cross_instance_pool() == 12446);
}

TEST_CASE("index-wise pairs are the identity on positions") {
  const PairAssignment p = index_wise_pairs(shaped(3, 5));
  CHECK(p.positives.size() == 15);
  CHECK(p.symmetric);
  for (const auto &pp : p.positives)
    CHECK(pp.anchor == pp.matched);
}

TEST_CASE("cosine argmax recovers identical and permuted views") {
  std::mt19937_64 rng(40);
  const Matrix a = unit_columns(gaussian(rng, 6, 9));
  std::vector<Eigen::Index> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix b(6, 9);
  for (Eigen::Index q = 0; q < 9; ++q)
    b.col(perm[q]) = a.col(q);
  const ViewPairBatch same(std::vector<ViewPair>{{make_map(3, 3, a, true), make_map(3, 3, a, true)}});
  const PairAssignment s = cosine_argmax_pairs(same);
  for (const auto &pp : s.positives)
    CHECK(pp.matched == pp.anchor);
  const ViewPairBatch shuffled(
      std::vector<ViewPair>{{make_map(3, 3, a, true), make_map(3, 3, b, true)}});
  const PairAssignment m = cosine_argmax_pairs(shuffled);
  for (const auto &pp : m.positives)
    CHECK(pp.matched == perm[pp.anchor]);
  CHECK_FALSE(m.symmetric);
  CHECK_FALSE(m.policy.same_pair_other_view);
  CHECK(m.negatives_per_anchor() == 0);
}

TEST_CASE("cosine argmax breaks ties toward the lowest index") {
  const Matrix ones = Matrix::Constant(3, 4, 1.0 / std::sqrt(3.0));
  const ViewPairBatch b(std::vector<ViewPair>{{make_map(2, 2, ones, true), make_map(2, 2, ones, true)}});
  for (const auto &pp : cosine_argmax_pairs(b).positives)
    CHECK(pp.matched == 0);
}

TEST_CASE("cost map examples") {
  const Matrix a{{1.0, 0.0}, {0.0, 1.0}};
  const Matrix b{{1.0, 0.0, -1.0}, {0.0, 1.0, 0.0}};
  const Matrix c = cost_map(make_map(1, 2, a, true), make_map(1, 3, b, true));
  const Matrix expected{{0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}};
  CHECK((c - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("sinkhorn small cases") {
  const TransportPlan one = sinkhorn_plan(Matrix::Constant(1, 1, 0.7), SinkhornOptions{});
  CHECK(one.plan(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const Matrix cost{{0.0, 1.0}, {1.0, 0.0}};
  SinkhornOptions opts;
  opts.reg = 0.1;
  opts.iterations = 200;
  const TransportPlan two = sinkhorn_plan(cost, opts);
  const double diag = 0.5 / (1.0 + std::exp(-10.0));
  CHECK(two.plan(0, 0) == doctest::Approx(diag).epsilon(1e-12));
  CHECK(two.plan(1, 1) == doctest::Approx(diag).epsilon(1e-12));
  CHECK(two.plan(0, 1) == doctest::Approx(0.5 - diag).epsilon(1e-9));
  CHECK(ot_distance(two) == doctest::Approx(2.0 * (0.5 - diag)).epsilon(1e-9));
  CHECK(two.ot_lambda == doctest::Approx(10.0));
}

TEST_CASE("sinkhorn matches row and column rescaling") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 10; ++k) {
    const Matrix cost = random_cost(rng, 5, 5);
    Vector r = (Vector::Random(5).array() + 2.0).matrix();
    Vector c = (Vector::Random(5).array() + 2.0).matrix();
    r /= r.sum();
    c /= c.sum();
    for (int iters : {1, 3, 10}) {
      const TransportPlan p = sinkhorn_plan(cost, 0.1, static_cast<std::size_t>(iters), r, c);
      const Matrix o = sinkhorn_oracle(cost, r, c, 0.1, iters);
      CHECK((p.plan - o).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("sinkhorn converged plans satisfy the marginals") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 5; ++k) {
    const Matrix cost = random_cost(rng, 7, 6);
    SinkhornOptions opts;
    opts.reg = 0.2;
    opts.iterations = 10000;
    opts.tolerance = 1e-12;
    const TransportPlan p = sinkhorn_plan(cost, opts);
    CHECK(p.marginal_residual <= 1e-12);
    CHECK(p.iterations_run < 10000);
    CHECK(p.residual_history.size() == p.iterations_run);
    CHECK((p.plan.rowwise().sum() - uniform(7)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((p.plan.colwise().sum().transpose() - uniform(6)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(p.plan.minCoeff() > 0.0);
  }
}

TEST_CASE("sinkhorn residual shrinks with iterations") {
  std::mt19937_64 rng(43);
  const Matrix cost = random_cost(rng, 7, 7);
  SinkhornOptions opts;
  opts.iterations = 40;
  const TransportPlan p = sinkhorn_plan(cost, opts);
  CHECK(p.residual_history.size() == 40);
  CHECK(p.residual_history.back() < p.residual_history.front());
  CHECK(p.residual_history[39] <= p.residual_history[9]);
  const TransportPlan ten = sinkhorn_plan(random_cost(rng, 49, 49), SinkhornOptions{});
  CHECK(ten.iterations_run == 10);
  CHECK(ten.marginal_residual < 1e-2);
}

TEST_CASE("sinkhorn rejects bad inputs") {
  const Matrix cost = Matrix::Constant(3, 3, 0.5);
  SinkhornOptions opts;
  Matrix neg = cost;
  neg(1, 2) = -0.1;
  CHECK(code_of([&] { sinkhorn_plan(neg, opts); }) == ErrorCode::InvalidInput);
  Matrix nan = cost;
  nan(0, 0) = std::nan("");
  CHECK(code_of([&] { sinkhorn_plan(nan, opts); }) == ErrorCode::InvalidInput);
  opts.reg = 0.0;
  CHECK(code_of([&] { sinkhorn_plan(cost, opts); }) == ErrorCode::InvalidParameter);
  opts.reg = -1.0;
  CHECK(code_of([&] { sinkhorn_plan(cost, opts); }) == ErrorCode::InvalidParameter);
  const Vector r = uniform(3);
  const Vector c = Vector::Constant(3, 0.5);
  CHECK(code_of([&] { sinkhorn_plan(cost, 0.1, 10, r, c); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { sinkhorn_plan(cost, 0.1, 0, r, r); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("sinkhorn names the row whose kernel underflows") {
  Matrix cost = Matrix::Zero(3, 3);
  cost.row(1).setConstant(2.0);
  cost(0, 0) = 0.0;
  SinkhornOptions opts;
  opts.reg = 1e-4;
  const std::string msg = message_of([&] { sinkhorn_plan(cost, opts); });
  CHECK(code_of([&] { sinkhorn_plan(cost, opts); }) == ErrorCode::NumericalDegeneracy);
  CHECK(msg.find("row 1") != std::string::npos);
}

TEST_CASE("ot distance examples") {
  const Matrix zero = Matrix::Zero(4, 4);
  CHECK(ot_distance(sinkhorn_plan(zero, SinkhornOptions{})) == 0.0);
  const Matrix two = Matrix::Constant(3, 3, 2.0);
  CHECK(ot_distance(sinkhorn_plan(two, SinkhornOptions{})) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a sharp plan concentrates on the cheapest permutation") {
  std::mt19937_64 rng(44);
  for (int k = 0; k < 10; ++k) {
    const Matrix cost = random_cost(rng, 3, 3);
    std::array<int, 3> perm{0, 1, 2}, best{};
    double cheapest = 1e300;
    do {
      const double total = cost(0, perm[0]) + cost(1, perm[1]) + cost(2, perm[2]);
      if (total < cheapest) {
        cheapest = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    SinkhornOptions opts;
    opts.reg = 0.005;
    opts.iterations = 5000;
    opts.tolerance = 1e-12;
    const TransportPlan p = sinkhorn_plan(cost, opts);
    for (Eigen::Index i = 0; i < 3; ++i) {
      Eigen::Index j;
      p.plan.row(i).maxCoeff(&j);
      CHECK(j == best[i]);
    }
  }
}

TEST_CASE("optimal transport pairs take the row maximum of each plan") {
  std::mt19937_64 rng(45);
  const ViewPairBatch b = random_batch(rng, 3, 2, 3, 5, true, 0.3);
  std::vector<TransportPlan> plans;
  const PairAssignment p = optimal_transport_pairs(b, SinkhornOptions{}, &plans);
  CHECK(plans.size() == 3);
  CHECK(p.positives.size() == 18);
  CHECK(p.strategy == MatchingStrategy::OptimalTransport);
  for (const auto &pp : p.positives) {
    const Matrix &plan = plans[pp.instance].plan;
    for (Eigen::Index q = 0; q < plan.cols(); ++q)
      CHECK(plan(pp.anchor, q) <= plan(pp.anchor, pp.matched));
  }
  CHECK(p.negatives_per_anchor() == 2 * 2 * 6);
}

TEST_CASE("pair assignment CSV round trip") {
  std::mt19937_64 rng(46);
  const ViewPairBatch b = random_batch(rng, 2, 2, 2, 4);
  for (const auto &p : {index_wise_pairs(b), cosine_argmax_pairs(b),
                        optimal_transport_pairs(b, SinkhornOptions{})}) {
    const std::string text = p.to_csv();
    const PairAssignment back = PairAssignment::from_csv(text);
    CHECK(back == p);
    CHECK(back.to_csv() == text);
  }
  CHECK(code_of([] { PairAssignment::from_csv("a,b\n1,2\n"); }) == ErrorCode::Parse);
  CHECK(parse_strategy("ot") == MatchingStrategy::OptimalTransport);
  CHECK(code_of([] { parse_strategy("nearest"); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("plans serialize with and without matrices") {
  const TransportPlan p = sinkhorn_plan(Matrix::Constant(2, 2, 0.3), SinkhornOptions{});
  const auto full = to_json(p, true);
  const auto brief = to_json(p, false);
  CHECK(full.contains("plan"));
  CHECK_FALSE(brief.contains("plan"));
  CHECK(full["plan"].size() == 2);
}
