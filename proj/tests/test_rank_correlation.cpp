#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "dcl/rank_correlation.hpp"
#include "dcl/records.hpp"
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

std::vector<double> draw(std::mt19937_64 &rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto &x : v)
    x = levels > 0 ? static_cast<double>(pick(rng)) : g(rng);
  return v;
}

ModelRecord record(const std::string &id, double la, double lu, double acc) {
  ModelRecord r;
  r.id = id;
  r.l_a = la;
  r.l_u = lu;
  r.performance["acc"] = acc;
  return r;
}

} // namespace

TEST_CASE("kendall tau-b examples") {
  const std::vector<double> up{1, 2, 3, 4, 5};
  const std::vector<double> down{5, 4, 3, 2, 1};
  CHECK(kendall_tau_b(up, up).tau == 1.0);
  CHECK(kendall_tau_b(up, down).tau == -1.0);
  const CorrelationReport r = kendall_tau_b(std::vector<double>{1, 2, 2, 3},
                                            std::vector<double>{1, 3, 2, 4});
  CHECK(r.concordant == 5);
  CHECK(r.discordant == 0);
  CHECK(r.ties_x == 1);
  CHECK(r.ties_y == 0);
  CHECK(r.tau == doctest::Approx(5.0 / std::sqrt(30.0)).epsilon(1e-15));
}

TEST_CASE("kendall tau-b equals the pair counter") {
  std::mt19937_64 rng(50);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 2 + rng() % 199;
    const int levels = static_cast<int>(rng() % 4) == 0 ? 0 : 2 + static_cast<int>(rng() % 10);
    const auto x = draw(rng, n, levels), y = draw(rng, n, levels);
    const PairCounts b = brute_kendall(x, y);
    if (std::isnan(b.tau)) {
      CHECK(code_of([&] { kendall_tau_b(x, y); }) == ErrorCode::UndefinedCorrelation);
      continue;
    }
    const CorrelationReport r = kendall_tau_b(x, y);
    CHECK(r.concordant == b.p);
    CHECK(r.discordant == b.q);
    CHECK(r.ties_x == b.t);
    CHECK(r.ties_y == b.u);
    CHECK(r.ties_both == b.both);
    CHECK(r.tau == b.tau);
  }
}

TEST_CASE("kendall tau-b invariances") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 50; ++k) {
    const auto x = draw(rng, 40, 6), y = draw(rng, 40, 0);
    const double tau = kendall_tau_b(x, y).tau;
    std::vector<double> fx(x.size()), ny(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      fx[i] = std::exp(0.3 * x[i]) + 2.0;
      ny[i] = -y[i];
    }
    CHECK(kendall_tau_b(fx, y).tau == tau);
    CHECK(kendall_tau_b(x, ny).tau == -tau);
    CHECK(kendall_tau_b(y, x).tau == tau);
  }
}

TEST_CASE("kendall tau-b rejects degenerate input") {
  const std::vector<double> flat{2, 2, 2};
  const std::vector<double> up{1, 2, 3};
  CHECK(code_of([&] { kendall_tau_b(flat, up); }) == ErrorCode::UndefinedCorrelation);
  CHECK(code_of([&] { kendall_tau_b(std::vector<double>{1}, std::vector<double>{1}); }) ==
        ErrorCode::InvalidInput);
  CHECK(code_of([&] { kendall_tau_b(up, std::vector<double>{1, 2}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { kendall_tau_b(up, std::vector<double>{1, NAN, 2}); }) ==
        ErrorCode::InvalidInput);
}

TEST_CASE("min-max normalization") {
  const auto r = min_max_normalize(std::vector<double>{3, 1, 2, 5});
  CHECK(r.values == std::vector<double>{0.5, 0.0, 0.25, 1.0});
  CHECK_FALSE(r.degenerate);
  const auto flat = min_max_normalize(std::vector<double>{4, 4});
  CHECK(flat.degenerate);
  CHECK(flat.values == std::vector<double>{0.0, 0.0});
  std::mt19937_64 rng(52);
  const auto v = draw(rng, 30, 0);
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    w[k] = 7.0 * v[k] - 3.0;
  const auto a = min_max_normalize(v), b = min_max_normalize(w);
  for (std::size_t k = 0; k < v.size(); ++k)
    CHECK(std::abs(a.values[k] - b.values[k]) <= 1e-14);
}

TEST_CASE("correlate_models sums normalized losses") {
  const std::vector<ModelRecord> recs{record("a", 0.1, -3.0, 60), record("b", 0.2, -2.0, 50),
                                      record("c", 0.3, -1.0, 40)};
  const CorrelationReport r = correlate_models(recs, "acc");
  CHECK(r.tau == -1.0);
  CHECK(r.normalized_x == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(r.normalized_y == std::vector<double>{1.0, 0.5, 0.0});
  CHECK(r.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(r.task == "acc");
  CHECK(r.warnings.empty());

  const std::vector<ModelRecord> two{record("a", 0.1, -3.0, 60), record("b", 0.2, -2.0, 50)};
  CHECK(correlate_models(two, "acc").tau == -1.0);
  CHECK(code_of([&] { correlate_models(std::span(two).first(1), "acc"); }) ==
        ErrorCode::InsufficientInput);
  CHECK(code_of([&] { correlate_models(recs, "ap"); }) == ErrorCode::Schema);

  std::vector<ModelRecord> flat{record("a", 0.1, -3.0, 60), record("b", 0.1, -2.0, 50)};
  const CorrelationReport w = correlate_models(flat, "acc");
  CHECK(w.warnings.size() == 1);
}

TEST_CASE("fixture correlations equal the pair counter") {
  for (const char *file : {"coco_instance_pretraining.csv", "coco_dense_pretraining.csv"})
    for (const char *task : {"acc", "ap"}) {
      const auto recs = load_records(std::string(DCL_FIXTURES) + "/" + file, task);
      const auto t0 = std::chrono::steady_clock::now();
      const CorrelationReport r = correlate_models(recs, task);
      CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
      std::vector<double> la, lu, perf;
      for (const auto &m : recs) {
        la.push_back(m.l_a);
        lu.push_back(m.l_u);
        perf.push_back(m.performance.at(task));
      }
      auto scaled = [](std::vector<double> v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double a = *lo, s = *hi - *lo;
        for (auto &x : v)
          x = (x - a) / s;
        return v;
      };
      const auto sa = scaled(la), su = scaled(lu), sp = scaled(perf);
      std::vector<double> x(sa.size());
      for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = sa[k] + su[k];
      CHECK(r.tau == brute_kendall(x, sp).tau);
      CHECK(r.n == recs.size());
    }
}
