#include "fairml/metrics.hpp"

#include "builders.hpp"
#include "fairml/rng.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fairml;
using builders::vec;

namespace {

// both values NaN, or exactly equal
bool same(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

}  // namespace

TEST_CASE("confusion_counts tallies the four cells") {
  const Vector y = vec({1, 1, -1, -1, 1});
  const Vector p = vec({1, -1, 1, -1, 1});
  const ConfusionCounts c = confusion_counts(y, p);
  REQUIRE(c.tp == 2);
  REQUIRE(c.fn == 1);
  REQUIRE(c.fp == 1);
  REQUIRE(c.tn == 1);
  REQUIRE(c.total() == 5);
}

TEST_CASE("confusion_counts splits per sensitive category when asked") {
  const Vector y = vec({1, 1, -1, -1});
  const Vector p = vec({1, -1, 1, -1});
  const Vector s = vec({0, 1, 0, 1});
  const ConfusionCounts c = confusion_counts(y, p, &s);
  REQUIRE(c.by_s0->tp == 1);
  REQUIRE(c.by_s0->fp == 1);
  REQUIRE(c.by_s1->fn == 1);
  REQUIRE(c.by_s1->tn == 1);
}

TEST_CASE("final_metrics computes the headline rates") {
  const Vector y = vec({1, 1, 1, -1, -1});
  const Vector p = vec({1, 1, -1, 1, -1});
  const MetricsBundle m = final_metrics(y, p);
  REQUIRE(m.accuracy == 0.6);
  REQUIRE(m.fnr == Catch::Approx(1.0 / 3.0));
  REQUIRE(m.tpr == Catch::Approx(2.0 / 3.0));
  REQUIRE(m.fpr == 0.5);
  REQUIRE(m.tnr == 0.5);
  REQUIRE(m.recall == m.tpr);
}

TEST_CASE("rates with empty denominators are undefined, not zero") {
  const Vector y = vec({1, 1});
  const Vector p = vec({1, -1});
  const MetricsBundle m = final_metrics(y, p);
  REQUIRE(std::isnan(m.fpr));
  REQUIRE(std::isnan(m.tnr));
  REQUIRE(m.fnr == 0.5);
  REQUIRE(m.accuracy == 0.5);
}

TEST_CASE("disparate_impact is symmetric in the category ratio") {
  // s=0: 2/3 positive, s=1: 1/3 positive -> di = 2, measure 1 - 1/2
  const Dataset d = builders::tiny({1, 2, 3, 4, 5, 6}, {0, 0, 0, 1, 1, 1});
  const Vector p1 = vec({1, 1, -1, 1, -1, -1});
  REQUIRE(disparate_impact(d, p1, "s") == Catch::Approx(0.5));
  // swapping the group rates gives the same measure
  const Vector p2 = vec({1, -1, -1, 1, 1, -1});
  REQUIRE(disparate_impact(d, p2, "s") == Catch::Approx(0.5));
}

TEST_CASE("disparate_impact zero-positive conventions") {
  const Dataset d = builders::tiny({1, 2, 3, 4}, {0, 0, 1, 1});
  REQUIRE(disparate_impact(d, vec({-1, -1, -1, -1}), "s") == 0.0);
  REQUIRE(disparate_impact(d, vec({1, -1, -1, -1}), "s") == 1.0);
  REQUIRE(disparate_impact(d, vec({-1, -1, 1, -1}), "s") == 1.0);
}

TEST_CASE("disparate_impact requires both categories present") {
  const Dataset d = builders::tiny({1, 2}, {0, 0});
  REQUIRE_THROWS_AS(disparate_impact(d, vec({1, -1}), "s"), std::invalid_argument);
}

TEST_CASE("rate_gap matches hand-computed gaps and names empty sets") {
  const Dataset d =
      builders::tiny({1, 2, 3, 4, 5, 6}, {0, 0, 0, 1, 1, 1}, {1, -1, -1, 1, 1, -1});
  const Vector p = vec({1, 1, -1, -1, 1, -1});
  // s=0: FPR 1/2, FNR 0; s=1: FPR 0, FNR 1/2
  REQUIRE(rate_gap(d, *d.labels, p, "s", RateKind::FPR) == Catch::Approx(0.5));
  REQUIRE(rate_gap(d, *d.labels, p, "s", RateKind::FNR) == Catch::Approx(0.5));
  REQUIRE(rate_gap(d, *d.labels, p, "s", RateKind::TPR) == Catch::Approx(0.5));
  REQUIRE(disparate_mistreatment(d, *d.labels, p, "s") == Catch::Approx(0.5));

  const Dataset no_pos0 = builders::tiny({1, 2, 3}, {0, 1, 1}, {-1, 1, -1});
  REQUIRE_THROWS_WITH(rate_gap(no_pos0, *no_pos0.labels, vec({1, 1, 1}), "s", RateKind::FNR),
                      Catch::Matchers::ContainsSubstring("positive-label rows"));
}

TEST_CASE("metrics match the naive oracle on random instances") {
  Rng rng(7001);
  for (int instance = 0; instance < 200; ++instance) {
    const auto n = static_cast<Eigen::Index>(4 + rng.below(40));
    std::vector<double> yv, pv, sv;
    for (Eigen::Index i = 0; i < n; ++i) {
      yv.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
      pv.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
      sv.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    }
    // ensure both categories appear so the library functions are defined
    sv[0] = 0.0;
    sv[1] = 1.0;

    Dataset d;
    d.features.resize(n, 2);
    d.features.col(0) = Vector::Ones(n);
    d.features.col(1) = vec(sv);
    d.feature_names = {"intercept", "s"};
    d.sensitive.emplace("s", vec(sv));
    d.labels = vec(yv);
    const Vector p = vec(pv);

    const MetricsBundle m = final_metrics(*d.labels, p);
    const oracle::Counts oc = oracle::count(yv, pv);
    REQUIRE(m.counts.tp == oc.tp);
    REQUIRE(m.counts.tn == oc.tn);
    REQUIRE(m.counts.fp == oc.fp);
    REQUIRE(m.counts.fn == oc.fn);
    REQUIRE(same(m.accuracy, oracle::accuracy(oc)));
    REQUIRE(same(m.fpr, oracle::fpr(oc)));
    REQUIRE(same(m.fnr, oracle::fnr(oc)));
    REQUIRE(same(m.tpr, oracle::tpr(oc)));
    REQUIRE(same(m.tnr, oracle::tnr(oc)));

    REQUIRE(same(disparate_impact(d, p, "s"), oracle::disparate_impact(sv, pv)));
    for (auto [kind, okind] : {std::pair{RateKind::FPR, oracle::Rate::FPR},
                               std::pair{RateKind::FNR, oracle::Rate::FNR},
                               std::pair{RateKind::TPR, oracle::Rate::TPR},
                               std::pair{RateKind::TNR, oracle::Rate::TNR}}) {
      double lib = oracle::undefined;
      bool lib_defined = true;
      try {
        lib = rate_gap(d, *d.labels, p, "s", kind);
      } catch (const std::invalid_argument&) {
        lib_defined = false;
      }
      const double ref = oracle::rate_gap(okind, yv, pv, sv);
      if (std::isnan(ref)) {
        REQUIRE_FALSE(lib_defined);
      } else {
        REQUIRE(lib_defined);
        REQUIRE(lib == ref);
      }
    }
  }
}

TEST_CASE("fairness metric names parse and print consistently") {
  for (FairnessMetric m :
       {FairnessMetric::DisparateImpact, FairnessMetric::DisparateMistreatment,
        FairnessMetric::FprGap, FairnessMetric::FnrGap})
    REQUIRE(parse_fairness_metric(fairness_metric_name(m)) == m);
  REQUIRE_THROWS_AS(parse_fairness_metric("nope"), std::invalid_argument);
}
