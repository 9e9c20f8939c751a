#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "idca/errors.hpp"
#include "idca/metrics.hpp"

using namespace idca;

namespace {

// The fully substituted four-term expression, written out in TP/FP/FN rates
// with natural logs and converted at the end.
std::optional<double> cid_expanded(double b, double fp, double fn, double base = 2.0) {
  const double tp = 1.0 - fn;
  const double nb = 1.0 - b;
  const double ppv = (b * tp) / (b * tp + nb * fp);
  const double npv = (nb * (1 - fp)) / (nb * (1 - fp) + b * fn);
  auto term = [](double coef, double x) -> std::optional<double> {
    if (coef == 0.0) return 0.0;
    if (!(x > 0.0)) return std::nullopt;
    return coef * std::log(x);
  };
  const std::optional<double> t[] = {term(b * (1 - fn), ppv), term(b * (1 - fn), 1 - npv),
                                     term(nb * (1 - fp), npv), term(nb * fp, 1 - ppv)};
  double s = 0.0;
  for (const auto& x : t) {
    if (!x || !std::isfinite(*x)) return std::nullopt;
    s -= *x;
  }
  return s / std::log(base);
}

ConfusionCounts counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) { return {tp, fp, tn, fn}; }

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<int> truth{1, 1, 1, 0, 0};
  EXPECT_EQ(confusion(truth, truth), counts(3, 0, 2, 0));
  const std::vector<int> inverted{0, 0, 0, 1, 1};
  EXPECT_EQ(confusion(inverted, truth), counts(0, 2, 0, 3));
  EXPECT_EQ(confusion(std::vector<int>{}, std::vector<int>{}), counts(0, 0, 0, 0));
  EXPECT_THROW(confusion(std::vector<int>{1}, truth), DataError);
  EXPECT_THROW(confusion(std::vector<int>{2}, std::vector<int>{1}), DataError);
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{-1}), DataError);
}

TEST(BasicRates, Examples) {
  const auto r = basic_rates(counts(9, 2, 8, 1));
  EXPECT_DOUBLE_EQ(*r.dr, 90.0);
  EXPECT_DOUBLE_EQ(*r.fnr, 10.0);
  EXPECT_DOUBLE_EQ(*r.fpr, 20.0);
  EXPECT_DOUBLE_EQ(*r.acc, 85.0);
  const auto perfect = basic_rates(counts(4, 0, 6, 0));
  EXPECT_DOUBLE_EQ(*perfect.dr, 100.0);
  EXPECT_DOUBLE_EQ(*perfect.fpr, 0.0);
  const auto no_attacks = basic_rates(counts(0, 1, 5, 0));
  EXPECT_FALSE(no_attacks.dr);
  EXPECT_FALSE(no_attacks.fnr);
  EXPECT_TRUE(no_attacks.fpr);
  EXPECT_FALSE(basic_rates(counts(0, 0, 0, 0)).acc);
}

TEST(BasicRates, DetectionPlusMissIsHundred) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> u(0, 500);
  for (int t = 0; t < 1000; ++t) {
    const auto c = counts(u(gen), u(gen), u(gen), 1 + u(gen));
    const auto r = basic_rates(c);
    EXPECT_NEAR(*r.dr + *r.fnr, 100.0, 1e-9);
  }
}

TEST(CorrelationCoefficient, Examples) {
  EXPECT_DOUBLE_EQ(*correlation_coefficient(counts(5, 0, 5, 0)), 1.0);
  EXPECT_DOUBLE_EQ(*correlation_coefficient(counts(0, 5, 0, 5)), -1.0);
  EXPECT_NEAR(*correlation_coefficient(counts(9, 2, 8, 1)), 0.70, 0.01);
  // Direct substitution: (72 - 2) / sqrt(10 * 11 * 10 * 9).
  EXPECT_NEAR(*correlation_coefficient(counts(9, 2, 8, 1)), 70.0 / std::sqrt(9900.0), 1e-12);
  EXPECT_FALSE(correlation_coefficient(counts(5, 5, 0, 0)));
}

TEST(CorrelationCoefficient, BoundedAndOneOnlyWhenPerfect) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<std::size_t> u(0, 30);
  for (int t = 0; t < 2000; ++t) {
    const auto c = counts(u(gen), u(gen), u(gen), u(gen));
    const auto cc = correlation_coefficient(c);
    if (!cc) continue;
    EXPECT_GE(*cc, -1.0);
    EXPECT_LE(*cc, 1.0);
    EXPECT_EQ(*cc == 1.0, c.fp == 0 && c.fn == 0) << c.tp << ' ' << c.fp << ' ' << c.tn << ' ' << c.fn;
  }
}

TEST(PpvNpv, Examples) {
  EXPECT_DOUBLE_EQ(*ppv_npv({1e-5, 0.0, 0.2}).ppv, 1.0);
  EXPECT_DOUBLE_EQ(*ppv_npv({1e-5, 0.3, 0.0}).npv, 1.0);
  EXPECT_FALSE(ppv_npv({1e-5, 0.0, 1.0}).ppv);
  EXPECT_THROW(ppv_npv({0.0, 0.1, 0.1}), ConfigError);
  EXPECT_THROW(ppv_npv({1e-5, 1.5, 0.1}), ConfigError);
}

TEST(PpvNpv, SubstitutionOracle) {
  const double b = 1e-5, tp = 0.947, fp = 0.166, fn = 0.053;
  const auto pv = ppv_npv({b, fp, fn});
  EXPECT_NEAR(*pv.ppv, b * tp / (b * tp + (1 - b) * fp), 1e-15);
  EXPECT_NEAR(*pv.npv, (1 - b) * (1 - fp) / ((1 - b) * (1 - fp) + b * fn), 1e-15);
  EXPECT_NEAR(*pv.ppv, 5.7049e-5, 1e-8);
}

TEST(Cid, PerfectClassifierUndefinedLikeOracle) {
  // 1 - NPV = 0 under a nonzero coefficient: both forms diverge.
  EXPECT_FALSE(cid({1e-5, 0.0, 0.0}));
  EXPECT_FALSE(cid_expanded(1e-5, 0.0, 0.0));
}

TEST(Cid, MatchesExpandedFormOnGrid) {
  for (int i = 1; i <= 10; ++i) {
    for (int j = 1; j <= 10; ++j) {
      const double fp = i / 11.0, fn = j / 11.0;
      const auto a = cid({1e-5, fp, fn});
      const auto b = cid_expanded(1e-5, fp, fn);
      ASSERT_TRUE(a && b);
      EXPECT_NEAR(*a, *b, 1e-9);
    }
  }
}

TEST(Cid, EqualRatesAgree) {
  for (double r : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9}) {
    EXPECT_NEAR(*cid({1e-5, r, r}), *cid_expanded(1e-5, r, r), 1e-9);
    EXPECT_NEAR(*cid({1e-5, r, r}, 10.0), *cid_expanded(1e-5, r, r, 10.0), 1e-9);
  }
}

TEST(Cid, RandomClassifierBelowBetterOnes) {
  const double random = *cid({1e-5, 0.5, 0.5});
  for (int i = 1; i < 10; ++i) {
    for (int j = 1; j < 10; ++j) EXPECT_GT(*cid({1e-5, i * 0.05, j * 0.05}), random) << i << ' ' << j;
  }
}

TEST(Cid, NonIncreasingInMissRate) {
  for (int i = 1; i <= 10; ++i) {
    double prev = *cid({1e-5, i / 11.0, 1.0 / 11.0});
    for (int j = 2; j <= 10; ++j) {
      const double cur = *cid({1e-5, i / 11.0, j / 11.0});
      EXPECT_LE(cur, prev + 1e-15);
      prev = cur;
    }
  }
}

// Characterization: with FN fixed, CID rises as FP moves from 0.05 towards
// 0.5, so the expression rewards false positives in that range.
TEST(Cid, FalsePositiveDirection) {
  EXPECT_LT(*cid({1e-5, 0.05, 0.05}), *cid({1e-5, 0.15, 0.05}));
}

TEST(Cid, ZeroCoefficientTermsVanish) {
  // FP = 0 zeroes the last coefficient while 1 - PPV = 0.
  const auto no_fp = cid({1e-5, 0.0, 0.2});
  ASSERT_TRUE(no_fp);
  EXPECT_NEAR(*no_fp, *cid_expanded(1e-5, 0.0, 0.2), 1e-12);
  // FN = 0 with FP > 0 leaves 1 - NPV = 0 under a nonzero coefficient.
  EXPECT_FALSE(cid({1e-5, 0.2, 0.0}));
  const auto fp_only = cid({1e-5, 0.2, 1.0});
  // FN = 1 zeroes both B(1 - FN) terms.
  ASSERT_TRUE(fp_only);
  EXPECT_NEAR(*fp_only, *cid_expanded(1e-5, 0.2, 1.0), 1e-12);
  EXPECT_THROW(cid({1e-5, 0.1, 0.1}, 1.0), ConfigError);
}

TEST(Evaluate, ReportAndSerialization) {
  const std::vector<int> truth{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  std::vector<int> pred = truth;
  pred[0] = 0;   // one miss
  pred[10] = 1;  // two false alarms
  pred[11] = 1;
  const auto r = evaluate(pred, truth, 1e-5, 2.0, "improved");
  EXPECT_EQ(r.counts, counts(9, 2, 8, 1));
  EXPECT_NEAR(*r.cc, 0.7035, 1e-4);
  EXPECT_TRUE(r.cid);
  const auto j = to_json(r);
  EXPECT_EQ(j["algorithm"], "improved");
  EXPECT_EQ(j["tp"], 9);
  EXPECT_DOUBLE_EQ(j["acc"].get<double>(), 85.0);
  EXPECT_EQ(std::string(report_csv_header).substr(0, 12), "algorithm,n,");
  EXPECT_EQ(report_csv_row(r).substr(0, 19), "improved,20,9,2,8,1");

  const std::vector<int> normals(5, 0);
  const auto u = evaluate(normals, normals);
  EXPECT_EQ(to_json(u)["dr"], "undefined");
  EXPECT_EQ(to_json(u)["cid"], "undefined");
  EXPECT_NE(report_csv_row(u).find("undefined"), std::string::npos);
  EXPECT_THROW(evaluate(normals, normals, 0.0), ConfigError);
}
