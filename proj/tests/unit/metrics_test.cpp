// Copyright 2026 The DialogueRNN-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "dialoguernn/metrics.hpp"
#include "json.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace drnn {
namespace {

using Labels = std::vector<std::size_t>;

// Confusion-matrix oracle: counts per class, then the textbook formulas.
double weighted_f1_oracle(const Labels& pred, const Labels& truth, std::size_t classes) {
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    total += (tp + fn) * f1;
  }
  return total / static_cast<double>(pred.size());
}

double pearson_two_pass(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::vector<double>> column(const std::vector<double>& v) {
  std::vector<std::vector<double>> out;
  for (double x : v) out.push_back({x});
  return out;
}

Dialogue labelled(const std::string& id, const std::vector<std::pair<std::size_t, std::size_t>>& turns) {
  Dialogue d;
  d.id = id;
  d.speakers = {"A", "B"};
  for (auto [speaker, label] : turns) d.utterances.push_back({speaker, {0.0}, label, std::nullopt, {}});
  return d;
}

// ------------------------------------------------------------ classification

TEST(ClassificationMetrics, PerfectPredictions) {
  const Labels y{0, 1, 2, 2, 1};
  const ClassificationReport r = classification_metrics(y, y, 3);
  for (const ClassMetrics& m : r.per_class) EXPECT_EQ(*m.f1, 1.0);
  EXPECT_EQ(r.weighted_f1, 1.0);
  EXPECT_EQ(r.weighted_accuracy, 1.0);
}

TEST(ClassificationMetrics, AllOneClassExample) {
  const Labels truth{0, 0, 0, 1}, pred{0, 0, 0, 0};
  const ClassificationReport r = classification_metrics(pred, truth, 2);
  EXPECT_NEAR(*r.per_class[0].f1, 6.0 / 7.0, 1e-15);
  EXPECT_EQ(*r.per_class[1].f1, 0.0);
  EXPECT_NEAR(r.weighted_f1, (3 * 6.0 / 7.0) / 4.0, 1e-15);
  EXPECT_NEAR(r.weighted_f1, 0.6429, 5e-5);
  EXPECT_EQ(r.confusion, (std::vector<std::vector<std::size_t>>{{3, 0}, {1, 0}}));
  EXPECT_FALSE(r.per_class[1].precision.has_value());
  EXPECT_EQ(*r.per_class[1].accuracy, 0.0);
}

TEST(ClassificationMetrics, AbsentClassHasUndefinedF1AndZeroWeight) {
  const Labels truth{0, 1, 1}, pred{0, 1, 0};
  const ClassificationReport three = classification_metrics(pred, truth, 3);
  EXPECT_FALSE(three.per_class[2].f1.has_value());
  EXPECT_EQ(three.weighted_f1, classification_metrics(pred, truth, 2).weighted_f1);
}

TEST(ClassificationMetrics, RejectsBadInput) {
  EXPECT_THROW(classification_metrics(Labels{0, 2}, Labels{0, 1}, 2), std::invalid_argument);
  EXPECT_THROW(classification_metrics(Labels{0}, Labels{0, 1}, 2), std::invalid_argument);
  EXPECT_THROW(classification_metrics(Labels{}, Labels{}, 2), std::invalid_argument);
}

TEST(ClassificationMetrics, MatchesOracleAndInvariantsOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t classes = 2 + rng() % 6, n = 1 + rng() % 60;
    Labels pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng() % classes;
      truth[i] = rng() % (trial % 3 == 0 ? 2 : classes);
    }
    const ClassificationReport r = classification_metrics(pred, truth, classes);
    EXPECT_NEAR(r.weighted_f1, weighted_f1_oracle(pred, truth, classes), 1e-12);
    std::size_t sum = 0;
    double weighted = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t k : r.confusion[c]) sum += k;
      const ClassMetrics& m = r.per_class[c];
      for (const auto& v : {m.accuracy, m.precision, m.f1}) {
        if (v) {
          EXPECT_GE(*v, 0.0);
          EXPECT_LE(*v, 1.0);
        }
      }
      weighted += static_cast<double>(m.support) * m.f1.value_or(0.0);
    }
    EXPECT_EQ(sum, n);
    EXPECT_EQ(r.count, n);
    EXPECT_NEAR(r.weighted_f1, weighted / static_cast<double>(n), 1e-12);
  }
}

// ------------------------------------------------------------ regression

TEST(RegressionMetrics, Anchors) {
  const std::vector<double> y{0.1, -0.4, 0.9, 0.3};
  std::vector<double> neg;
  for (double v : y) neg.push_back(-v);
  const RegressionReport same = regression_metrics(column(y), column(y));
  EXPECT_EQ(same.attributes[0].mae, 0.0);
  EXPECT_NEAR(*same.attributes[0].pearson, 1.0, 1e-15);
  EXPECT_NEAR(*regression_metrics(column(neg), column(y)).attributes[0].pearson, -1.0, 1e-15);
  // Zero variance: undefined, not zero.
  const RegressionReport flat = regression_metrics(column({1, 1, 1, 1}), column(y));
  EXPECT_FALSE(flat.attributes[0].pearson.has_value());
  EXPECT_FALSE(regression_metrics(column({1}), column({2})).attributes[0].pearson.has_value());
  EXPECT_EQ(regression_metrics(column({1}), column({2})).mean_mae, 1.0);
}

TEST(RegressionMetrics, MatchesTwoPassOracle) {
  std::mt19937_64 rng(30);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> pred, target;
  std::vector<std::vector<double>> cols_p(4), cols_t(4);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(4), t(4);
    for (int k = 0; k < 4; ++k) {
      t[k] = n(rng);
      p[k] = 0.6 * t[k] + 0.8 * n(rng) + 3.0;
      cols_p[k].push_back(p[k]);
      cols_t[k].push_back(t[k]);
    }
    pred.push_back(p);
    target.push_back(t);
  }
  const RegressionReport r = regression_metrics(pred, target);
  double mean_mae = 0.0;
  for (int k = 0; k < 4; ++k) {
    double mae = 0.0;
    for (int i = 0; i < 100; ++i) mae += std::fabs(cols_p[k][i] - cols_t[k][i]) / 100.0;
    EXPECT_NEAR(r.attributes[k].mae, mae, 1e-12);
    EXPECT_NEAR(*r.attributes[k].pearson, pearson_two_pass(cols_p[k], cols_t[k]), 1e-9);
    mean_mae += mae / 4.0;
  }
  EXPECT_NEAR(r.mean_mae, mean_mae, 1e-12);
}

TEST(RegressionMetrics, PearsonIsInvariantToPositiveAffineMaps) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(20), y(20), ax(20);
    const double a = 0.01 + std::fabs(n(rng)) * 10, b = n(rng) * 100;
    for (int i = 0; i < 20; ++i) {
      x[i] = n(rng);
      y[i] = x[i] + n(rng);
      ax[i] = a * x[i] + b;
    }
    const double r = *regression_metrics(column(x), column(y)).attributes[0].pearson;
    EXPECT_NEAR(*regression_metrics(column(ax), column(y)).attributes[0].pearson, r, 1e-9);
    EXPECT_NEAR(*regression_metrics(column(x), column(ax)).attributes[0].pearson,
                *regression_metrics(column(x), column(x)).attributes[0].pearson, 1e-9);
    EXPECT_LE(std::fabs(r), 1.0);
  }
}

TEST(RegressionMetrics, RejectsShapeMismatch) {
  EXPECT_THROW(regression_metrics({{1.0, 2.0}}, {{1.0}}), std::invalid_argument);
  EXPECT_THROW(regression_metrics({}, {}), std::invalid_argument);
}

// ------------------------------------------------------------ emotion shift

TEST(EmotionShift, ConstantLabelsHaveNoShiftTurns) {
  const Dialogue d = labelled("d", {{0, 1}, {1, 2}, {0, 1}, {1, 2}});
  const std::vector<Dialogue> ds{d};
  const ShiftAccuracy s = emotion_shift_accuracy(ds, {{1, 2, 1, 0}});
  EXPECT_EQ(s.shift_turns, 0u);
  EXPECT_FALSE(s.shift.has_value());
  EXPECT_EQ(*s.no_shift, 0.75);
}

TEST(EmotionShift, AlternatingPartyShiftsAfterItsFirstTurn) {
  const Dialogue d = labelled("d", {{0, 0}, {1, 3}, {0, 1}, {1, 3}, {0, 0}, {0, 1}});
  EXPECT_EQ(shift_turns(d), (std::vector<bool>{false, false, true, false, true, true}));
}

TEST(EmotionShift, ThreeDialogueFixture) {
  const std::vector<Dialogue> ds{
      labelled("a", {{0, 0}, {1, 0}, {0, 1}, {1, 0}}),          // shifts: t2
      labelled("b", {{0, 2}, {0, 2}, {1, 1}, {1, 2}, {0, 1}}),  // shifts: t3, t4
      labelled("c", {{1, 0}}),                                   // none
  };
  const std::vector<Labels> pred{{0, 1, 1, 0}, {2, 0, 1, 1, 1}, {0}};
  // Shift turns a2 (hit), b3 (miss), b4 (hit); the other seven: a0 a1 a3 b0 b1 b2 c0
  // with hits a0 a3 b0 b2 c0.
  const ShiftAccuracy s = emotion_shift_accuracy(ds, pred);
  EXPECT_EQ(s.shift_turns, 3u);
  EXPECT_EQ(s.no_shift_turns, 7u);
  EXPECT_DOUBLE_EQ(*s.shift, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.no_shift, 5.0 / 7.0);
}

TEST(EmotionShift, ShiftAndNoShiftPartitionAllTurns) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Dialogue> ds;
    std::vector<Labels> pred;
    std::size_t total = 0;
    for (int d = 0; d < 3; ++d) {
      std::vector<std::pair<std::size_t, std::size_t>> turns;
      Labels p;
      const std::size_t n = 1 + rng() % 10;
      for (std::size_t t = 0; t < n; ++t) {
        turns.emplace_back(rng() % 2, rng() % 3);
        p.push_back(rng() % 3);
      }
      total += n;
      ds.push_back(labelled("d" + std::to_string(d), turns));
      pred.push_back(p);
    }
    const ShiftAccuracy s = emotion_shift_accuracy(ds, pred);
    EXPECT_EQ(s.shift_turns + s.no_shift_turns, total);
  }
}

// ------------------------------------------------------------ attention analysis

ForwardTrace beta_trace(const std::string& id, std::vector<std::vector<double>> beta,
                        const Labels& predicted) {
  ForwardTrace tr;
  tr.dialogue_id = id;
  tr.beta = std::move(beta);
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    UtteranceTrace s;
    s.alpha.assign(t, t ? 1.0 / static_cast<double>(t) : 0.0);
    s.predicted = predicted[t];
    tr.steps.push_back(s);
  }
  return tr;
}

TEST(AttendedContext, ExcludesSelfAndBreaksTiesLow) {
  const std::vector<double> row{0.1, 0.5, 0.4};
  EXPECT_EQ(attended_context(row, std::size_t{1}), 2u);
  EXPECT_EQ(attended_context(row, std::nullopt), 1u);
  const std::vector<double> uniform(4, 0.25);
  EXPECT_EQ(attended_context(uniform, std::size_t{0}), 1u);
  EXPECT_EQ(attended_context(uniform, std::size_t{2}), 0u);
  EXPECT_FALSE(attended_context(std::vector<double>{1.0}, std::size_t{0}).has_value());
}

TEST(DistanceHistogram, TwoUtteranceDialogueOnlyYieldsDistanceOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Dialogue d = labelled("d", {{0, 0}, {1, 1}});
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u(rng), b = u(rng);
    const std::vector<ForwardTrace> tr{beta_trace("d", {{a, 1 - a}, {b, 1 - b}}, {0, 1})};
    const std::vector<Dialogue> ds{d};
    const DistanceHistogram h = attention_distance_histogram(tr, ds);
    EXPECT_EQ(h.counts, (std::vector<std::size_t>{0, 2}));
  }
}

TEST(DistanceHistogram, UniformRowsAreReproducible) {
  const Dialogue d = labelled("d", {{0, 0}, {1, 0}, {0, 0}, {1, 0}});
  const std::vector<std::vector<double>> beta(4, std::vector<double>(4, 0.25));
  const std::vector<ForwardTrace> tr{beta_trace("d", beta, {0, 0, 0, 0})};
  const std::vector<Dialogue> ds{d};
  // Lowest index other than self: t=0 → 1, otherwise → 0.
  const DistanceHistogram h = attention_distance_histogram(tr, ds);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{0, 2, 1, 1}));
  EXPECT_EQ(attention_distance_histogram(tr, ds).counts, h.counts);
}

TEST(DistanceHistogram, HandSetBetaFixture) {
  const Dialogue d = labelled("d", {{0, 0}, {1, 1}, {0, 2}, {1, 0}, {0, 1}});
  const std::vector<std::vector<double>> beta{
      {0.5, 0.1, 0.1, 0.2, 0.1},  // context 3, distance 3
      {0.1, 0.6, 0.1, 0.1, 0.1},  // context 0 (tie, lowest), distance 1
      {0.4, 0.1, 0.3, 0.1, 0.1},  // context 0, distance 2; mispredicted
      {0.1, 0.1, 0.5, 0.2, 0.1},  // context 2, distance 1
      {0.3, 0.1, 0.1, 0.1, 0.4},  // context 0, distance 4
  };
  const std::vector<ForwardTrace> tr{beta_trace("d", beta, {0, 1, 0, 0, 1})};
  const std::vector<Dialogue> ds{d};
  const DistanceHistogram h = attention_distance_histogram(tr, ds);
  EXPECT_EQ(h.samples, 4u);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{0, 2, 0, 1, 1}));
  const DistanceHistogram wide = attention_distance_histogram(tr, ds, 2);
  EXPECT_EQ(wide.counts, (std::vector<std::size_t>{2, 1, 1}));
}

TEST(DistanceHistogram, FallsBackToAlphaOverHistory) {
  const Dialogue d = labelled("d", {{0, 0}, {1, 0}, {0, 0}, {1, 0}});
  ForwardTrace tr = beta_trace("d", {}, {0, 0, 0, 0});
  tr.steps[3].alpha = {0.2, 0.7, 0.1};
  const std::vector<ForwardTrace> trs{tr};
  const std::vector<Dialogue> ds{d};
  // t=0 and t=1 have histories shorter than two; t=2 ties → 0; t=3 → 1.
  EXPECT_EQ(attention_distance_histogram(trs, ds).counts, (std::vector<std::size_t>{0, 0, 2}));
}

TEST(AttentionExport, RowCountsAndRoundTrip) {
  ForwardTrace alpha_only = beta_trace("only,alpha \"quoted\"", {}, {0, 0, 0});
  alpha_only.steps[2].alpha = {0.1, 0.9};
  std::vector<std::vector<double>> beta(4, std::vector<double>(4));
  std::mt19937_64 rng(9);
  for (auto& row : beta) row = testing::softmax_reference(testing::random_vec(4, rng, 3.0));
  const ForwardTrace with_beta = beta_trace("b", beta, {0, 0, 0, 0});

  const std::vector<ForwardTrace> first{alpha_only};
  EXPECT_EQ(attention_rows(first).size(), 3u);
  std::size_t beta_rows = 0;
  const std::vector<ForwardTrace> second{with_beta};
  for (const AttentionRow& r : attention_rows(second)) beta_rows += r.kind == "beta";
  EXPECT_EQ(beta_rows, 16u);

  const std::vector<ForwardTrace> both{alpha_only, with_beta};
  testing::TempDir dir;
  export_attention(both, dir.file("att.csv"));
  const std::vector<AttentionRow> back = import_attention(dir.file("att.csv"));
  EXPECT_EQ(back, attention_rows(both));
  // Rows sum to one per (dialogue, t, kind) wherever a row is nonempty.
  std::map<std::tuple<std::string, std::size_t, std::string>, double> sums;
  for (const AttentionRow& r : back) sums[{r.dialogue_id, r.t, r.kind}] += r.weight;
  for (const auto& [key, sum] : sums) EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(AttentionExport, IoFailuresNameThePath) {
  const std::vector<ForwardTrace> none;
  try {
    export_attention(none, "/nonexistent-dir/att.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/att.csv"), std::string::npos);
  }
  EXPECT_THROW(import_attention("/nonexistent-dir/att.csv"), std::runtime_error);
}

// ------------------------------------------------------------ reports

TEST(Reports, JsonUsesStableKeysAndNullForUndefined) {
  const ClassificationReport r = classification_metrics(Labels{0, 0}, Labels{0, 0}, 2);
  const auto j = nlohmann::json::parse(report_json(r, {"calm", "angry"}));
  EXPECT_EQ(j["kind"], "classification");
  EXPECT_EQ(j["classes"][1]["name"], "angry");
  EXPECT_TRUE(j["classes"][1]["f1"].is_null());
  EXPECT_EQ(j["weighted_f1"], 1.0);

  const RegressionReport g = regression_metrics(column({1, 1}), column({0, 1}));
  const auto k = nlohmann::json::parse(report_json(g, {"valence"}));
  EXPECT_TRUE(k["attributes"][0]["pearson_r"].is_null());
  EXPECT_EQ(k["attributes"][0]["mae"], 0.5);
  EXPECT_EQ(report_json(g, {"valence"}), report_json(g, {"valence"}));
}

}  // namespace
}  // namespace drnn
