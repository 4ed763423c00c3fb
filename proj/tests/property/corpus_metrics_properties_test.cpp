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

// Randomized invariants of corpus handling and metrics.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "dialoguernn/corpus.hpp"
#include "dialoguernn/errors.hpp"
#include "dialoguernn/metrics.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace drnn {
namespace {

constexpr int kCases = 100;

Corpus random_corpus(std::mt19937_64& rng, bool regression) {
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  Corpus c;
  c.manifest.mode = regression ? TaskMode::kRegression : TaskMode::kClassification;
  c.manifest.feature_dim = 1 + rng() % 6;
  c.manifest.parties = 2 + rng() % 2;
  c.manifest.listener_cue_dim = rng() % 2 ? 2 : 0;
  if (regression) {
    c.manifest.attribute_names = {"valence", "arousal", "expectancy", "power"};
  } else {
    c.manifest.class_names = {"a", "b", "c"};
  }
  auto value = [&] { return mantissa(rng) * std::pow(10.0, exponent(rng)); };
  const std::size_t n = 1 + rng() % 5;
  for (std::size_t i = 0; i < n; ++i) {
    Dialogue d;
    d.id = "dlg \"" + std::to_string(i) + "\", é";
    for (std::size_t p = 0; p < c.manifest.parties; ++p) d.speakers.push_back("s" + std::to_string(rng() % 9));
    const std::size_t len = 1 + rng() % 6;
    for (std::size_t t = 0; t < len; ++t) {
      Utterance u;
      u.speaker = rng() % c.manifest.parties;
      for (std::size_t k = 0; k < c.manifest.feature_dim; ++k) u.features.push_back(value());
      if (regression) {
        u.targets = std::vector<double>{value(), value(), value(), value()};
      } else {
        u.label = rng() % 3;
      }
      if (c.manifest.listener_cue_dim && rng() % 2) {
        for (std::size_t p = 0; p < c.manifest.parties; ++p) u.listener_cues.push_back({value(), value()});
      }
      d.utterances.push_back(u);
    }
    c.dialogues.push_back(d);
  }
  c.refresh_counts();
  return c;
}

bool bitwise(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(CorpusProperty, SerializationRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < kCases; ++trial) {
    const Corpus c = random_corpus(rng, trial % 2);
    ASSERT_TRUE(validate_corpus(c).empty());
    testing::TempDir dir;
    save_corpus_dir(c, dir.path().string());
    const Corpus back = load_corpus_dir(dir.path().string());
    ASSERT_EQ(back, c);
    for (std::size_t i = 0; i < c.dialogues.size(); ++i) {
      for (std::size_t t = 0; t < c.dialogues[i].size(); ++t) {
        const Utterance& a = c.dialogues[i].utterances[t];
        const Utterance& b = back.dialogues[i].utterances[t];
        ASSERT_TRUE(bitwise(a.features, b.features));
        if (a.targets) ASSERT_TRUE(bitwise(*a.targets, *b.targets));
      }
    }
  }
}

TEST(CorpusProperty, SpeakerIdentityIsInformativeInSyntheticData) {
  // Class-conditional feature means differ between speakers.
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < kCases; ++trial) {
    SyntheticSpec s;
    s.dialogues = 40;
    s.classes = 2;
    s.feature_dim = 4;
    s.seed = rng();
    const Corpus c = generate_synthetic(s);
    std::map<std::string, std::pair<std::vector<double>, double>> sums;  // class-0 utterances
    for (const Dialogue& d : c.dialogues) {
      for (const Utterance& u : d.utterances) {
        if (*u.label != 0) continue;
        auto& [sum, count] = sums[d.speakers[u.speaker]];
        sum.resize(u.features.size(), 0.0);
        for (std::size_t k = 0; k < u.features.size(); ++k) sum[k] += u.features[k];
        count += 1;
      }
    }
    ASSERT_GE(sums.size(), 2u);
    auto a = sums.begin(), b = std::next(a);
    double gap = 0.0;
    for (std::size_t k = 0; k < 4; ++k) gap += std::fabs(a->second.first[k] / a->second.second -
                                                       b->second.first[k] / b->second.second);
    EXPECT_GT(gap, 0.0) << "trial " << trial;
  }
}

TEST(CorpusProperty, HoldoutPartitionsDialogues) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < kCases; ++trial) {
    Corpus c = random_corpus(rng, false);
    if (c.dialogues.size() < 2) continue;
    auto [kept, held] = holdout_split(c, 0.3, rng());
    EXPECT_EQ(kept.dialogues.size() + held.dialogues.size(), c.dialogues.size());
    EXPECT_FALSE(kept.dialogues.empty());
    EXPECT_TRUE(validate_corpus(kept).empty());
    EXPECT_TRUE(validate_corpus(held).empty());
  }
}

TEST(MetricsProperty, RatesAndCorrelationStayInRange) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < kCases; ++trial) {
    const std::size_t m = 2 + rng() % 30;
    std::vector<std::vector<double>> p(m), t(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double base = n(rng);
      p[i] = {base + 0.01 * n(rng), -base};
      t[i] = {base, base};
    }
    const RegressionReport r = regression_metrics(p, t);
    for (const AttributeMetrics& a : r.attributes) {
      ASSERT_TRUE(a.pearson.has_value());
      EXPECT_LE(std::fabs(*a.pearson), 1.0);
      EXPECT_GE(a.mae, 0.0);
    }
    EXPECT_NEAR(*r.attributes[1].pearson, -1.0, 1e-9);
  }
}

TEST(MetricsProperty, ExportRowsSumToOnePerUtteranceAndKind) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < kCases; ++trial) {
    ForwardTrace tr;
    tr.dialogue_id = "d" + std::to_string(trial);
    const std::size_t n = 1 + rng() % 7;
    for (std::size_t t = 0; t < n; ++t) {
      UtteranceTrace s;
      if (t) s.alpha = testing::softmax_reference(testing::random_vec(t, rng, 4.0));
      tr.steps.push_back(s);
      tr.beta.push_back(testing::softmax_reference(testing::random_vec(n, rng, 4.0)));
    }
    const std::vector<ForwardTrace> trs{tr};
    const std::vector<AttentionRow> rows = attention_rows(trs);
    EXPECT_EQ(rows.size(), n * (n - 1) / 2 + n * n);
    std::map<std::pair<std::size_t, std::string>, double> sums;
    for (const AttentionRow& r : rows) sums[{r.t, r.kind}] += r.weight;
    for (const auto& [key, sum] : sums) EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace drnn
