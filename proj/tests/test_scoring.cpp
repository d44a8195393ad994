#include <gtest/gtest.h>

#include "bws/scoring.hpp"
#include "oracles.hpp"

using namespace bws;

namespace {

std::shared_ptr<const TupleDesign> design_of(std::size_t n, std::uint64_t seed = 2) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(100 + i));
  return std::make_shared<const TupleDesign>(generate_design(ids, seed));
}

std::map<std::string, double> linear_latent(const TupleDesign& d) {
  std::map<std::string, double> latent;
  for (std::size_t i = 0; i < d.items.size(); ++i) latent[d.items[i]] = static_cast<double>(i);
  return latent;
}

using Judgments = std::vector<std::pair<std::vector<std::string>, std::pair<std::string, std::string>>>;

Judgments judgments_of(const ResponseSet& rs) {
  Judgments j;
  for (const auto& r : rs.responses) {
    const auto ids = rs.design->tuple_ids(r.tuple_index);
    j.push_back({{ids.begin(), ids.end()}, {r.best, r.worst}});
  }
  return j;
}

void expect_matches_oracle(const ResponseSet& rs) {
  const auto table = compute_scores(rs);
  const auto counts = oracle::direct_counts(judgments_of(rs));
  ASSERT_EQ(table.size(), counts.size());
  for (const auto& [id, c] : counts) {
    const auto& s = table.at(id);
    EXPECT_EQ(static_cast<long long>(s.appearances), c.appearances);
    EXPECT_EQ(static_cast<long long>(s.best_count), c.best);
    EXPECT_EQ(static_cast<long long>(s.worst_count), c.worst);
    EXPECT_TRUE(oracle::correctly_rounded(s.raw, c.best - c.worst, c.appearances)) << id;
    EXPECT_EQ(s.unipolar, (s.raw + 1.0) / 2.0);
    EXPECT_GE(s.raw, -1.0);
    EXPECT_LE(s.raw, 1.0);
    EXPECT_GE(s.unipolar, 0.0);
    EXPECT_LE(s.unipolar, 1.0);
  }
}

}  // namespace

TEST(ComputeScores, SixBestThreeWorstOutOfTwentyFour) {
  const auto d = design_of(40);
  const std::string target = d->items[0];
  ResponseSet rs{d, {}, 3};
  std::size_t seen = 0;
  for (std::size_t t = 0; t < d->tuples.size(); ++t) {
    const auto ids = d->tuple_ids(t);
    const bool has = std::find(ids.begin(), ids.end(), target) != ids.end();
    std::vector<std::string> others;
    for (const auto& id : ids) {
      if (id != target) others.push_back(id);
    }
    for (int k = 0; k < 3; ++k) {
      Response r{"a" + std::to_string(k), t, others[0], others[1], 0};
      if (has) {
        // Judgments 0..5 pick target best, 6..8 pick it worst.
        if (seen < 6) r.best = target;
        else if (seen < 9) r.worst = target;
        ++seen;
      }
      rs.responses.push_back(r);
    }
  }
  const auto s = compute_scores(rs).at(target);
  EXPECT_EQ(s.appearances, 24u);
  EXPECT_EQ(s.best_count, 6u);
  EXPECT_EQ(s.worst_count, 3u);
  EXPECT_EQ(s.raw, 0.125);
  EXPECT_EQ(s.unipolar, 0.5625);
  expect_matches_oracle(rs);
}

TEST(ComputeScores, ExtremeAndNeutralItems) {
  const auto d = design_of(40);
  const auto rs = simulate_annotators(d, linear_latent(*d), 1.0, 3, 0);
  const auto table = compute_scores(rs);
  // Highest latent item always wins, lowest always loses.
  EXPECT_EQ(table.at(d->items.back()).raw, 1.0);
  EXPECT_EQ(table.at(d->items.back()).unipolar, 1.0);
  EXPECT_EQ(table.at(d->items.front()).raw, -1.0);
  EXPECT_EQ(table.at(d->items.front()).unipolar, 0.0);
  for (const auto& [id, s] : table.scores) {
    EXPECT_EQ(s.appearances, 24u);
    if (s.best_count == 0 && s.worst_count == 0) {
      EXPECT_EQ(s.unipolar, 0.5);
    }
  }
}

TEST(ComputeScores, EmptyResponsesAreAnError) {
  EXPECT_THROW(compute_scores(ResponseSet{design_of(40), {}, 3}), ValidationError);
}

TEST(ComputeScores, UnseenItemsAreAbsent) {
  const auto d = design_of(40);
  const auto ids = d->tuple_ids(0);
  const auto table = compute_scores(ResponseSet{d, {{"a", 0, ids[0], ids[1], 0}}, 3});
  EXPECT_EQ(table.size(), 4u);
  EXPECT_EQ(table.at(ids[2]).unipolar, 0.5);
}

TEST(ComputeScores, PropertyMatchesDirectCountingOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = design_of(28 + uniform_index(rng, 60), rng());
    std::map<std::string, double> latent;
    for (const auto& id : d->items) latent[id] = uniform_real(rng);
    const double p = 0.3 + 0.7 * uniform_real(rng);
    const auto rs = simulate_annotators(d, latent, p, 1 + uniform_index(rng, 4), rng());
    expect_matches_oracle(rs);
    // Ranking is identical under raw and unipolar.
    const auto table = compute_scores(rs);
    for (const auto& [a, sa] : table.scores) {
      for (const auto& [b, sb] : table.scores) {
        ASSERT_EQ(sa.raw < sb.raw, sa.unipolar < sb.unipolar);
      }
    }
  }
}

TEST(ScoreFile, RoundTrip) {
  const auto d = design_of(40);
  const auto table = compute_scores(simulate_annotators(d, linear_latent(*d), 0.8, 3, 4));
  EXPECT_EQ(parse_scores(serialize_scores(table)), table);
  EXPECT_THROW(parse_scores("x\t0\t0.5\t4\t3\t2\n"), ParseError);
}

TEST(PairOrders, FiveOfSixFromOneJudgment) {
  const std::array<std::string, 4> t{"A", "B", "C", "D"};
  auto got = implied_pair_orders(t, "A", "D");
  std::sort(got.begin(), got.end());
  const std::vector<std::pair<std::string, std::string>> want{
      {"A", "B"}, {"A", "C"}, {"A", "D"}, {"B", "D"}, {"C", "D"}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(implied_pair_orders(t, "C", "B").size(), 5u);
  EXPECT_THROW(implied_pair_orders(t, "A", "A"), ValidationError);
  EXPECT_THROW(implied_pair_orders(t, "A", "Z"), ValidationError);
}

TEST(SplitHalf, IdenticalAnnotatorsGiveExactlyOne) {
  const auto d = design_of(60);
  const auto rs = simulate_annotators(d, linear_latent(*d), 1.0, 3, 0);
  ShrOptions opt;
  opt.repetitions = 100;
  const auto r = split_half_reliability(rs, opt);
  EXPECT_EQ(r.repetitions, 100u);
  ASSERT_EQ(r.per_repetition.size(), 100u);
  EXPECT_EQ(r.mean_pearson, 1.0);
  EXPECT_EQ(r.mean_spearman, 1.0);
}

TEST(SplitHalf, PerJudgmentWeightingIsHighButNotExact) {
  const auto d = design_of(60);
  const auto rs = simulate_annotators(d, linear_latent(*d), 1.0, 3, 0);
  ShrOptions opt;
  opt.repetitions = 20;
  opt.weighting = ShrWeighting::per_judgment;
  const auto r = split_half_reliability(rs, opt);
  EXPECT_GT(r.mean_pearson, 0.9);
  EXPECT_LE(r.mean_pearson, 1.0);
}

TEST(SplitHalf, MeansAreArithmeticMeansAndDeterministic) {
  const auto d = design_of(40);
  const auto rs = simulate_annotators(d, linear_latent(*d), 0.7, 3, 3);
  ShrOptions opt;
  opt.repetitions = 15;
  opt.seed = 8;
  const auto r = split_half_reliability(rs, opt);
  double p = 0, s = 0;
  for (const auto& [a, b] : r.per_repetition) {
    EXPECT_GE(a, -1.0);
    EXPECT_LE(a, 1.0);
    p += a;
    s += b;
  }
  EXPECT_DOUBLE_EQ(r.mean_pearson, p / 15);
  EXPECT_DOUBLE_EQ(r.mean_spearman, s / 15);
  EXPECT_EQ(split_half_reliability(rs, opt).per_repetition, r.per_repetition);
}

TEST(SplitHalf, NoiseMonotonicityOverTwentySeeds) {
  const auto d = design_of(60);
  const auto latent = linear_latent(*d);
  std::vector<double> means;
  for (double p : {1.0, 0.8, 0.6}) {
    double sum = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ShrOptions opt;
      opt.repetitions = 10;
      opt.seed = seed;
      sum += split_half_reliability(simulate_annotators(d, latent, p, 3, seed), opt).mean_spearman;
    }
    means.push_back(sum / 20);
  }
  EXPECT_GE(means[0], means[1]);
  EXPECT_GE(means[1], means[2]);
}

TEST(SplitHalf, NeedsTwoJudgmentsPerTuple) {
  const auto d = design_of(40);
  const auto rs = simulate_annotators(d, linear_latent(*d), 1.0, 1, 0);
  EXPECT_THROW(split_half_reliability(rs), ValidationError);
}

namespace {

ItemPair scored_pair(double h, double n, int k) {
  ItemPair p;
  p.hqt.id = "h" + std::to_string(k);
  p.hqt.text = "text " + std::to_string(k) + " #angry";
  p.hqt.gold_score = h;
  p.nqt.id = "n" + std::to_string(k);
  p.nqt.text = "text " + std::to_string(k);
  p.nqt.gold_score = n;
  return p;
}

}  // namespace

TEST(HashtagImpact, ThreeHandComputedPairs) {
  const auto r = hashtag_impact({scored_pair(0.6, 0.4, 0), scored_pair(0.5, 0.4, 1), scored_pair(0.3, 0.4, 2)});
  EXPECT_EQ(r.drops, 2u);
  EXPECT_EQ(r.rises, 1u);
  EXPECT_NEAR(r.pct_drop, 66.7, 0.05);
  EXPECT_NEAR(r.pct_rise, 33.3, 0.05);
  EXPECT_EQ(r.pct_none, 0.0);
  EXPECT_NEAR(r.mean_drop_magnitude, 0.15, 1e-12);
  EXPECT_NEAR(r.mean_rise_magnitude, 0.1, 1e-12);
  EXPECT_NEAR(r.pct_drop + r.pct_rise + r.pct_none, 100.0, 1e-9);
  EXPECT_NEAR(r.mean_hqt, 1.4 / 3, 1e-12);
  EXPECT_NEAR(r.mean_nqt, 0.4, 1e-12);
  ASSERT_TRUE(r.wilcoxon_p);
  EXPECT_EQ(format_report_kv(r).find("pct_drop=66.7\n") != std::string::npos, true);
}

TEST(HashtagImpact, AllUnchangedIsDegenerate) {
  const auto r = hashtag_impact({scored_pair(0.5, 0.5, 0), scored_pair(0.25, 0.25, 1)});
  EXPECT_EQ(r.pct_none, 100.0);
  EXPECT_FALSE(r.wilcoxon_p);
  EXPECT_NE(format_report_text(r).find("undefined"), std::string::npos);
}

TEST(HashtagImpact, Errors) {
  EXPECT_THROW(hashtag_impact({}), ValidationError);
  auto p = scored_pair(0.5, 0.5, 0);
  p.nqt.gold_score.reset();
  EXPECT_THROW(hashtag_impact({p}), ValidationError);
}

TEST(HashtagImpact, ScatterLabelsRemovedHashtag) {
  const auto pts = hashtag_scatter({scored_pair(0.6, 0.4, 0)});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].hashtag, "#angry");
  EXPECT_EQ(format_scatter(pts), "hqt_score\tnqt_score\thashtag\n0.6\t0.4\t#angry\n");
}
