#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bws/design.hpp"

using namespace bws;

namespace {

std::vector<std::string> make_ids(std::size_t n, const std::string& prefix = "item") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

// Exhaustive pair count, written independently of verify_design.
struct PairCheck {
  std::size_t tuples = 0;
  std::map<std::string, int> appearances;
  std::map<std::pair<std::string, std::string>, int> pairs;
};

PairCheck count_pairs(const TupleDesign& d) {
  PairCheck c;
  c.tuples = d.tuples.size();
  for (std::size_t t = 0; t < d.tuples.size(); ++t) {
    const auto ids = d.tuple_ids(t);
    for (int i = 0; i < 4; ++i) {
      c.appearances[ids[i]] += 1;
      for (int j = i + 1; j < 4; ++j) c.pairs[std::minmax(ids[i], ids[j])] += 1;
    }
  }
  return c;
}

void expect_valid(const TupleDesign& d, std::size_t n) {
  const auto c = count_pairs(d);
  EXPECT_EQ(c.tuples, 2 * n);
  ASSERT_EQ(c.appearances.size(), n);
  for (const auto& [id, k] : c.appearances) EXPECT_EQ(k, 8) << id;
  for (const auto& [p, k] : c.pairs) {
    EXPECT_NE(p.first, p.second);
    EXPECT_EQ(k, 1) << p.first << "," << p.second;
  }
  EXPECT_EQ(c.pairs.size(), 12 * n);
  EXPECT_TRUE(verify_design(d).ok());
}

}  // namespace

TEST(GenerateDesign, HundredItemsGiveTwoHundredValidTuples) {
  for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 123456789ULL}) {
    const auto d = generate_design(make_ids(100), seed);
    expect_valid(d, 100);
  }
}

TEST(GenerateDesign, TwentyFiveItemsCoverEveryPairExactlyOnce) {
  const auto d = generate_design(make_ids(25), 0);
  expect_valid(d, 25);
  EXPECT_EQ(count_pairs(d).pairs.size(), 300u);
  EXPECT_EQ(verify_design(d).covered_pairs, 300u);
}

TEST(GenerateDesign, TwentyFourItemsAreInfeasible) {
  EXPECT_THROW(generate_design(make_ids(24), 0), InfeasibleDesign);
  EXPECT_THROW(generate_design(make_ids(0), 0), InfeasibleDesign);
}

TEST(GenerateDesign, DuplicateIdsRejected) {
  auto ids = make_ids(40);
  ids[5] = ids[6];
  EXPECT_THROW(generate_design(ids, 0), ValidationError);
}

TEST(GenerateDesign, DeterministicInSeed) {
  const auto ids = make_ids(60);
  EXPECT_EQ(generate_design(ids, 42), generate_design(ids, 42));
  EXPECT_NE(generate_design(ids, 42).tuples, generate_design(ids, 43).tuples);
}

TEST(GenerateDesign, SizesNotDivisibleByFour) {
  for (std::size_t n : {29u, 30u, 31u, 33u, 101u}) expect_valid(generate_design(make_ids(n), n), n);
}

TEST(GenerateDesign, PropertyRandomSizes) {
  Rng rng(99);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 28 + uniform_index(rng, 300);
    expect_valid(generate_design(make_ids(n), rng()), n);
  }
}

TEST(GenerateDesign, ExhaustionReportsSeedAndAttempts) {
  DesignOptions opt;
  opt.restart_budget = 1;
  opt.steps_per_slot = 0;
  try {
    generate_design(make_ids(40), 5, opt);
    FAIL() << "expected DesignExhausted";
  } catch (const DesignExhausted& e) {
    EXPECT_EQ(e.seed(), 5u);
    EXPECT_EQ(e.attempts(), 1u);
  }
}

TEST(VerifyDesign, DetectsPlantedDefects) {
  auto d = generate_design(make_ids(40), 3);
  // Repeat an item within tuple 0.
  d.tuples[0][0] = d.tuples[0][1];
  const auto r = verify_design(d);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.distinct_within_tuples);
  EXPECT_FALSE(r.appearances_ok);
  EXPECT_EQ(r.tuples_with_repeats, std::vector<std::size_t>{0});

  auto d2 = generate_design(make_ids(40), 3);
  d2.tuples.pop_back();
  const auto r2 = verify_design(d2);
  EXPECT_FALSE(r2.tuple_count_ok);
  EXPECT_FALSE(r2.appearances_ok);
}

TEST(VerifyDesign, DetectsDuplicatedPair) {
  TupleDesign d;
  d.items = make_ids(8);
  d.tuples = {{0, 1, 2, 3}, {0, 1, 4, 5}};
  const auto r = verify_design(d);
  ASSERT_EQ(r.duplicated_pairs.size(), 1u);
  EXPECT_EQ(std::get<2>(r.duplicated_pairs[0]), 2u);
}

TEST(DesignFile, RoundTrip) {
  const auto d = generate_design(make_ids(30), 18446744073709551615ULL);
  const auto text = serialize_design(d);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 61);
  const auto back = parse_design(text);
  EXPECT_EQ(back.tuples.size(), d.tuples.size());
  EXPECT_EQ(back.seed, d.seed);
  for (std::size_t t = 0; t < d.tuples.size(); ++t) EXPECT_EQ(back.tuple_ids(t), d.tuple_ids(t));
}

TEST(DesignFile, ParseErrorsCarryLineNumbers) {
  EXPECT_THROW(parse_design(""), ParseError);
  EXPECT_THROW(parse_design("a\tb\tc\td\n"), ParseError);
  try {
    parse_design("#tuples\tn=4\tseed=0\na\tb\tc\td\na\tb\tc\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_design("#tuples\tn=5\tseed=0\na\tb\tc\td\n"), ParseError);
}

TEST(VerifyDesign, DuplicatedTupleListsItsSixPairs) {
  auto d = generate_design(make_ids(50), 8);
  d.tuples[1] = d.tuples[0];
  const auto r = verify_design(d);
  EXPECT_FALSE(r.no_repeated_pairs);
  ASSERT_EQ(r.duplicated_pairs.size(), 6u);
  const auto ids = d.tuple_ids(0);
  std::set<std::pair<std::string, std::string>> expected;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) expected.insert(std::minmax(ids[i], ids[j]));
  }
  for (const auto& [a, b, k] : r.duplicated_pairs) {
    EXPECT_TRUE(expected.count(std::minmax(a, b)));
    EXPECT_EQ(k, 2u);
  }
}

TEST(VerifyDesign, SevenAndNineAppearancesNamed) {
  auto d = generate_design(make_ids(50), 8);
  // Replace one occurrence of item 0 with an item that is not in that tuple.
  std::size_t t = 0;
  while (std::find(d.tuples[t].begin(), d.tuples[t].end(), 0u) == d.tuples[t].end()) ++t;
  std::size_t other = 1;
  while (std::find(d.tuples[t].begin(), d.tuples[t].end(), other) != d.tuples[t].end()) ++other;
  *std::find(d.tuples[t].begin(), d.tuples[t].end(), 0u) = other;
  const auto r = verify_design(d);
  EXPECT_FALSE(r.appearances_ok);
  ASSERT_EQ(r.wrong_appearances.size(), 2u);
  std::map<std::string, std::size_t> wrong(r.wrong_appearances.begin(), r.wrong_appearances.end());
  EXPECT_EQ(wrong.at("item0"), 7u);
  EXPECT_EQ(wrong.at(d.items[other]), 9u);
  EXPECT_EQ(r.appearance_histogram.at(8), 48u);
}

TEST(GenerateDesign, TenSeedsGiveTenDistinctDesigns) {
  const auto ids = make_ids(40);
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto text = serialize_design(generate_design(ids, s));
    text = text.substr(text.find('\n'));  // ignore the header, which names the seed
    seen.insert(text);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(GenerateDesign, SerializationIsByteIdentical) {
  const auto ids = make_ids(77);
  EXPECT_EQ(serialize_design(generate_design(ids, 5)), serialize_design(generate_design(ids, 5)));
}
