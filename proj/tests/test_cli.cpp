#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>

#include "bws/annotation.hpp"
#include "bws/scoring.hpp"
#include "oracles.hpp"

using namespace bws;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "bws_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return (work_dir() / name).string(); }

Run run(const std::string& args) {
  const auto out = path_of("stdout.txt"), err = path_of("stderr.txt");
  const std::string cmd = std::string(BWS_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// n item ids with latent value equal to their index.
void write_items(std::size_t n, const std::string& items, const std::string& latent) {
  std::string a, b;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "item" + std::to_string(1000 + i);
    a += id + '\n';
    b += id + '\t' + std::to_string(i) + '\n';
  }
  write_file(path_of(items), a);
  write_file(path_of(latent), b);
}

}  // namespace

TEST(Cli, DesignWritesTwoNTuplesPlusHeader) {
  write_items(100, "items100.txt", "latent100.tsv");
  const auto r = run("design --items " + path_of("items100.txt") + " --seed 7 --out " + path_of("tuples100.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = read_file(path_of("tuples100.tsv"));
  EXPECT_EQ(line_count(text), 201u);
  const auto d = parse_design(text);
  EXPECT_TRUE(verify_design(d).ok());
  EXPECT_EQ(d.seed, 7u);
}

TEST(Cli, DesignIsByteIdenticalPerSeed) {
  write_items(40, "items40.txt", "latent40.tsv");
  const auto a = run("design --items " + path_of("items40.txt") + " --seed 3");
  const auto b = run("design --items " + path_of("items40.txt") + " --seed 3");
  const auto c = run("design --items " + path_of("items40.txt") + " --seed 4");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, TooFewItemsIsAValidationError) {
  write_items(10, "items10.txt", "latent10.tsv");
  const auto r = run("design --items " + path_of("items10.txt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("25"), std::string::npos);
}

TEST(Cli, EmptyResponsesExitOneWithMessage) {
  write_items(25, "items25.txt", "latent25.tsv");
  ASSERT_EQ(run("design --items " + path_of("items25.txt") + " --out " + path_of("tuples25.tsv")).code, 0);
  write_file(path_of("empty.tsv"), "");
  const auto r = run("score --responses " + path_of("empty.tsv") + " --tuples " + path_of("tuples25.tsv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("empty"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto unknown = run("design --items x --bogus 1");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("--bogus"), std::string::npos);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("score --tuples t.tsv").code, 2);
  EXPECT_EQ(run("design --items x --seed notanumber").code, 2);
}

TEST(Cli, HelpPerSubcommand) {
  for (const auto* sub : {"design", "score", "shr", "hashtag-impact", "simulate", "features", "train", "eval",
                          "ablate", "transfer", "serve"}) {
    const auto r = run(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--seed"), std::string::npos) << sub;
    EXPECT_NE(r.out.find("--out"), std::string::npos) << sub;
  }
}

TEST(Cli, MissingInputFileIsAnError) {
  const auto r = run("score --responses /nonexistent/r.tsv --tuples /nonexistent/t.tsv");
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, SimulateThenScoreRecoversLatentOrder) {
  write_items(100, "items100s.txt", "latent100s.tsv");
  ASSERT_EQ(run("design --items " + path_of("items100s.txt") + " --seed 1 --out " + path_of("t100s.tsv")).code, 0);
  const std::string sim = "simulate --tuples " + path_of("t100s.tsv") + " --latent " + path_of("latent100s.tsv") +
                          " --accuracy 1.0 --seed 9";
  const auto a = run(sim + " --out " + path_of("r100s.tsv"));
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run(sim).out, read_file(path_of("r100s.tsv")));
  const auto s = run("score --responses " + path_of("r100s.tsv") + " --tuples " + path_of("t100s.tsv"));
  ASSERT_EQ(s.code, 0) << s.err;
  const auto table = parse_scores(s.out);
  ASSERT_EQ(table.size(), 100u);
  std::vector<double> got, want;
  for (std::size_t i = 0; i < 100; ++i) {
    got.push_back(table.at("item" + std::to_string(1000 + i)).unipolar);
    want.push_back(static_cast<double>(i));
  }
  EXPECT_GE(oracle::spearman(got, want), 0.95);
  // The extremes are always chosen, so they are recovered exactly.
  EXPECT_EQ(got.front(), 0.0);
  EXPECT_EQ(got.back(), 1.0);
}

TEST(Cli, ShrIsDeterministicPerSeed) {
  write_items(30, "items30.txt", "latent30.tsv");
  ASSERT_EQ(run("design --items " + path_of("items30.txt") + " --out " + path_of("t30.tsv")).code, 0);
  ASSERT_EQ(run("simulate --tuples " + path_of("t30.tsv") + " --latent " + path_of("latent30.tsv") +
                " --accuracy 0.7 --seed 2 --out " + path_of("r30.tsv"))
                .code,
            0);
  const std::string shr = "shr --responses " + path_of("r30.tsv") + " --tuples " + path_of("t30.tsv") +
                          " --repetitions 20 --seed 5";
  const auto a = run(shr), b = run(shr);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "repetitions\t20");
  EXPECT_EQ(run(shr + " --weighting sideways").code, 2);
}

TEST(Cli, HashtagImpactReportsPairs) {
  write_file(path_of("pairs.tsv"),
             "h1\tso scared #fear\tfear\ttrain\tHQT:n1\t0.8\n"
             "n1\tso scared\tfear\ttrain\tNQT:h1\t0.6\n"
             "h2\tdark night #fear\tfear\ttrain\tHQT:n2\t0.5\n"
             "n2\tdark night\tfear\ttrain\tNQT:h2\t0.7\n");
  const auto r = run("hashtag-impact --dataset " + path_of("pairs.tsv") + " --format kv --scatter " +
                     path_of("scatter.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pair_count=2"), std::string::npos) << r.out;
  EXPECT_EQ(line_count(read_file(path_of("scatter.tsv"))), 3u);
}

TEST(Cli, TrainEvalAndFeatures) {
  // Word "up" raises intensity, "down" lowers it.
  std::string train_text, test_text;
  for (int i = 0; i < 60; ++i) {
    const int ups = i % 4, downs = (i / 4) % 3;
    std::string text = "w" + std::to_string(i % 7);
    for (int k = 0; k < ups; ++k) text += " up";
    for (int k = 0; k < downs; ++k) text += " down";
    const double score = 0.4 + 0.15 * ups - 0.1 * downs;
    const std::string line = "x" + std::to_string(i) + '\t' + text + "\tjoy\t" +
                             std::string(i < 40 ? "train" : "test") + "\tQT:NONE\t" + format_double(score) + '\n';
    (i < 40 ? train_text : test_text) += line;
  }
  write_file(path_of("train.tsv"), train_text);
  write_file(path_of("test.tsv"), test_text);
  const auto t = run("train --data " + path_of("train.tsv") + " --format scored --config WN --C 10 --epsilon 0.01 --out " +
                     path_of("model.tsv"));
  ASSERT_EQ(t.code, 0) << t.err;
  const auto e = run("eval --model " + path_of("model.tsv") + " --test " + path_of("test.tsv") + " --format scored --config WN");
  ASSERT_EQ(e.code, 0) << e.err;
  ASSERT_EQ(e.out.rfind("pearson\t", 0), 0u);
  EXPECT_GT(std::stod(e.out.substr(8)), 0.9);
  EXPECT_NE(e.out.find("n\t20"), std::string::npos);

  const auto f = run("features --dataset " + path_of("test.tsv") + " --format scored --config WN");
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NE(f.out.find("x41\twn:up\t1\n"), std::string::npos) << f.out.substr(0, 200);
  EXPECT_EQ(run("features --dataset " + path_of("test.tsv") + " --format scored --config XX").code, 1);
}

TEST(Cli, ServeRejectsBadConfigurationAtStartup) {
  write_items(25, "items25b.txt", "latent25b.tsv");
  ASSERT_EQ(run("design --items " + path_of("items25b.txt") + " --out " + path_of("t25b.tsv")).code, 0);
  write_file(path_of("texts.tsv"), "id1\thello\tfear\ttrain\tQT:NONE\t0.5\n");
  const auto r = run("serve --tuples " + path_of("t25b.tsv") + " --items " + path_of("texts.tsv") + " --storage " +
                     path_of("sessions"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no text for design item"), std::string::npos) << r.err;
  EXPECT_EQ(run("serve --items x").code, 2);
}
