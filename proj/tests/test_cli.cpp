#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "lexiscreen/text_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace lexiscreen;

namespace {

// Runs a shell command with output captured to `log`; returns the exit code.
int run(const std::string& cmd, const fs::path& log) {
  const int status = std::system((cmd + " > " + log.string() + " 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli(const fs::path& corpus, const fs::path& out, const std::string& rest) {
  return std::string(LEXISCREEN_CLI) + " --set corpus=" + corpus.string() + " --set out=" + out.string() + " " + rest;
}

std::size_t data_rows(const fs::path& features) {
  std::size_t n = 0;
  for (const auto& line : text::content_lines(text::read_file(features))) {
    if (!line.starts_with("#") && !line.starts_with("id,")) ++n;
  }
  return n;
}

// Small corpora are generated once per test binary.
const fs::path& corpus(int per_class) {
  static std::map<int, fs::path> made;
  auto it = made.find(per_class);
  if (it != made.end()) return it->second;
  const auto dir = fixture::temp_dir("cli_corpus_" + std::to_string(per_class));
  const std::string cmd = std::string(SYNTHCORPUS_CLI) + " corpus --out " + dir.string() +
                          " --per-class " + std::to_string(per_class) + " --duration 6 --seed 4";
  EXPECT_EQ(run(cmd, dir.parent_path() / "cli_synth.log"), 0);
  return made.emplace(per_class, dir).first->second;
}

}  // namespace

TEST(Cli, FeaturizeThreeRecordings) {
  const auto out = fixture::temp_dir("cli_feat3");
  ASSERT_EQ(run(cli(corpus(1), out, "featurize --dump-frames --dump-events"), out / "log"), 0);
  EXPECT_EQ(data_rows(out / "features.csv"), 3u);
  EXPECT_TRUE(fs::exists(out / "dumps" / "rec0001.frames.csv"));
  EXPECT_TRUE(fs::exists(out / "dumps" / "rec0003.events.csv"));
  EXPECT_TRUE(text::read_file(out / "dumps" / "rec0002.frames.csv").starts_with("time,energy,"));
}

TEST(Cli, MissingIntervalsFileFailsOneRecording) {
  const auto src = corpus(1);
  const auto broken = fixture::temp_dir("cli_broken");
  fs::copy(src, broken, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  fs::remove(broken / "recordings" / "rec0002.intervals.csv");
  const auto out = fixture::temp_dir("cli_broken_out");
  EXPECT_EQ(run(cli(broken, out, "featurize"), out / "log"), 1);
  EXPECT_EQ(data_rows(out / "features.csv"), 2u);
  ASSERT_TRUE(fs::exists(out / "errors.log"));
  EXPECT_NE(text::read_file(out / "errors.log").find("rec0002"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  const auto out = fixture::temp_dir("cli_badkey");
  EXPECT_EQ(run(cli(corpus(1), out, "--set no_such_key=3 featurize"), out / "log"), 2);
  EXPECT_NE(text::read_file(out / "log").find("Config"), std::string::npos);
}

TEST(Cli, ConfigDump) {
  const auto out = fixture::temp_dir("cli_dump");
  ASSERT_EQ(run(std::string(LEXISCREEN_CLI) + " --set seed=9 --set tau=0.25 config --dump", out / "log"), 0);
  const auto text = text::read_file(out / "log");
  EXPECT_NE(text.find("seed = 9"), std::string::npos);
  EXPECT_NE(text.find("tau = 0.25"), std::string::npos);
  EXPECT_NE(text.find("vad.min_run = 3"), std::string::npos);
}

TEST(Cli, ConfigFileRoundTrip) {
  const auto out = fixture::temp_dir("cli_cfgfile");
  ASSERT_EQ(run(std::string(LEXISCREEN_CLI) + " --set folds=5 config --dump", out / "dump.cfg"), 0);
  ASSERT_EQ(run(std::string(LEXISCREEN_CLI) + " -c " + (out / "dump.cfg").string() + " config --dump", out / "again.cfg"), 0);
  EXPECT_EQ(text::read_file(out / "dump.cfg"), text::read_file(out / "again.cfg"));
}

TEST(Cli, ClusterEvaluateTrainPredictReport) {
  const auto out = fixture::temp_dir("cli_pipeline");
  const auto c = corpus(4);
  ASSERT_EQ(run(cli(c, out, "featurize"), out / "f.log"), 0);
  ASSERT_EQ(run(cli(c, out, "cluster"), out / "c.log"), 0);
  for (const char* f : {"silhouette.csv", "silhouette.svg", "clusters.csv", "clusters.svg", "centroids.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const std::string labels = "--set labels=" + (c / "labels.csv").string();
  ASSERT_EQ(run(cli(c, out, labels + " --set folds=3 --set plans=one_stage,two_stage_P evaluate"), out / "e.log"), 0);
  for (const char* plan : {"one_stage", "two_stage_P"}) {
    for (const char* f : {"cvreport.json", "confusion.csv", "importance.svg", "predictions.csv"}) {
      EXPECT_TRUE(fs::exists(out / plan / f)) << plan << "/" << f;
    }
    EXPECT_TRUE(text::read_file(out / plan / "confusion.csv").starts_with("actual,C_A,M_A,I_A\n"));
  }
  ASSERT_EQ(run(cli(c, out, labels + " train"), out / "t.log"), 0);
  EXPECT_TRUE(fs::exists(out / "model.rf"));
  ASSERT_EQ(run(cli(c, out, "predict"), out / "p.log"), 0);
  EXPECT_TRUE(fs::exists(out / "predictions.csv"));
  ASSERT_EQ(run(cli(c, out, "asr-align"), out / "a.log"), 0);
  EXPECT_TRUE(fs::exists(out / "asr_classes.csv"));
  ASSERT_EQ(run(cli(c, out, "--set plans=one_stage,two_stage_P report"), out / "r.log"), 0);
  EXPECT_TRUE(fs::exists(out / "report.md"));
}

TEST(Cli, LabelWithoutFeatureRowIsJoinError) {
  const auto out = fixture::temp_dir("cli_join");
  const auto c = corpus(4);
  ASSERT_EQ(run(cli(c, out, "featurize"), out / "f.log"), 0);
  text::write_file(out / "labels.csv", text::read_file(c / "labels.csv") + "rec9999,C_A\n");
  EXPECT_EQ(run(cli(c, out, "--set labels=" + (out / "labels.csv").string() + " --set folds=3 evaluate"), out / "e.log"), 2);
  EXPECT_NE(text::read_file(out / "e.log").find("JoinError"), std::string::npos);
}

TEST(Cli, ByteIdenticalAcrossJobCounts) {
  const auto c = corpus(4);
  std::vector<fs::path> outs;
  for (int jobs : {1, 3, 8}) {
    const auto out = fixture::temp_dir("cli_det_" + std::to_string(jobs));
    const std::string common = "--set labels=" + (c / "labels.csv").string() + " --set folds=3 -j " + std::to_string(jobs);
    ASSERT_EQ(run(cli(c, out, common + " featurize"), out / "f.log"), 0);
    ASSERT_EQ(run(cli(c, out, common + " evaluate"), out / "e.log"), 0);
    outs.push_back(out);
  }
  for (std::size_t k = 1; k < outs.size(); ++k) {
    EXPECT_EQ(text::read_file(outs[k] / "features.csv"), text::read_file(outs[0] / "features.csv"));
    EXPECT_EQ(text::read_file(outs[k] / "two_stage_P" / "cvreport.json"),
              text::read_file(outs[0] / "two_stage_P" / "cvreport.json"));
    EXPECT_EQ(text::read_file(outs[k] / "two_stage_P" / "predictions.csv"),
              text::read_file(outs[0] / "two_stage_P" / "predictions.csv"));
  }
}
