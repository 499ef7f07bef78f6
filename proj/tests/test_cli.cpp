#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hopflab/cli.hpp"
#include "hopflab/report.hpp"

using namespace hopflab;
using namespace hopflab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hopflab-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_text(const std::string& text, const fs::path& out, std::string* log_text = nullptr) {
  std::ostringstream log;
  const int code = run_config(ExperimentConfig::parse(text), out, log);
  if (log_text) *log_text = log.str();
  return code;
}

}  // namespace

TEST(Config, ParsesCommentsListsAndTypes) {
  const auto c = ExperimentConfig::parse(
      "# header\n"
      "experiment = glue-test\n"
      "cases = 12   # trailing\n"
      "\n"
      "alpha = [0, 1.5, 2]\n"
      "names = a, b ,c\n"
      "flag = yes\n");
  EXPECT_EQ(c.experiment, "glue-test");
  EXPECT_EQ(c.get_int("cases", 0), 12);
  EXPECT_EQ(c.get_doubles("alpha", {}), (std::vector<double>{0, 1.5, 2}));
  EXPECT_EQ(c.get_strings("names", {}), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_NO_THROW(c.reject_unknown());
}

TEST(Config, Errors) {
  EXPECT_THROW(ExperimentConfig::parse("no equals sign\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("a = 1\na = 2\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("bad key = 1\n"), Error);
  const auto c = ExperimentConfig::parse("n = two\nlist = 1, x\nfoo = 1\n");
  EXPECT_THROW(c.get_int("n", 0), Error);
  EXPECT_THROW(c.get_doubles("list", {}), Error);
  try {
    c.reject_unknown();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    EXPECT_NE(std::string(e.what()).find("'foo'"), std::string::npos);
  }
}

TEST(Config, DigestIgnoresOrderAndComments) {
  const auto a = ExperimentConfig::parse("experiment = x\na = 1\nb = 2\n");
  const auto b = ExperimentConfig::parse("# c\nb = 2\nexperiment = x\na = 1 # d\n");
  const auto c = ExperimentConfig::parse("experiment = x\na = 1\nb = 3\n");
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  EXPECT_EQ(split_list("[ ]").size(), 0u);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::CheckFailed), 1);
  EXPECT_EQ(exit_code_for(ErrorKind::Configuration), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::InvalidArgument), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::Divergence), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::NumericalDegeneracy), 3);
}

TEST(Run, UnknownExperimentListsNames) {
  std::string log;
  EXPECT_EQ(run_text("experiment = unknown\n", scratch("unknown"), &log), kExitUsage);
  for (const auto& name : experiment_names()) EXPECT_NE(log.find(name), std::string::npos) << name;
  EXPECT_EQ(experiment_names().size(), 12u);
}

TEST(Run, UnknownKeyIsUsageError) {
  std::string log;
  EXPECT_EQ(run_text("experiment = counterexample\nn = 2\nbogus = 1\n", scratch("bogus"), &log), kExitUsage);
  EXPECT_NE(log.find("bogus"), std::string::npos);
}

TEST(Run, CounterexampleWritesArtifacts) {
  const auto out = scratch("cx");
  ASSERT_EQ(run_text("experiment = counterexample\nn = 2\n", out), kExitPass);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "metadata.json"));
  EXPECT_TRUE(fs::exists(out / "counterexample.csv"));
  for (const auto& e : fs::directory_iterator(out)) EXPECT_NE(e.path().extension(), ".tmp");
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["experiment"], "counterexample");
  EXPECT_EQ(summary["pass"], true);
  const std::string digest = summary["config_digest"];
  std::istringstream csv(slurp(out / "counterexample.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_NE(line.find("config_digest"), std::string::npos);
  while (std::getline(csv, line)) EXPECT_EQ(line.substr(line.size() - digest.size()), digest);
}

TEST(Run, BarrierCertifyWritesCertificates) {
  const auto out = scratch("bar");
  ASSERT_EQ(run_text("experiment = barrier-certify\nn = 2\npairs = 1:1\nalpha = 0, 1\nsamples = 500\n", out),
            kExitPass);
  int certs = 0;
  for (const auto& e : fs::directory_iterator(out / "certificates")) {
    const auto j = nlohmann::json::parse(slurp(e.path()));
    for (const char* key : {"n", "lambda", "Lambda", "alpha", "M", "R", "beta", "c0", "A1", "A2", "A3", "A4", "margins",
                            "samples"})
      EXPECT_TRUE(j.contains(key)) << key;
    ++certs;
  }
  EXPECT_EQ(certs, 2);
}

TEST(Run, FailedCheckExitsOne) {
  const auto out = scratch("cc");
  EXPECT_EQ(run_text("experiment = constants-check\nfield = quadratic\nT = 0.1\n", out), kExitCheckFailed);
}

TEST(Run, DeterministicCsvBodies) {
  const std::string cfg = "experiment = glue-test\ncases = 10\nseed = 17\n";
  const auto a = scratch("det-a"), b = scratch("det-b");
  ASSERT_EQ(run_text(cfg, a), kExitPass);
  ASSERT_EQ(run_text(cfg, b), kExitPass);
  EXPECT_EQ(slurp(a / "glue.csv"), slurp(b / "glue.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  const auto c = scratch("det-c");
  ASSERT_EQ(run_text("experiment = glue-test\ncases = 10\nseed = 18\n", c), kExitPass);
  EXPECT_NE(slurp(a / "glue.csv"), slurp(c / "glue.csv"));
}

TEST(Run, LoadFromFileAndSeedOverride) {
  const auto dir = scratch("file");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "c.conf") << "experiment = glue-test\ncases = 4\n";
  }
  RunRequest req;
  req.subcommand = "glue-test";
  req.config_path = dir / "c.conf";
  req.out_dir = dir / "out";
  req.seed = 3;
  std::ostringstream log;
  EXPECT_EQ(run(req, log), kExitPass);
  req.subcommand = "campanato";
  EXPECT_EQ(run(req, log), kExitUsage);
  req.subcommand = "run";
  EXPECT_EQ(run(req, log), kExitPass);
  req.config_path = dir / "missing.conf";
  EXPECT_EQ(run(req, log), kExitUsage);
}

TEST(Report, FormattingAndCsv) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3)), 1.0 / 3);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  EXPECT_EQ(t.str(), "a,b\n1,\"x,y\"\n");
  EXPECT_THROW(t.add_row({"1"}), Error);
  EXPECT_EQ(ledger_header().size(), 11u);
  EXPECT_EQ(hex_digest(fnv1a("")), "cbf29ce484222325");
}
