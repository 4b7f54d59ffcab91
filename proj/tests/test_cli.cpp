#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "ripalm/cli/commands.hpp"
#include "ripalm/error.hpp"
#include "ripalm/numerics/io.hpp"

namespace ripalm::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ripalm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the executable with `args`; returns its exit status.
  int ripalm(const std::string& args) const {
    const std::string cmd = std::string(RIPALM_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  json load_json(const fs::path& path) const {
    std::ifstream in(path);
    return json::parse(in);
  }

  fs::path dir_;
};

TEST(Names, RoundTrip) {
  for (Problem p : {Problem::kQrot, Problem::kBpdn}) EXPECT_EQ(parse_problem(problem_name(p)), p);
  for (Method m : {Method::kRipalm, Method::kDadmm, Method::kIbpgm}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_THROW(parse_problem("lasso"), InputError);
  EXPECT_THROW(parse_method("sgd"), InputError);
}

TEST_F(CliTest, GenerateThenReadIsBitExact) {
  for (Problem p : {Problem::kQrot, Problem::kBpdn}) {
    GeneratorSpec spec;
    spec.problem = p;
    spec.m = 12;
    spec.n = 30;
    spec.sparsity = 3;
    spec.seed = 9;
    const Instance a = generate_instance(spec);
    const fs::path where = dir_ / problem_name(p);
    write_instance(a, where);
    const Instance b = read_instance(where);
    ASSERT_EQ(b.problem, p);
    if (p == Problem::kQrot) {
      EXPECT_EQ(a.qrot->cost, b.qrot->cost);
      EXPECT_EQ(a.qrot->alpha, b.qrot->alpha);
      EXPECT_EQ(a.qrot->beta, b.qrot->beta);
      EXPECT_EQ(a.qrot->lambda, b.qrot->lambda);
    } else {
      EXPECT_EQ(a.bpdn->dict, b.bpdn->dict);
      EXPECT_EQ(a.bpdn->b, b.bpdn->b);
      EXPECT_EQ(a.bpdn->kappa, b.bpdn->kappa);
      ASSERT_TRUE(b.signal.has_value());
      EXPECT_EQ(*a.signal, *b.signal);
    }
    EXPECT_EQ(b.seed, std::optional<std::uint64_t>(9));
  }
}

TEST_F(CliTest, ChecksumMismatchRejected) {
  GeneratorSpec spec;
  spec.m = 4;
  spec.n = 3;
  write_instance(generate_instance(spec), dir_ / "inst");
  Vector alpha = io::read_vector(dir_ / "inst" / "alpha.vec");
  std::swap(alpha[0], alpha[1]);
  io::write_vector(dir_ / "inst" / "alpha.vec", alpha);
  EXPECT_THROW(read_instance(dir_ / "inst"), InputError);
}

TEST_F(CliTest, MissingDirectoryIsIoError) {
  EXPECT_THROW(read_instance(dir_ / "nowhere"), IoError);
}

TEST_F(CliTest, InvalidSpecWritesNothing) {
  EXPECT_EQ(ripalm("generate --problem bpdn --n 10 --sparsity 11 --out " +
                   (dir_ / "bad").string()),
            kExitInputError);
  EXPECT_FALSE(fs::exists(dir_ / "bad"));
}

TEST_F(CliTest, SolveToyInstance) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(ripalm("solve --m 2 --n 2 --seed 3 --out " + out.string()), kExitOk);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report["status"], "converged");
  EXPECT_LT(report["certified"]["res"].get<double>(), 1e-6);
  EXPECT_TRUE(fs::exists(out / "X.mat"));
  EXPECT_TRUE(fs::exists(out / "u.vec"));
}

TEST_F(CliTest, InfiniteToleranceStopsImmediately) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(ripalm("solve --m 5 --n 4 --tol inf --no-warm-start --out " + out.string()), kExitOk);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report["outer_iterations"], 0);
  EXPECT_TRUE(report["history"].empty());
}

TEST_F(CliTest, MissingInstanceLeavesNoOutput) {
  const fs::path out = dir_ / "run";
  EXPECT_EQ(ripalm("solve --instance " + (dir_ / "nope").string() + " --out " + out.string()),
            kExitInputError);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, SolveFromInstanceDirectory) {
  ASSERT_EQ(ripalm("generate --problem bpdn --m 20 --n 100 --sparsity 4 --seed 2 --out " +
                   (dir_ / "inst").string()),
            kExitOk);
  const fs::path out = dir_ / "run";
  ASSERT_EQ(ripalm("--isa scalar solve --problem bpdn --instance " + (dir_ / "inst").string() +
                   " --out " + out.string()),
            kExitOk);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report["isa"], "scalar");
  EXPECT_TRUE(report.contains("vs_s_true"));
  EXPECT_EQ(io::read_vector(out / "s.vec").size(), 100);
}

TEST_F(CliTest, SmallTauWarns) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(ripalm("solve --m 6 --n 6 --tau 3 --out " + out.string()), kExitOk);
  EXPECT_EQ(load_json(out / "report.json")["warnings"].size(), 1u);
}

TEST_F(CliTest, ConfigFileAndOverride) {
  std::ofstream(dir_ / "run.toml") << "[solve]\nm = 5\nn = 7\ntol = 1e-7\n";
  const fs::path out = dir_ / "run";
  ASSERT_EQ(ripalm("--config " + (dir_ / "run.toml").string() + " solve --tol 1e-5 --out " +
                   out.string()),
            kExitOk);
  const json report = load_json(out / "report.json");
  EXPECT_EQ(report["size"]["n"], 7);
  EXPECT_EQ(report["hyperparameters"]["tol"].get<double>(), 1e-5);
}

TEST_F(CliTest, UnknownFlagIsInputError) {
  EXPECT_EQ(ripalm("solve --bogus 1 --out x"), kExitInputError);
  EXPECT_EQ(ripalm("--help"), kExitOk);
}

BenchSpec small_bench() {
  BenchSpec spec;
  spec.problem = Problem::kQrot;
  spec.sizes = {8};
  spec.seeds = {1, 2, 3};
  spec.methods = {Method::kRipalm, Method::kIbpgm};
  return spec;
}

TEST(Bench, RowsPerSeedMethodPlusMeans) {
  const std::vector<BenchRow> rows = run_bench(small_bench());
  ASSERT_EQ(rows.size(), 8u);
  int means = 0;
  for (const BenchRow& r : rows) {
    if (r.instance == "mean") {
      ++means;
      EXPECT_FALSE(r.seed.has_value());
    }
  }
  EXPECT_EQ(means, 2);
  EXPECT_EQ(rows.front().method, Method::kRipalm);
  EXPECT_EQ(rows.front().status, "converged");
}

TEST(Bench, DeterministicAndCsvRoundTrip) {
  const std::vector<BenchRow> a = run_bench(small_bench());
  const std::vector<BenchRow> b = run_bench(small_bench());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].res, b[i].res);
    EXPECT_EQ(a[i].outer, b[i].outer);
    EXPECT_EQ(a[i].inner, b[i].inner);
  }
  std::stringstream csv;
  write_csv(a, csv);
  const std::vector<BenchRow> back = read_csv(csv);
  ASSERT_EQ(back.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(back[i].instance, a[i].instance);
    EXPECT_EQ(back[i].method, a[i].method);
    EXPECT_EQ(back[i].seed, a[i].seed);
    EXPECT_EQ(back[i].status, a[i].status);
    EXPECT_EQ(back[i].res, a[i].res);
    EXPECT_EQ(back[i].outer, a[i].outer);
  }
  std::ostringstream table;
  render_table(a, table);
  EXPECT_NE(table.str().find("ripalm"), std::string::npos);
}

TEST_F(CliTest, BenchAndReportCommands) {
  ASSERT_EQ(ripalm("bench --problem qrot --sizes 6 --seeds 1 2 --methods ripalm --out " +
                   (dir_ / "bench").string()),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "bench" / "bench.txt"));
  ASSERT_EQ(ripalm("report --input " + (dir_ / "bench" / "bench.csv").string()), kExitOk);
  std::ifstream in(dir_ / "stdout.txt");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("mean"), std::string::npos);
}

}  // namespace
}  // namespace ripalm::cli
