#pragma once

// Command layer behind the ripalm executable: instance directories,
// solve runs with report files, benchmark sweeps and table rendering.
//
// Instance directory layout
//   qrot:  C.mat  alpha.vec  beta.vec             + manifest.json
//   bpdn:  D.mat  b.vec      [s_true.vec]         + manifest.json
// manifest.json records the problem, the generator and its parameters, the
// seed, the scalar data (lambda or kappa) and a SHA-256 per data file.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ripalm/bpdn/bpdn.hpp"
#include "ripalm/qrot/instance.hpp"

namespace ripalm::cli {

enum ExitCode : int { kExitOk = 0, kExitMaxIterations = 1, kExitInputError = 2 };

enum class Problem { kQrot, kBpdn };
enum class Method { kRipalm, kDadmm, kIbpgm };

const char* problem_name(Problem p);
const char* method_name(Method m);
/// Throw InputError on unknown names.
Problem parse_problem(const std::string& name);
Method parse_method(const std::string& name);

struct GeneratorSpec {
  Problem problem = Problem::kQrot;
  Index m = 100;
  Index n = 100;
  double lambda = 1.0;   // qrot
  Index sparsity = 20;   // bpdn
  double delta = 0.1;    // bpdn
  std::uint64_t seed = 1;
  std::string image_a;   // qrot from two grayscale grids instead of the mixture
  std::string image_b;
};

/// Throws InputError for unusable parameters (e.g. sparsity > n).
void validate(const GeneratorSpec& spec);

struct Instance {
  Problem problem = Problem::kQrot;
  std::optional<qrot::QrotInstance> qrot;
  std::optional<bpdn::BpdnInstance> bpdn;
  std::optional<Vector> signal;  // bpdn ground truth when generated
  std::string generator;         // "gaussian-mixture", "images", "synthetic", "file"
  std::optional<std::uint64_t> seed;
  GeneratorSpec spec;
};

Instance generate_instance(const GeneratorSpec& spec);

/// Creates `dir` (parents included) and writes data files and manifest.
void write_instance(const Instance& inst, const std::filesystem::path& dir);

/// Reads and checksums an instance directory. Missing or unreadable files
/// raise IoError; malformed content or checksum mismatches raise InputError.
Instance read_instance(const std::filesystem::path& dir);

std::string sha256_file(const std::filesystem::path& path);

struct RunConfig {
  Problem problem = Problem::kQrot;
  Method method = Method::kRipalm;
  std::optional<std::filesystem::path> instance_dir;  // else generated from `gen`
  GeneratorSpec gen;
  double tol = 1e-6;
  double rho = 0.99;
  double tau = 5.0;
  double sigma_cap = 1e4;
  int max_iter = 0;  // <= 0: method default
  bool warm_start = true;
  std::filesystem::path out_dir;
};

/// Throws InputError when the configuration cannot be run.
void validate(const RunConfig& cfg);

struct Breakdown {
  double primal = 0.0;
  double dual = 0.0;
  double comp = 0.0;  // qrot only
  double gap = 0.0;
  double res = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;
};

struct IterationLine {
  int k = 0;
  double sigma = 0.0;
  double tau = 0.0;
  int inner = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

struct RunResult {
  Problem problem = Problem::kQrot;
  Method method = Method::kRipalm;
  bool converged = false;   // solver reached tol and the certificate agrees
  std::string status;       // converged | max_iterations | uncertified | error
  int outer = 0;
  int inner = 0;
  double seconds = 0.0;     // warm start included
  Breakdown residuals;      // solver's own residual routine
  Breakdown certified;      // independent recomputation
  int warm_iterations = 0;
  double warm_residual = 0.0;
  double warm_seconds = 0.0;
  std::vector<IterationLine> history;
  std::vector<std::string> warnings;
  // Solution: qrot (u, v, plan) or bpdn (y, s, t).
  Vector first;
  Vector second;
  Vector third;
  Matrix plan;
};

/// Runs the configured method on an in-memory instance.
RunResult run(const RunConfig& cfg, const Instance& inst);

/// Writes solution files and report.json into cfg.out_dir.
void write_run(const RunConfig& cfg, const Instance& inst, const RunResult& result);

int cmd_generate(const GeneratorSpec& spec, const std::filesystem::path& out, std::ostream& log);
/// Loads/generates and validates everything before the first write.
int cmd_solve(const RunConfig& cfg, std::ostream& log);

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------
struct BenchRow {
  std::string instance;  // "<problem>-<size>-s<seed>" or "mean"
  Problem problem = Problem::kQrot;
  Index size = 0;
  std::optional<std::uint64_t> seed;  // empty on aggregate rows
  Method method = Method::kRipalm;
  std::string status;
  double res = 0.0;
  double outer = 0.0;  // means on aggregate rows
  double inner = 0.0;
  double seconds = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double sigma_cap = 0.0;
  double tol = 0.0;
  bool warm_start = true;
};

struct BenchSpec {
  Problem problem = Problem::kQrot;
  std::vector<Index> sizes;  // qrot: m = n = size; bpdn: (m, n, s) = (size/10, size, size/50)
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  RunConfig base;  // tolerances and hyperparameters
  double lambda = 1.0;
  double delta = 0.1;
};

void validate(const BenchSpec& spec);

/// One row per (size, seed, method) in that order, then one aggregate row
/// per (size, method). Failed runs keep their row with status "error: ...".
std::vector<BenchRow> run_bench(const BenchSpec& spec, std::ostream* progress = nullptr);

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out);
std::vector<BenchRow> read_csv(std::istream& in);
/// Fixed-width table with the residual, "#" as outer (inner) and time.
void render_table(const std::vector<BenchRow>& rows, std::ostream& out);

int cmd_bench(const BenchSpec& spec, const std::filesystem::path& out, std::ostream& log);
int cmd_report(const std::filesystem::path& csv, std::ostream& out);

}  // namespace ripalm::cli
