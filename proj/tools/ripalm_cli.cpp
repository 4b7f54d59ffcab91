// ripalm: generate instances, solve them, run benchmark sweeps, render tables.
//
//   ripalm generate --problem qrot --m 1000 --n 1000 --seed 3 --out inst/q1000
//   ripalm solve --instance inst/q1000 --out runs/q1000
//   ripalm bench --problem qrot --sizes 500 1000 --seeds 1 2 3 --methods ripalm dadmm --out bench/
//   ripalm report --input bench/bench.csv
//
// Options can also come from a config file (--config run.toml, sections per
// subcommand); flags on the command line take precedence.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ripalm/cli/commands.hpp"
#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"

namespace {

using namespace ripalm;
using namespace ripalm::cli;

struct Options {
  std::string isa = "auto";

  std::string gen_problem = "qrot";
  GeneratorSpec gen;
  std::string gen_out;

  std::string solve_problem = "qrot";
  std::string solve_method = "ripalm";
  std::string solve_instance;
  RunConfig run;
  bool no_warm_start = false;
  std::string solve_out;

  std::string bench_problem = "qrot";
  std::vector<Index> sizes;
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> methods{"ripalm"};
  BenchSpec bench;
  bool bench_no_warm_start = false;
  std::string bench_out;

  std::string report_input;
};

void add_generator_flags(CLI::App* cmd, GeneratorSpec& gen) {
  cmd->add_option("--m", gen.m, "Rows (qrot) or measurements (bpdn)")->capture_default_str();
  cmd->add_option("--n", gen.n, "Columns (qrot) or dictionary atoms (bpdn)")->capture_default_str();
  cmd->add_option("--lambda", gen.lambda, "Quadratic regularization weight (qrot)")
      ->capture_default_str();
  cmd->add_option("--sparsity", gen.sparsity, "Nonzeros of the planted signal (bpdn)")
      ->capture_default_str();
  cmd->add_option("--delta", gen.delta, "Noise level; kappa = delta |noise| (bpdn)")
      ->capture_default_str();
  cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--image-a", gen.image_a, "Source grayscale grid (qrot from images)");
  cmd->add_option("--image-b", gen.image_b, "Target grayscale grid (qrot from images)");
}

void add_hyper_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--tol", run.tol, "Target KKT residual")->capture_default_str();
  cmd->add_option("--rho", run.rho, "Relative error tolerance of the inner criterion")
      ->capture_default_str();
  cmd->add_option("--tau", run.tau, "Proximal weight")->capture_default_str();
  cmd->add_option("--sigma-cap", run.sigma_cap, "Upper bound of the penalty schedule")
      ->capture_default_str();
  cmd->add_option("--max-iter", run.max_iter, "Outer iteration budget (0: method default)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ripalm: proximal ALM solvers for transport and basis pursuit problems"};
  app.set_config("--config", "", "TOML/INI file with options (command line wins)");
  app.require_subcommand(1);
  Options opt;
  app.add_option("--isa", opt.isa, "Kernel variant")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();

  CLI::App* generate = app.add_subcommand("generate", "Write a random or image instance");
  generate->add_option("--problem", opt.gen_problem, "qrot or bpdn")->capture_default_str();
  add_generator_flags(generate, opt.gen);
  generate->add_option("--out", opt.gen_out, "Instance directory")->required();

  CLI::App* solve = app.add_subcommand("solve", "Solve an instance and write a report");
  solve->add_option("--problem", opt.solve_problem, "Problem when generating")
      ->capture_default_str();
  solve->add_option("--method", opt.solve_method, "ripalm, dadmm or ibpgm-warmstart-only")
      ->capture_default_str();
  solve->add_option("--instance", opt.solve_instance, "Instance directory (else generated)");
  add_generator_flags(solve, opt.run.gen);
  add_hyper_flags(solve, opt.run);
  solve->add_flag("--no-warm-start", opt.no_warm_start, "Start ripALM from zero");
  solve->add_option("--out", opt.solve_out, "Output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "Benchmark sweep over sizes, seeds and methods");
  bench->add_option("--problem", opt.bench_problem, "qrot or bpdn")->capture_default_str();
  bench->add_option("--sizes", opt.sizes, "qrot: m = n; bpdn: n (m = n/10, s = n/50)")
      ->required();
  bench->add_option("--seeds", opt.seeds, "Generator seeds")->capture_default_str();
  bench->add_option("--methods", opt.methods, "Methods to compare")->capture_default_str();
  bench->add_option("--lambda", opt.bench.lambda, "qrot regularization")->capture_default_str();
  bench->add_option("--delta", opt.bench.delta, "bpdn noise level")->capture_default_str();
  add_hyper_flags(bench, opt.bench.base);
  bench->add_flag("--no-warm-start", opt.bench_no_warm_start, "Start ripALM from zero");
  bench->add_option("--out", opt.bench_out, "Output directory for bench.csv / bench.txt")
      ->required();

  CLI::App* report = app.add_subcommand("report", "Render a bench CSV as a table");
  report->add_option("--input", opt.report_input, "bench.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (opt.isa != "auto") {
      kernels::set_isa(opt.isa == "avx2" ? kernels::Isa::kAvx2 : kernels::Isa::kScalar);
    }
    if (*generate) {
      opt.gen.problem = parse_problem(opt.gen_problem);
      return cmd_generate(opt.gen, opt.gen_out, std::cerr);
    }
    if (*solve) {
      opt.run.problem = parse_problem(opt.solve_problem);
      opt.run.method = parse_method(opt.solve_method);
      if (!opt.solve_instance.empty()) opt.run.instance_dir = opt.solve_instance;
      opt.run.warm_start = !opt.no_warm_start;
      opt.run.out_dir = opt.solve_out;
      return cmd_solve(opt.run, std::cerr);
    }
    if (*bench) {
      opt.bench.problem = parse_problem(opt.bench_problem);
      opt.bench.sizes = opt.sizes;
      opt.bench.seeds = opt.seeds;
      for (const std::string& m : opt.methods) opt.bench.methods.push_back(parse_method(m));
      opt.bench.base.warm_start = !opt.bench_no_warm_start;
      return cmd_bench(opt.bench, opt.bench_out, std::cerr);
    }
    return cmd_report(opt.report_input, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}
