#include "ripalm/cli/commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "ripalm/baselines/dadmm.hpp"
#include "ripalm/baselines/ibpgm.hpp"
#include "ripalm/cli/pipeline.hpp"
#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"
#include "ripalm/numerics/io.hpp"
#include "ripalm/qrot/kkt.hpp"

namespace ripalm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

template <typename T>
T manifest_get(const json& manifest, const char* key, const fs::path& path) {
  if (!manifest.contains(key)) {
    throw InputError("'" + path.string() + "': missing key '" + key + "'");
  }
  try {
    return manifest.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("'" + path.string() + "': key '" + key + "' has the wrong type");
  }
}

Breakdown from(const qrot::QrotResiduals& r) {
  return {r.primal, r.dual, r.comp, r.gap, r.res, r.pobj, r.dobj};
}

Breakdown from(const bpdn::BpdnResiduals& r) {
  return {r.primal, r.dual, 0.0, r.gap, r.res, r.pobj, r.dobj};
}

json to_json(const Breakdown& b, Problem problem) {
  json out = {{"primal", b.primal}, {"dual", b.dual}, {"gap", b.gap},
              {"res", b.res},       {"pobj", b.pobj}, {"dobj", b.dobj}};
  if (problem == Problem::kQrot) out["comp"] = b.comp;
  return out;
}

RipalmConfig ripalm_config(const RunConfig& cfg) {
  RipalmConfig out = default_schedules();
  out.rho = cfg.rho;
  out.tau = constant_schedule(cfg.tau);
  out.sigma = capped_geometric_sigma(1.5, 1e-4, cfg.sigma_cap);
  out.tol = cfg.tol;
  if (cfg.max_iter > 0) out.max_outer = cfg.max_iter;
  return out;
}

std::vector<std::string> data_files(Problem problem, bool with_signal) {
  if (problem == Problem::kQrot) return {"C.mat", "alpha.vec", "beta.vec"};
  std::vector<std::string> files{"D.mat", "b.vec"};
  if (with_signal) files.emplace_back("s_true.vec");
  return files;
}

std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

std::string fixed(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

}  // namespace

const char* problem_name(Problem p) { return p == Problem::kQrot ? "qrot" : "bpdn"; }

const char* method_name(Method m) {
  switch (m) {
    case Method::kRipalm:
      return "ripalm";
    case Method::kDadmm:
      return "dadmm";
    case Method::kIbpgm:
      return "ibpgm-warmstart-only";
  }
  return "unknown";
}

Problem parse_problem(const std::string& name) {
  if (name == "qrot") return Problem::kQrot;
  if (name == "bpdn") return Problem::kBpdn;
  throw InputError("unknown problem '" + name + "' (expected qrot or bpdn)");
}

Method parse_method(const std::string& name) {
  if (name == "ripalm") return Method::kRipalm;
  if (name == "dadmm") return Method::kDadmm;
  if (name == "ibpgm-warmstart-only" || name == "ibpgm") return Method::kIbpgm;
  throw InputError("unknown method '" + name + "' (expected ripalm, dadmm or ibpgm-warmstart-only)");
}

void validate(const GeneratorSpec& spec) {
  if (spec.image_a.empty() != spec.image_b.empty()) {
    throw InputError("image instances need both --image-a and --image-b");
  }
  const bool images = !spec.image_a.empty();
  if (images && spec.problem != Problem::kQrot) {
    throw InputError("image instances are transport problems");
  }
  if (!images && (spec.m < 1 || spec.n < 1)) throw InputError("m and n must be positive");
  if (spec.problem == Problem::kQrot) {
    if (!std::isfinite(spec.lambda) || spec.lambda < 0.0) {
      throw InputError("lambda must be finite and nonnegative");
    }
  } else {
    if (spec.sparsity < 0 || spec.sparsity > spec.n) {
      throw InputError("sparsity must lie in [0, n]");
    }
    if (!std::isfinite(spec.delta) || spec.delta < 0.0) {
      throw InputError("delta must be finite and nonnegative");
    }
  }
}

Instance generate_instance(const GeneratorSpec& spec) {
  validate(spec);
  Instance out;
  out.problem = spec.problem;
  out.spec = spec;
  if (spec.problem == Problem::kQrot) {
    if (!spec.image_a.empty()) {
      out.qrot = qrot::image_instance(io::read_grid(spec.image_a), io::read_grid(spec.image_b),
                                      spec.lambda);
      out.generator = "images";
      out.spec.m = out.qrot->m();
      out.spec.n = out.qrot->n();
    } else {
      out.qrot = qrot::gaussian_mixture_instance(spec.m, spec.n, spec.seed, spec.lambda);
      out.generator = "gaussian-mixture";
      out.seed = spec.seed;
    }
  } else {
    bpdn::SyntheticBpdn syn =
        bpdn::synthetic_instance(spec.m, spec.n, spec.sparsity, spec.delta, spec.seed);
    out.bpdn = std::move(syn.instance);
    out.signal = std::move(syn.signal);
    out.generator = "synthetic";
    out.seed = spec.seed;
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                    &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest initialization failed");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void write_instance(const Instance& inst, const fs::path& dir) {
  ensure_dir(dir);
  json params;
  json manifest = {{"problem", problem_name(inst.problem)}, {"generator", inst.generator}};
  manifest["seed"] = inst.seed ? json(*inst.seed) : json(nullptr);
  if (inst.problem == Problem::kQrot) {
    const qrot::QrotInstance& q = *inst.qrot;
    io::write_matrix(dir / "C.mat", q.cost);
    io::write_vector(dir / "alpha.vec", q.alpha);
    io::write_vector(dir / "beta.vec", q.beta);
    params = {{"m", q.m()}, {"n", q.n()}, {"lambda", q.lambda}};
    if (inst.generator == "images") {
      params["image_a"] = inst.spec.image_a;
      params["image_b"] = inst.spec.image_b;
    }
    manifest["lambda"] = q.lambda;
  } else {
    const bpdn::BpdnInstance& b = *inst.bpdn;
    io::write_matrix(dir / "D.mat", b.dict);
    io::write_vector(dir / "b.vec", b.b);
    if (inst.signal) io::write_vector(dir / "s_true.vec", *inst.signal);
    params = {{"m", b.m()}, {"n", b.n()}, {"kappa", b.kappa}};
    if (inst.generator == "synthetic") {
      params["sparsity"] = inst.spec.sparsity;
      params["delta"] = inst.spec.delta;
    }
    manifest["kappa"] = b.kappa;
  }
  manifest["params"] = params;
  json files = json::object();
  for (const std::string& name : data_files(inst.problem, inst.signal.has_value())) {
    files[name] = sha256_file(dir / name);
  }
  manifest["files"] = files;
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Instance read_instance(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json manifest = read_json(manifest_path);
  Instance out;
  out.problem = parse_problem(manifest_get<std::string>(manifest, "problem", manifest_path));
  out.generator = manifest.value("generator", std::string("file"));
  if (manifest.contains("seed") && !manifest["seed"].is_null()) {
    out.seed = manifest_get<std::uint64_t>(manifest, "seed", manifest_path);
  }
  const json files = manifest_get<json>(manifest, "files", manifest_path);
  const bool with_signal = out.problem == Problem::kBpdn && files.contains("s_true.vec");
  for (const std::string& name : data_files(out.problem, with_signal)) {
    if (!files.contains(name)) {
      throw InputError("'" + manifest_path.string() + "': no checksum for " + name);
    }
    const std::string expected = files[name].get<std::string>();
    if (sha256_file(dir / name) != expected) {
      throw InputError("'" + (dir / name).string() + "': checksum mismatch");
    }
  }
  if (out.problem == Problem::kQrot) {
    qrot::QrotInstance q;
    q.cost = io::read_matrix(dir / "C.mat");
    q.alpha = io::read_vector(dir / "alpha.vec");
    q.beta = io::read_vector(dir / "beta.vec");
    q.lambda = manifest_get<double>(manifest, "lambda", manifest_path);
    qrot::validate(q);
    out.spec.m = q.m();
    out.spec.n = q.n();
    out.spec.lambda = q.lambda;
    out.qrot = std::move(q);
  } else {
    bpdn::BpdnInstance b;
    b.dict = io::read_matrix(dir / "D.mat");
    b.b = io::read_vector(dir / "b.vec");
    b.kappa = manifest_get<double>(manifest, "kappa", manifest_path);
    bpdn::validate(b);
    if (with_signal) {
      Vector s = io::read_vector(dir / "s_true.vec");
      if (s.size() != b.n()) throw InputError("s_true.vec does not match the dictionary width");
      out.signal = std::move(s);
    }
    out.spec.m = b.m();
    out.spec.n = b.n();
    out.bpdn = std::move(b);
  }
  out.spec.problem = out.problem;
  if (out.seed) out.spec.seed = *out.seed;
  return out;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InputError("tolerance must be positive");
  if (!(cfg.sigma_cap > 0.0) || !std::isfinite(cfg.sigma_cap)) {
    throw InputError("sigma cap must be positive and finite");
  }
  if (cfg.method == Method::kIbpgm && cfg.problem != Problem::kQrot) {
    throw InputError("ibpgm-warmstart-only applies to qrot instances only");
  }
  if (cfg.method == Method::kRipalm) parameter_warnings(ripalm_config(cfg));
  if (!cfg.instance_dir) validate(GeneratorSpec{cfg.gen});
}

RunResult run(const RunConfig& cfg, const Instance& inst) {
  RunConfig effective = cfg;
  effective.problem = inst.problem;
  validate(effective);

  RunResult out;
  out.problem = inst.problem;
  out.method = cfg.method;
  bool solver_converged = false;
  std::string solver_status = "max_iterations";

  if (cfg.method == Method::kRipalm) {
    const RipalmConfig rcfg = ripalm_config(cfg);
    out.warnings = parameter_warnings(rcfg);
    const Observer observer = [&out](const RipalmState&, const IterationRecord& rec) {
      out.history.push_back(
          {rec.k, rec.sigma, rec.tau, rec.inner_iterations, rec.lhs, rec.rhs, rec.residual});
    };
    auto fill = [&](const SolveReport& report, const WarmStartInfo& warm, double seconds) {
      solver_converged = report.status == SolveStatus::kConverged;
      solver_status = status_name(report.status);
      if (!report.stall_reason.empty()) out.warnings.push_back(report.stall_reason);
      out.outer = static_cast<int>(report.iterations.size());
      out.inner = report.total_inner;
      out.seconds = seconds;
      out.warm_iterations = warm.iterations;
      out.warm_residual = warm.residual;
      out.warm_seconds = warm.seconds;
    };
    if (inst.problem == Problem::kQrot) {
      QrotRunOptions opts;
      opts.cfg = rcfg;
      opts.warm_start = cfg.warm_start;
      QrotRun r = run_qrot_ripalm(*inst.qrot, opts, observer);
      fill(r.solution.report, r.warm, r.seconds);
      out.residuals = from(r.solution.residuals);
      out.first = std::move(r.solution.u);
      out.second = std::move(r.solution.v);
      out.plan = std::move(r.solution.plan);
    } else {
      BpdnRunOptions opts;
      opts.cfg = rcfg;
      opts.warm_start = cfg.warm_start;
      BpdnRun r = run_bpdn_ripalm(*inst.bpdn, opts, observer);
      fill(r.solution.report, r.warm, r.seconds);
      out.residuals = from(r.solution.residuals);
      out.first = std::move(r.solution.y);
      out.second = std::move(r.solution.s);
      out.third = std::move(r.solution.t);
    }
  } else if (cfg.method == Method::kDadmm) {
    baselines::AdmmConfig acfg;
    acfg.tol = cfg.tol;
    if (cfg.max_iter > 0) acfg.max_iter = cfg.max_iter;
    if (inst.problem == Problem::kQrot) {
      baselines::QrotAdmmResult r = baselines::dadmm_qrot(*inst.qrot, acfg);
      solver_converged = r.report.converged;
      out.outer = r.report.iterations;
      out.seconds = r.report.seconds;
      out.residuals = from(r.residuals);
      out.first = std::move(r.state.u);
      out.second = std::move(r.state.v);
      out.plan = std::move(r.state.x);
    } else {
      baselines::BpdnAdmmResult r = baselines::dadmm_bpdn(*inst.bpdn, acfg);
      solver_converged = r.report.converged;
      out.outer = r.report.iterations;
      out.seconds = r.report.seconds;
      out.residuals = from(r.residuals);
      out.first = std::move(r.state.y);
      out.second = std::move(r.state.s);
      out.third = std::move(r.state.t);
    }
  } else {
    baselines::IbpgmConfig icfg;
    icfg.tol = cfg.tol;
    if (cfg.max_iter > 0) icfg.max_iter = cfg.max_iter;
    baselines::IbpgmResult r = baselines::ibpgm_warmstart(*inst.qrot, icfg);
    solver_converged = r.residuals.res < cfg.tol;
    out.outer = r.iterations;
    out.seconds = r.seconds;
    out.residuals = from(r.residuals);
    out.first = std::move(r.f);
    out.second = std::move(r.g);
    out.plan = std::move(r.plan);
  }

  if (inst.problem == Problem::kQrot) {
    out.certified = from(qrot::certify(*inst.qrot, out.first, out.second, out.plan));
  } else {
    out.certified = from(bpdn::certify(*inst.bpdn, out.second, out.third, out.first));
  }
  out.converged = solver_converged && out.certified.res < cfg.tol;
  if (out.converged) {
    out.status = "converged";
  } else if (solver_converged) {
    out.status = "uncertified";
  } else {
    out.status = solver_status;
  }
  return out;
}

void write_run(const RunConfig& cfg, const Instance& inst, const RunResult& result) {
  ensure_dir(cfg.out_dir);
  if (inst.problem == Problem::kQrot) {
    io::write_vector(cfg.out_dir / "u.vec", result.first);
    io::write_vector(cfg.out_dir / "v.vec", result.second);
    io::write_matrix(cfg.out_dir / "X.mat", result.plan);
  } else {
    io::write_vector(cfg.out_dir / "y.vec", result.first);
    io::write_vector(cfg.out_dir / "s.vec", result.second);
    io::write_vector(cfg.out_dir / "t.vec", result.third);
  }

  json report = {
      {"problem", problem_name(inst.problem)},
      {"method", method_name(result.method)},
      {"status", result.status},
      {"converged", result.converged},
      {"generator", inst.generator},
      {"seed", inst.seed ? json(*inst.seed) : json(nullptr)},
      {"instance", cfg.instance_dir ? json(cfg.instance_dir->string()) : json(nullptr)},
      {"size", {{"m", inst.spec.m}, {"n", inst.spec.n}}},
      {"isa", kernels::isa_name(kernels::active_isa())},
      {"hyperparameters",
       {{"tol", cfg.tol},
        {"rho", cfg.rho},
        {"tau", cfg.tau},
        {"sigma_cap", cfg.sigma_cap},
        {"max_iter", cfg.max_iter},
        {"warm_start", cfg.warm_start}}},
      {"outer_iterations", result.outer},
      {"inner_iterations", result.inner},
      {"seconds", result.seconds},
      {"residuals", to_json(result.residuals, inst.problem)},
      {"certified", to_json(result.certified, inst.problem)},
      {"warnings", result.warnings},
  };
  if (result.method == Method::kRipalm && cfg.warm_start) {
    report["warm_start"] = {{"iterations", result.warm_iterations},
                            {"residual", result.warm_residual},
                            {"seconds", result.warm_seconds}};
  }
  if (inst.problem == Problem::kBpdn && inst.signal) {
    const bpdn::FeasNobj fn = bpdn::feas_nobj(*inst.bpdn, result.second, *inst.signal);
    report["vs_s_true"] = {{"feas", fn.feas}, {"nobj", fn.nobj}};
  }
  json history = json::array();
  for (const IterationLine& line : result.history) {
    history.push_back({{"k", line.k},
                       {"sigma", line.sigma},
                       {"tau", line.tau},
                       {"inner", line.inner},
                       {"lhs", line.lhs},
                       {"rhs", line.rhs},
                       {"residual", line.residual}});
  }
  report["history"] = history;
  open_out(cfg.out_dir / "report.json") << report.dump(2) << '\n';
}

int cmd_generate(const GeneratorSpec& spec, const fs::path& out, std::ostream& log) {
  try {
    const Instance inst = generate_instance(spec);
    write_instance(inst, out);
    log << "wrote " << problem_name(inst.problem) << " instance (" << inst.spec.m << " x "
        << inst.spec.n << ") to " << out.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_solve(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  Instance inst;
  try {
    if (cfg.out_dir.empty()) throw InputError("an output directory is required");
    if (cfg.instance_dir) {
      inst = read_instance(*cfg.instance_dir);
      cfg.problem = inst.problem;
    } else {
      cfg.gen.problem = cfg.problem;
      validate(cfg);
      inst = generate_instance(cfg.gen);
      cfg.gen = inst.spec;
    }
    validate(cfg);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  RunResult result;
  try {
    result = run(cfg, inst);
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitMaxIterations;
  }
  for (const std::string& w : result.warnings) log << "warning: " << w << '\n';

  try {
    write_run(cfg, inst, result);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  log << method_name(result.method) << " " << result.status << ": res " << sci(result.residuals.res)
      << " (certified " << sci(result.certified.res) << "), " << result.outer << " outer";
  if (result.method == Method::kRipalm) log << " / " << result.inner << " inner";
  log << ", " << fixed(result.seconds, 2) << " s\n";
  return result.converged ? kExitOk : kExitMaxIterations;
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

void validate(const BenchSpec& spec) {
  if (spec.sizes.empty() || spec.seeds.empty() || spec.methods.empty()) {
    throw InputError("bench needs at least one size, seed and method");
  }
  const Index min_size = spec.problem == Problem::kQrot ? 1 : 50;
  for (Index size : spec.sizes) {
    if (size < min_size) {
      throw InputError("bench size " + std::to_string(size) + " is below the minimum " +
                       std::to_string(min_size));
    }
  }
  for (Method m : spec.methods) {
    RunConfig cfg = spec.base;
    cfg.problem = spec.problem;
    cfg.method = m;
    cfg.instance_dir.reset();
    cfg.gen.problem = spec.problem;
    validate(cfg);
  }
}

std::vector<BenchRow> run_bench(const BenchSpec& spec, std::ostream* progress) {
  validate(spec);
  std::vector<BenchRow> rows;
  for (Index size : spec.sizes) {
    std::vector<BenchRow> block;
    for (std::uint64_t seed : spec.seeds) {
      GeneratorSpec gen;
      gen.problem = spec.problem;
      gen.seed = seed;
      gen.lambda = spec.lambda;
      gen.delta = spec.delta;
      if (spec.problem == Problem::kQrot) {
        gen.m = gen.n = size;
      } else {
        gen.m = size / 10;
        gen.n = size;
        gen.sparsity = size / 50;
      }
      const std::string id =
          std::string(problem_name(spec.problem)) + "-" + std::to_string(size) + "-s" + std::to_string(seed);
      std::optional<Instance> inst;
      std::string gen_error;
      try {
        inst = generate_instance(gen);
      } catch (const Error& e) {
        gen_error = e.what();
      }
      for (Method method : spec.methods) {
        BenchRow row;
        row.instance = id;
        row.problem = spec.problem;
        row.size = size;
        row.seed = seed;
        row.method = method;
        row.rho = spec.base.rho;
        row.tau = spec.base.tau;
        row.sigma_cap = spec.base.sigma_cap;
        row.tol = spec.base.tol;
        row.warm_start = spec.base.warm_start;
        try {
          if (!inst) throw Error(gen_error);
          RunConfig cfg = spec.base;
          cfg.problem = spec.problem;
          cfg.method = method;
          cfg.gen = gen;
          cfg.instance_dir.reset();
          const RunResult r = run(cfg, *inst);
          row.status = r.status;
          row.res = r.residuals.res;
          row.outer = r.outer;
          row.inner = r.inner;
          row.seconds = r.seconds;
          row.primal = r.residuals.primal;
          row.dual = r.residuals.dual;
          row.gap = r.residuals.gap;
        } catch (const Error& e) {
          row.status = std::string("error: ") + e.what();
          row.res = row.outer = row.inner = row.seconds = kNan;
          row.primal = row.dual = row.gap = kNan;
        }
        if (progress) {
          *progress << id << " " << method_name(method) << ": " << row.status << " res "
                    << sci(row.res) << " in " << fixed(row.seconds, 2) << " s\n";
        }
        block.push_back(row);
      }
    }
    rows.insert(rows.end(), block.begin(), block.end());
    for (Method method : spec.methods) {
      BenchRow mean;
      mean.instance = "mean";
      mean.problem = spec.problem;
      mean.size = size;
      mean.method = method;
      mean.rho = spec.base.rho;
      mean.tau = spec.base.tau;
      mean.sigma_cap = spec.base.sigma_cap;
      mean.tol = spec.base.tol;
      mean.warm_start = spec.base.warm_start;
      int total = 0;
      int ok = 0;
      int converged = 0;
      for (const BenchRow& row : block) {
        if (row.method != method) continue;
        ++total;
        if (row.status.rfind("error", 0) == 0) continue;
        ++ok;
        if (row.status == "converged") ++converged;
        mean.res += row.res;
        mean.outer += row.outer;
        mean.inner += row.inner;
        mean.seconds += row.seconds;
        mean.primal += row.primal;
        mean.dual += row.dual;
        mean.gap += row.gap;
      }
      const double scale = ok > 0 ? 1.0 / ok : kNan;
      mean.res *= scale;
      mean.outer *= scale;
      mean.inner *= scale;
      mean.seconds *= scale;
      mean.primal *= scale;
      mean.dual *= scale;
      mean.gap *= scale;
      mean.status = std::to_string(converged) + "/" + std::to_string(total) + " converged";
      rows.push_back(mean);
    }
  }
  return rows;
}

namespace {

const char* kCsvHeader =
    "instance,problem,size,seed,method,status,res,outer,inner,seconds,primal,dual,gap,rho,tau,"
    "sigma_cap,tol,warm_start";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double csv_double(const std::string& field) {
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || *end != '\0') throw InputError("csv: malformed number '" + field + "'");
  return value;
}

}  // namespace

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const BenchRow& r : rows) {
    out << r.instance << ',' << problem_name(r.problem) << ',' << r.size << ','
        << (r.seed ? std::to_string(*r.seed) : std::string()) << ',' << method_name(r.method) << ','
        << csv_safe(r.status) << ',' << io::format_double(r.res) << ','
        << io::format_double(r.outer) << ',' << io::format_double(r.inner) << ','
        << io::format_double(r.seconds) << ',' << io::format_double(r.primal) << ','
        << io::format_double(r.dual) << ',' << io::format_double(r.gap) << ','
        << io::format_double(r.rho) << ',' << io::format_double(r.tau) << ','
        << io::format_double(r.sigma_cap) << ',' << io::format_double(r.tol) << ','
        << (r.warm_start ? 1 : 0) << '\n';
  }
}

std::vector<BenchRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != split_csv(kCsvHeader)) {
    throw InputError("csv: unexpected header");
  }
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 18) throw InputError("csv: expected 18 fields, got " + std::to_string(f.size()));
    BenchRow r;
    r.instance = f[0];
    r.problem = parse_problem(f[1]);
    r.size = static_cast<Index>(csv_double(f[2]));
    if (!f[3].empty()) r.seed = std::stoull(f[3]);
    r.method = parse_method(f[4]);
    r.status = f[5];
    r.res = csv_double(f[6]);
    r.outer = csv_double(f[7]);
    r.inner = csv_double(f[8]);
    r.seconds = csv_double(f[9]);
    r.primal = csv_double(f[10]);
    r.dual = csv_double(f[11]);
    r.gap = csv_double(f[12]);
    r.rho = csv_double(f[13]);
    r.tau = csv_double(f[14]);
    r.sigma_cap = csv_double(f[15]);
    r.tol = csv_double(f[16]);
    r.warm_start = f[17] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

void render_table(const std::vector<BenchRow>& rows, std::ostream& out) {
  auto count = [](double x, bool aggregate) {
    return aggregate ? fixed(x, 1) : fixed(x, 0);
  };
  out << std::left << std::setw(22) << "instance" << std::setw(22) << "method" << std::right
      << std::setw(10) << "res" << std::setw(18) << "#" << std::setw(10) << "time"
      << "  status\n";
  for (const BenchRow& r : rows) {
    const bool aggregate = !r.seed.has_value();
    std::string iters = count(r.outer, aggregate);
    if (r.method == Method::kRipalm) iters += " (" + count(r.inner, aggregate) + ")";
    const std::string label = aggregate ? "mean " + std::to_string(r.size) : r.instance;
    out << std::left << std::setw(22) << label << std::setw(22) << method_name(r.method)
        << std::right << std::setw(10) << sci(r.res) << std::setw(18) << iters << std::setw(10)
        << fixed(r.seconds, 2) << "  " << r.status << '\n';
  }
}

int cmd_bench(const BenchSpec& spec, const fs::path& out, std::ostream& log) {
  try {
    validate(spec);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  try {
    ensure_dir(out);
    const std::vector<BenchRow> rows = run_bench(spec, &log);
    {
      std::ofstream csv = open_out(out / "bench.csv");
      write_csv(rows, csv);
    }
    std::ofstream table = open_out(out / "bench.txt");
    render_table(rows, table);
    render_table(rows, log);
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_report(const fs::path& csv_path, std::ostream& out) {
  try {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open '" + csv_path.string() + "' for reading");
    render_table(read_csv(in), out);
    return kExitOk;
  } catch (const Error& e) {
    out << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace ripalm::cli
