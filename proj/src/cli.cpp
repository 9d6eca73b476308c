#include "pinn/cli.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pinn/bench.hpp"
#include "pinn/parse.hpp"
#include "pinn/report.hpp"

namespace pinn {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct RunFlags {
  std::string problem, spec, strategy, opt, weights, out, plot, config;
  uint64_t seed = 0;
  bool seed_set = false;
  int iters = -1;
  double eval_dx = -1.0;
  int net_width = 16;
  std::string net_act = "sigmoid";
};

BenchmarkProblem resolve_problem(const RunFlags& flags) {
  if (!flags.problem.empty()) return builtin_problem(flags.problem);
  if (flags.spec.empty())
    throw std::runtime_error("either --problem or --spec is required");
  BenchmarkProblem p;
  p.id = flags.spec;
  p.spec_text = slurp(flags.spec);
  p.system = parse_system(p.spec_text);
  for (const auto& dv : p.system.dependent_vars)
    p.nets[dv.name] = MlpSpec::dense({static_cast<int>(dv.args.size()), flags.net_width,
                                      flags.net_width, 1},
                                     activation_from_name(flags.net_act));
  p.param_estim = !p.system.physical_params.empty();
  return p;
}

RunConfig merge_config(const BenchmarkProblem& problem, const RunFlags& flags) {
  RunConfig cfg = problem.default_config;
  if (!flags.config.empty()) cfg = parse_run_config(slurp(flags.config));
  cfg.problem = problem.id;
  if (!flags.strategy.empty()) cfg.strategy = parse_strategy(flags.strategy);
  if (!flags.opt.empty()) cfg.schedule = parse_schedule(flags.opt);
  if (!flags.weights.empty()) cfg.weights = parse_weight_scheme(flags.weights);
  if (flags.seed_set) {
    cfg.seed_init = flags.seed;
    cfg.seed_sampling = flags.seed + 1;
  }
  if (flags.iters >= 0) cfg.default_iters = flags.iters;
  if (flags.eval_dx > 0.0) cfg.eval_dx = flags.eval_dx;
  if (!flags.out.empty()) cfg.out_csv = flags.out;
  if (!flags.plot.empty()) cfg.out_svg = flags.plot;
  return cfg;
}

struct RunOutput {
  TrainResult result;
  size_t term_count = 0;
  bool quadrature = false;
};

RunOutput run_one(const BenchmarkProblem& problem, const RunConfig& cfg) {
  LossProgram prog = lower_benchmark(problem);
  RunOutput out;
  out.term_count = prog.terms.size();
  out.quadrature = std::holds_alternative<QuadratureStrategy>(cfg.strategy);
  out.result = problem.param_estim ? solve_inverse(prog, cfg, problem.eval_oracle)
                                   : train(prog, cfg, problem.eval_oracle);
  if (!cfg.out_csv.empty())
    write_history_csv(cfg.out_csv, out.result.history, out.term_count, out.quadrature);
  if (!cfg.out_svg.empty()) write_history_svg(cfg.out_svg, out.result.history);
  return out;
}

void print_summary(const BenchmarkProblem& problem, const RunConfig& cfg,
                   const RunOutput& out) {
  std::printf("%s %s %s %.6g %.6g %.2f\n", problem.id.c_str(),
              strategy_name(cfg.strategy).c_str(), schedule_name(cfg.schedule).c_str(),
              out.result.final_loss, out.result.final_rel_l2, out.result.wall_s);
  if (!out.result.lambda.empty()) {
    std::printf("estimated parameters:");
    for (size_t i = 0; i < out.result.lambda.size(); ++i)
      std::printf(" %s=%.6g",
                  problem.system.physical_params[i].name.c_str(),
                  out.result.lambda[i]);
    std::printf("\n");
  }
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ':' || c == ',' || c == '=') c = '-';
  return s;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"physics-informed neural network training bench"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string strategies_csv;
  std::string reftable_problem, reftable_out;
  int reftable_resolution = 128;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--problem", flags.problem, "builtin problem id");
    cmd->add_option("--spec", flags.spec, "PDE spec file");
    cmd->add_option("--opt", flags.opt, "optimizer schedule, e.g. adam:0.001:50+bfgs:150");
    cmd->add_option("--weights", flags.weights, "fixed | lossgrad[...] | minimax[...]");
    cmd->add_option("--seed", flags.seed, "init seed (sampling seed = seed+1)")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--iters", flags.iters, "iterations for phases without a count");
    cmd->add_option("--eval-dx", flags.eval_dx, "evaluation grid spacing");
    cmd->add_option("--out", flags.out, "history CSV path");
    cmd->add_option("--plot", flags.plot, "SVG plot path");
    cmd->add_option("--config", flags.config, "run-config file (key = value lines)");
    cmd->add_option("--net-width", flags.net_width, "hidden width for --spec runs");
    cmd->add_option("--net-act", flags.net_act, "hidden activation for --spec runs");
  };

  CLI::App* bench = app.add_subcommand("bench", "train one configuration");
  add_run_flags(bench);
  bench->add_option("--strategy", flags.strategy,
                    "grid:<dx> | stochastic:<n> | quasirandom:<n>[:sobol|lhs] | "
                    "quadrature[:abstol=..][:reltol=..][:maxiters=..]");

  CLI::App* sweep = app.add_subcommand("sweep", "train several strategies");
  add_run_flags(sweep);
  sweep->add_option("--strategies", strategies_csv, "comma-separated strategy list")
      ->required();

  CLI::App* reftable = app.add_subcommand("reftable", "write a reference table CSV");
  reftable->add_option("--problem", reftable_problem, "diffusion1d | spm | reduced_p2d")
      ->required();
  reftable->add_option("--resolution", reftable_resolution, "grid resolution (>= 32)");
  reftable->add_option("--out", reftable_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      BenchmarkProblem problem = resolve_problem(flags);
      RunConfig cfg = merge_config(problem, flags);
      RunOutput out = run_one(problem, cfg);
      print_summary(problem, cfg, out);
      return 0;
    }
    if (sweep->parsed()) {
      BenchmarkProblem problem = resolve_problem(flags);
      std::vector<std::string> names;
      std::stringstream ss(strategies_csv);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) names.push_back(tok);
      if (names.empty()) throw std::runtime_error("no strategies given");

      std::vector<RunConfig> cfgs;
      for (const auto& name : names) {
        RunConfig cfg = merge_config(problem, flags);
        cfg.strategy = parse_strategy(name);
        std::string tag = sanitize(name);
        if (!flags.out.empty()) cfg.out_csv = flags.out + "." + tag + ".csv";
        if (!flags.plot.empty()) cfg.out_svg = flags.plot + "." + tag + ".svg";
        cfgs.push_back(std::move(cfg));
      }
      // one training context per configuration, two in flight at a time
      std::vector<RunOutput> outs(cfgs.size());
      size_t next = 0;
      while (next < cfgs.size()) {
        size_t batch = std::min<size_t>(2, cfgs.size() - next);
        std::vector<std::future<RunOutput>> futs;
        for (size_t b = 0; b < batch; ++b)
          futs.push_back(std::async(std::launch::async, run_one, std::cref(problem),
                                    std::cref(cfgs[next + b])));
        for (size_t b = 0; b < batch; ++b) outs[next + b] = futs[b].get();
        next += batch;
      }
      for (size_t i = 0; i < cfgs.size(); ++i)
        print_summary(problem, cfgs[i], outs[i]);
      return 0;
    }
    if (reftable->parsed()) {
      ReferenceTable table = reference_solve(reftable_problem, reftable_resolution);
      save_reference_csv(table, reftable_out);
      std::printf("wrote %s (%s, resolution %d)\n", reftable_out.c_str(),
                  table.problem.c_str(), table.resolution);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace pinn
