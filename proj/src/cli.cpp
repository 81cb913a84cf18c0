#include "sepmin/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "sepmin/verify.hpp"

namespace sepmin {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << content;
}

std::string trace_file_name(const OutputSpec& out, const std::string& algo,
                            std::uint64_t seed, const char* ext) {
  return out.prefix + "__" + algo + "__seed" + std::to_string(seed) + ext;
}

void write_trace_outputs(const ExperimentSpec& spec, const std::string& algo,
                         const std::vector<RunTrace>& traces) {
  const fs::path dir(spec.output.dir);
  for (const RunTrace& t : traces) {
    if (spec.output.format == "json") {
      write_file(dir / trace_file_name(spec.output, algo, t.meta.seed, ".json"),
                 trace_to_json(t));
    } else {
      write_file(dir / trace_file_name(spec.output, algo, t.meta.seed, ".csv"),
                 trace_to_csv(t));
      nlohmann::json meta;
      meta["algorithm"] = t.meta.algorithm;
      meta["problem"] = t.meta.problem;
      meta["seed"] = t.meta.seed;
      meta["config_hash"] = t.meta.config_hash;
      meta["mode"] = t.meta.mode;
      meta["diverged"] = t.meta.diverged;
      write_file(dir / trace_file_name(spec.output, algo, t.meta.seed, ".meta.json"),
                 meta.dump(2) + "\n");
    }
  }
  write_file(dir / (spec.output.prefix + "__" + algo + "__agg.csv"),
             aggregate_to_csv(aggregate(traces)));
}

int classify_exception() {
  try {
    throw;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidSpecError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int cmd_solve(const std::string& config_path, const CliOverrides& ov) {
  try {
    ExperimentSpec spec = load_config_file(config_path);
    apply_overrides(spec, ov);
    bool any_diverged = false;
    for (const AlgorithmSpec& algo : spec.algorithms) {
      const std::vector<RunTrace> traces = run_experiment(spec, algo, ov.threads);
      for (const RunTrace& t : traces) any_diverged |= t.meta.diverged;
      write_trace_outputs(spec, algo.name, traces);
      std::cout << "wrote " << traces.size() << " trace(s) for " << algo.name
                << " under " << spec.output.dir << "\n";
    }
    return any_diverged ? kExitDiverged : kExitOk;
  } catch (...) {
    return classify_exception();
  }
}

int cmd_verify(const std::string& suite, const CliOverrides& ov) {
  try {
    const std::vector<verify::CheckResult> results = verify::run_suite(suite);
    const std::string report = verify::to_json(suite, results);
    std::cout << report << "\n";
    if (ov.out_dir)
      write_file(fs::path(*ov.out_dir) / ("verify_" + suite + ".json"), report + "\n");
    return verify::all_pass(results) ? kExitOk : kExitVerifyFail;
  } catch (...) {
    return classify_exception();
  }
}

int cmd_compare(const std::vector<std::string>& config_paths, const CliOverrides& ov) {
  try {
    if (config_paths.empty()) throw ConfigError("compare: needs at least one config");

    // All configs must share one problem section.
    std::vector<ExperimentSpec> specs;
    std::string problem_ref;
    for (const auto& path : config_paths) {
      ExperimentSpec spec = load_config_file(path);
      apply_overrides(spec, ov);
      const std::string label = problem_label(spec.problem);
      if (specs.empty()) problem_ref = label;
      else if (label != problem_ref)
        throw ConfigError("compare: configs use different problems (" + problem_ref +
                          " vs " + label + ")");
      specs.push_back(std::move(spec));
    }

    // Union of traces per algorithm name across configs.
    std::map<std::string, std::vector<RunTrace>> by_algo;
    bool any_diverged = false;
    for (const ExperimentSpec& spec : specs) {
      for (const AlgorithmSpec& algo : spec.algorithms) {
        std::vector<RunTrace> traces = run_experiment(spec, algo, ov.threads);
        for (RunTrace& t : traces) {
          any_diverged |= t.meta.diverged;
          by_algo[algo.name].push_back(std::move(t));
        }
      }
    }

    std::map<std::string, std::vector<AggregateRow>> aggs;
    for (const auto& [name, traces] : by_algo) aggs[name] = aggregate(traces);

    // Common grid: the coarsest aggregate, clipped to the range every
    // algorithm covers; carry-forward within each algorithm.
    const std::vector<AggregateRow>* ref = nullptr;
    std::int64_t lo = 0, hi = std::numeric_limits<std::int64_t>::max();
    for (const auto& [name, rows] : aggs) {
      if (!ref || rows.size() < ref->size()) ref = &rows;
      lo = std::max(lo, rows.front().queries);
      hi = std::min(hi, rows.back().queries);
    }
    std::string csv = "queries";
    for (const auto& [name, rows] : aggs)
      csv += "," + name + "_mean," + name + "_median," + name + "_min," + name +
             "_max," + name + "_n";
    csv += "\n";
    for (const AggregateRow& g : *ref) {
      if (g.queries < lo || g.queries > hi) continue;
      csv += std::to_string(g.queries);
      for (const auto& [name, rows] : aggs) {
        const AggregateRow* last = &rows.front();
        for (const auto& r : rows) {
          if (r.queries > g.queries) break;
          last = &r;
        }
        csv += "," + format_double(last->mean) + "," + format_double(last->median) +
               "," + format_double(last->min) + "," + format_double(last->max) +
               "," + std::to_string(last->count);
      }
      csv += "\n";
    }
    const ExperimentSpec& first = specs.front();
    const fs::path out =
        fs::path(first.output.dir) / (first.output.prefix + "__compare.csv");
    write_file(out, csv);
    std::cout << "wrote " << out.string() << "\n";
    return any_diverged ? kExitDiverged : kExitOk;
  } catch (...) {
    return classify_exception();
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"sepmin: solvers and benchmarks for separable minimax problems"};
  app.footer(config_schema_text());

  CliOverrides ov;
  std::string config_path;
  std::vector<std::string> compare_paths;
  std::string suite;
  std::uint64_t seed_val = 0;
  std::int64_t k_val = 0;
  std::string out_dir, format;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", ov.threads, "worker threads across seeds")
        ->default_val(1);
    cmd->add_option("--format", format, "trace format: csv | json");
    cmd->add_option("--seed", seed_val, "replace the config seed list with one seed");
    cmd->add_option("--K", k_val, "override run.K");
  };

  CLI::App* solve = app.add_subcommand("solve", "run a config and write traces");
  std::string config_positional;
  solve->add_option("config_file", config_positional, "JSON config path");
  solve->add_option("--config", config_path, "JSON config path");
  add_common(solve);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run an invariant suite and report JSON");
  verify_cmd
      ->add_option("suite", suite, "bounds | reductions | accounting | stochastic")
      ->required();
  add_common(verify_cmd);

  CLI::App* compare =
      app.add_subcommand("compare", "merge aggregates of several configs");
  compare->add_option("configs", compare_paths, "JSON config paths")->required();
  add_common(compare);

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (!out_dir.empty()) ov.out_dir = out_dir;
  if (!format.empty()) ov.format = format;
  if (solve->parsed()) {
    if (solve->count("--seed")) ov.seed = seed_val;
    if (solve->count("--K")) ov.iters = k_val;
    if (!config_positional.empty()) config_path = config_positional;
    if (config_path.empty()) {
      std::cerr << "config error: solve needs a config path\n";
      return kExitConfig;
    }
    return cmd_solve(config_path, ov);
  }
  if (verify_cmd->parsed()) return cmd_verify(suite, ov);
  if (compare->parsed()) {
    if (compare->count("--seed")) ov.seed = seed_val;
    if (compare->count("--K")) ov.iters = k_val;
    return cmd_compare(compare_paths, ov);
  }
  return kExitConfig;
}

}  // namespace sepmin
