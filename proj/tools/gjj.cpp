// gjj: command-line front end for the experiments of the gjj library.
//
//   gjj <experiment> [--config file.ini] [--set key=value ...] [--out dir]
//   gjj sweep <experiment> --axis key --values v1,v2,...
//   gjj replay out/manifest.json [--out dir]
//   gjj fields
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 other.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gjj/cli/experiments.hpp"
#include "gjj/error.hpp"

namespace {

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

const char* type_name(gjj::cli::FieldType t) {
  switch (t) {
    case gjj::cli::FieldType::number: return "number";
    case gjj::cli::FieldType::integer: return "integer";
    case gjj::cli::FieldType::boolean: return "boolean";
    case gjj::cli::FieldType::text: return "text";
    case gjj::cli::FieldType::list: return "list";
  }
  return "?";
}

int exit_code(const gjj::Error& e) { return e.kind() == gjj::ErrorKind::config ? 2 : 3; }

}  // namespace

int main(int argc, char** argv) {
  using namespace gjj::cli;

  CLI::App app{"Graphene Josephson junction optomechanics experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  int workers = 1;
  long long seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--set", overrides, "override, section.key=value (repeatable)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "parallel workers for independent points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", seed, "recorded in the manifest (all runs are deterministic)")->capture_default_str();
  };

  std::string chosen;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_common(sub);
    sub->callback([&chosen, name]() { chosen = name; });
  }

  std::string sweep_experiment, sweep_axis, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "repeat an experiment over values of one numeric field");
  add_common(sweep);
  sweep->add_option("experiment", sweep_experiment, "experiment to sweep")->required();
  sweep->add_option("--axis", sweep_axis, "numeric field, e.g. model.lambda_ratio")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  std::string manifest_path;
  auto* rep = app.add_subcommand("replay", "re-run the experiment recorded in a manifest");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out_dir, "output directory")->capture_default_str();
  rep->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);

  auto* fields = app.add_subcommand("fields", "list every configuration field with its default");

  CLI11_PARSE(app, argc, argv);
  std::string context = chosen;
  if (sweep->parsed()) context = "sweep of " + sweep_experiment;
  if (rep->parsed()) context = "replay of " + manifest_path;

  try {
    if (fields->parsed()) {
      for (const Field& f : schema())
        std::printf("%-32s %-8s %-14s %s\n", f.key.c_str(), type_name(f.type), f.default_value.c_str(),
                    f.help.c_str());
      return 0;
    }

    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    Config cfg;
    RunInfo info;
    if (rep->parsed()) {
      Replay r = replay(manifest_path, workers);
      result = std::move(r.result);
      cfg = std::move(r.config);
      info = std::move(r.info);
    } else {
      if (!config_path.empty()) cfg = Config::from_file(config_path);
      for (const auto& o : overrides) cfg.apply_override(o);
      info.workers = workers;
      info.seed = seed;
      if (sweep->parsed()) {
        if (!is_experiment(sweep_experiment)) {
          throw gjj::Error(gjj::ErrorKind::config, "experiment: unknown experiment '" + sweep_experiment + "'");
        }
        info.command = "sweep";
        info.sweep_axis = sweep_axis;
        info.sweep_values = split_values(sweep_values);
        result = run_sweep(sweep_experiment, cfg, sweep_axis, info.sweep_values, workers);
      } else {
        info.command = chosen;
        result = run_experiment(chosen, cfg, workers);
      }
    }
    info.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto paths = write_run(out_dir, result, make_manifest(result, cfg, info));
    for (const auto& p : paths) std::cout << p.string() << '\n';
    const Table& summary = result.tables.at(result.summary);
    std::cout << summary.csv();
    return 0;
  } catch (const gjj::Error& e) {
    std::cerr << "error (" << gjj::to_string(e.kind()) << ")";
    if (!context.empty()) std::cerr << " in " << context;
    std::cerr << ": " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error" << (context.empty() ? "" : " in " + context) << ": " << e.what() << '\n';
    return 1;
  }
}
