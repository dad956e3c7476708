#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "amlsim/errors.hpp"
#include "amlsim/harness.hpp"

namespace amlsim {

namespace {

enum ExitCode {
  kOk = 0,
  kUsageError = 2,
  kIoError = 3,
  kConfigError = 4,
  kRunError = 5,
};

struct CliOptions {
  std::string output_dir = ".";
  std::string format = "csv";
  bool quiet = false;
};

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
}

std::filesystem::path prepare_output(const CliOptions& opts,
                                     const std::string& filename) {
  std::filesystem::path dir(opts.output_dir);
  std::filesystem::create_directories(dir);
  return dir / filename;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write: " + path.string());
  out << text;
}

void info(const CliOptions& opts, const std::string& message) {
  if (!opts.quiet) std::cout << message << "\n";
}

int cmd_simulate(const CliOptions& opts, const std::string& config_path,
                 bool report_only) {
  const Json config_json = load_config(config_path);
  const ExperimentConfig config = ExperimentConfig::from_json(config_json);
  const ReportBundle bundle = run(config);

  if (!report_only && opts.format == "csv") {
    std::ostringstream csv;
    bundle.series.write_csv(csv);
    const auto path = prepare_output(opts, config.series_filename);
    write_text(path, csv.str());
    info(opts, "wrote " + path.string());
  }
  const auto report_path = prepare_output(opts, config.report_filename);
  write_text(report_path, bundle.to_json().dump(2) + "\n");
  info(opts, "wrote " + report_path.string());

  return kOk;
}

int cmd_sweep(const CliOptions& opts, const std::string& config_path) {
  const Json config_json = load_config(config_path);
  const SweepConfig config = SweepConfig::from_json(config_json);
  const SweepTable table = sweep(config);

  if (opts.format == "csv") {
    std::ostringstream csv;
    table.write_csv(csv);
    const auto path = prepare_output(opts, config.table_filename);
    write_text(path, csv.str());
    info(opts, "wrote " + path.string());
  }
  const auto report_path = prepare_output(opts, config.report_filename);
  write_text(report_path, table.to_json().dump(2) + "\n");
  info(opts, "wrote " + report_path.string());
  return kOk;
}

int cmd_validate_adiabatic(const CliOptions& opts,
                           const std::string& config_path) {
  const Json config_json = load_config(config_path);
  const AdiabaticConfig config = AdiabaticConfig::from_json(config_json);
  const AdiabaticReport report = validate_adiabatic(config);
  const auto path = prepare_output(opts, config.report_filename);
  write_text(path, report.to_json().dump(2) + "\n");
  info(opts, "wrote " + path.string());
  return kOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"truncated Fock-space simulator for coupled atom-molecule "
               "laser models"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--output-dir", opts.output_dir, "directory for output files");
  app.add_option("--format", opts.format, "series format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", opts.quiet, "suppress progress messages");

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "run one experiment");
  simulate->fallthrough();
  simulate->add_option("config", config_path, "experiment config JSON")
      ->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("config", config_path, "sweep config JSON")->required();
  auto* compare_cmd = app.add_subcommand(
      "compare-analytic", "run an experiment, emit only the comparison report");
  compare_cmd->fallthrough();
  compare_cmd->add_option("config", config_path, "experiment config JSON")
      ->required();
  auto* adiabatic = app.add_subcommand(
      "validate-adiabatic", "five-mode vs three-mode detuning ladder");
  adiabatic->fallthrough();
  adiabatic->add_option("config", config_path, "adiabatic config JSON")
      ->required();

  std::vector<std::string> argv(args);
  std::reverse(argv.begin(), argv.end());  // CLI11 consumes reversed
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << std::flush;
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts, config_path, false);
    if (sweep_cmd->parsed()) return cmd_sweep(opts, config_path);
    if (compare_cmd->parsed()) return cmd_simulate(opts, config_path, true);
    if (adiabatic->parsed()) return cmd_validate_adiabatic(opts, config_path);
    std::cerr << "error: usage: no subcommand\n";
    return kUsageError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kIoError;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: run: " << e.what() << "\n";
    return kRunError;
  }
}

}  // namespace amlsim
