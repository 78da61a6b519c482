#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "paracr/cli.hpp"

namespace cli = paracr::cli;

int main(int argc, char** argv) {
  CLI::App app{"Para-CR structures: invariants, metrics and curvature checks"};
  app.set_version_flag("--version", std::string(cli::kToolName) + " " + cli::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_path, format = "json";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a job file and print its report");
  run->add_option("config", config_path, "Job file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the job seed");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
  run->add_option("--out", out_path, "Write the report here instead of stdout");

  std::string expr_text;
  auto* check = app.add_subcommand("check-expr", "Parse an expression and print its first derivatives");
  check->add_option("expr", expr_text, "Expression")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*check) {
    try {
      std::cout << cli::check_expr(expr_text);
      return 0;
    } catch (const paracr::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n  " << expr_text << "\n  " << std::string(e.offset(), ' ') << "^\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  try {
    cli::JobConfig cfg = cli::load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    const auto result = cli::run_job(cfg);
    const std::string text = cli::render_report(result, format == "text" ? cli::Format::Text : cli::Format::Json);
    const std::string dest = out_path.empty() ? cfg.output : out_path;
    if (dest.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(dest, std::ios::binary);
      if (!(f << text)) {
        std::cerr << "error: cannot write '" << dest << "'\n";
        return 2;
      }
    }
    return cli::exit_status(result.report);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
