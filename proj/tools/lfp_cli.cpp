#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lfp/lfp.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_config = 2;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::size_t workers = 1;
  bool quiet = false;

  std::string preset;
  bool full_widths = false;

  std::string data_kind;
  std::optional<std::size_t> samples;
  std::optional<double> frequency;
  std::optional<double> half_side;

  std::string input;
  std::string plot_kind;
  std::string plot_output;
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

// Command-line flags override the matching configuration fields.
void apply_flags(const std::string& command, const Options& o, Json& root) {
  const bool is_manifest = root.is_object() && root.contains("command") && root.contains("config");
  Json& cfg = is_manifest ? root["config"] : root;
  if (!cfg.is_object()) throw std::runtime_error("configuration must be a JSON object");

  if (o.seed) cfg["seed"] = *o.seed;
  if (!o.preset.empty()) {
    if (command == "solve") cfg["coefficients"]["preset"] = o.preset;
    else cfg["preset"] = o.preset;
  }
  if (o.full_widths) cfg["full_widths"] = true;

  if (command == "gen-data") {
    if (!o.data_kind.empty()) cfg["kind"] = o.data_kind;
    if (o.samples) cfg["samples"] = *o.samples;
    if (o.frequency) cfg["v"] = *o.frequency;
    if (o.half_side) cfg["a"] = *o.half_side;
  }
  if (command == "plot") {
    if (!o.input.empty()) cfg["input"] = o.input;
    if (!o.plot_kind.empty()) cfg["kind"] = o.plot_kind;
    if (!o.plot_output.empty()) cfg["output"] = o.plot_output;
  }
}

bool is_config_status(lfp_status s) {
  return s == LFP_ERR_CONFIG || s == LFP_ERR_INVALID_SPEC || s == LFP_ERR_MISSING_FIELD ||
         s == LFP_ERR_IO;
}

int run(const std::string& command, const Options& o) {
  Json config;
  try {
    config = load_config(o.config_path);
    apply_flags(command, o, config);
  } catch (const std::exception& e) {
    std::cerr << "lfp " << command << ": " << e.what() << "\n";
    return exit_config;
  }

  const std::string out_dir = o.out_dir.empty() ? "results/" + command : o.out_dir;
  char* report = nullptr;
  const std::string text = config.dump();
  const lfp_status status = lfp_run(command.c_str(), text.c_str(),
                                    out_dir == "-" ? nullptr : out_dir.c_str(), o.workers, &report);
  if (status != LFP_OK) {
    std::cerr << "lfp " << command << ": " << lfp_status_string(status) << " error: "
              << lfp_last_error() << "\n";
    return is_config_status(status) ? exit_config : exit_failed;
  }

  const Json parsed = Json::parse(report);
  lfp_string_free(report);
  if (!o.quiet) std::cout << parsed.dump(2) << "\n";
  const bool passed = parsed.value("passed", false);
  if (!passed) std::cerr << "lfp " << command << ": checks failed\n";
  return passed ? exit_ok : exit_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear F-Principle toolkit: LFP solves, spectral flows, reference networks and "
               "FP-norm bounds"};
  app.set_version_flag("--version", std::string(lfp_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config_path, "JSON configuration or manifest")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Seed override (unsigned 64-bit)");
  app.add_option("--out", o.out_dir, "Output directory (default results/<command>, '-' for none)");
  app.add_option("--workers", o.workers, "Concurrent experiment cells")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", o.quiet, "Do not print the JSON report");

  auto* gen = app.add_subcommand("gen-data", "Generate or ingest a dataset");
  gen->add_option("--kind", o.data_kind, "random_1d, xor_2d, asym_2d, sine or csv");
  gen->add_option("--samples", o.samples, "Number of samples");
  gen->add_option("--v", o.frequency, "Sine frequency");
  gen->add_option("--a", o.half_side, "XOR half side");

  auto* compare = app.add_subcommand("compare", "Train networks and compare with the LFP solution");
  compare->add_option("--preset", o.preset, "fig1_smooth, fig1_rough, fig2_xor or fig4_asym");
  compare->add_flag("--full-widths", o.full_widths, "Use the large (slow) width list");

  app.add_subcommand("flow-verify", "Check flow / ridge / closed-form equivalence");

  auto* sweep = app.add_subcommand("sweep", "FP-norm, test loss and bounds against frequency");
  sweep->add_option("--preset", o.preset, "fig3_sweep");

  auto* solve = app.add_subcommand("solve", "Solve the LFP model for one dataset");
  solve->add_option("--preset", o.preset, "Initialization preset for the coefficients");

  auto* trainer = app.add_subcommand("train", "Train one two-layer network");
  trainer->add_option("--preset", o.preset, "Initialization preset");

  auto* plot = app.add_subcommand("plot", "Render a CSV file as SVG");
  plot->add_option("--input", o.input, "CSV file");
  plot->add_option("--kind", o.plot_kind, "line, scatter or heatmap");
  plot->add_option("--output", o.plot_output, "SVG file name inside the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  for (const auto* sub : app.get_subcommands()) {
    return run(sub->get_name(), o);
  }
  return exit_config;
}
