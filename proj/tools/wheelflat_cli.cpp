// wheelflat: simulate, extract, augment, train, predict, evaluate, sweep.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wheelflat/errors.hpp"
#include "wheelflat/pipeline.hpp"
#include "wheelflat/run_config.hpp"

namespace {

using namespace wheelflat;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> level;
  std::optional<std::size_t> max_iterations;
  std::string out, signals, features, dataset, model, report;
  std::vector<double> heights;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--seed", o.seed, "Run seed");
  app.add_option("--level", o.level, "WPD level (0-6)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--heights", o.heights, "Flat heights in mm, e.g. 1e-1")->delimiter(',');
  app.add_option("--signals", o.signals, "Directory holding ABA CSV files");
  app.add_option("--features", o.features, "Original features CSV");
  app.add_option("--dataset", o.dataset, "Augmented dataset CSV");
  app.add_option("--model", o.model, "Model JSON");
  app.add_option("--report", o.report, "Training report JSON");
  app.add_option("--max-iterations", o.max_iterations, "SCG iteration limit");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.level) c.level = *o.level;
  if (o.max_iterations) c.training.max_iterations = *o.max_iterations;
  if (!o.heights.empty()) c.heights_mm = o.heights;
  if (!o.out.empty()) {
    c.paths.out = o.out;
    if (o.signals.empty() && o.config.empty()) c.paths.signal_dir = o.out;
  }
  if (!o.signals.empty()) c.paths.signal_dir = o.signals;
  if (!o.features.empty()) c.paths.features = o.features;
  if (!o.dataset.empty()) c.paths.dataset = o.dataset;
  if (!o.model.empty()) c.paths.model = o.model;
  if (!o.report.empty()) c.paths.report = o.report;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(o.config.empty() ? "<flags>" : o.config, 0, e.what());
  }
  return c;
}

void print_error(const std::string& kind, const std::string& message,
                 const FormatError* fe = nullptr) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  if (fe) {
    j["file"] = fe->path();
    if (fe->line() > 0) j["line"] = fe->line();
    j["message"] = fe->message();
  }
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wheel-flat detection pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  using Command = void (*)(const RunConfig&, std::ostream&);
  const std::map<std::string, std::pair<Command, const char*>> commands = {
      {"simulate", {cmd_simulate, "Write surrogate ABA records"}},
      {"extract", {cmd_extract, "Segment records and extract features"}},
      {"augment", {cmd_augment, "Interpolate between adjacent heights"}},
      {"train", {cmd_train, "Train the network with SCG"}},
      {"predict", {cmd_predict, "Predict labels for a dataset"}},
      {"evaluate", {cmd_evaluate, "Compute detection and localization accuracy"}},
      {"sweep", {cmd_sweep, "Run every stage for levels 0-6"}},
  };
  Overrides overrides;
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    add_common(*sub, overrides);
    dispatch[sub] = entry.first;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }

  try {
    const RunConfig config = resolve(overrides);
    std::cerr << "wheelflat " << kVersion << '\n';
    std::cerr << "config " << run_config_json(config) << '\n';
    for (const auto& [sub, fn] : dispatch) {
      if (sub->parsed()) fn(config, std::cerr);
    }
  } catch (const FormatError& e) {
    print_error("format", e.what(), &e);
    return 1;
  } catch (const DivergenceError& e) {
    print_error("divergence", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
