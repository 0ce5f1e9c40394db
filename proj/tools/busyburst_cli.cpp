// busyburst command-line tool: analyze models, simulate busy cycles and
// estimate the busy-period exponent from data. Talks to the library through
// its C interface only.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "busyburst/c/busyburst.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kNoRoot = 3, kTruncation = 4, kNumeric = 5 };

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(bb_status s) {
  switch (s) {
    case BB_OK: return kOk;
    case BB_ERR_INVALID_ARGUMENT:
    case BB_ERR_PARSE:
    case BB_ERR_IO:
    case BB_ERR_INVALID_PARAMETER:
    case BB_ERR_INVALID_PROBABILITY:
    case BB_ERR_NON_NEGATIVE_DRIFT:
    case BB_ERR_REDUCIBLE_CHAIN:
    case BB_ERR_DUPLICATE_STATE_VALUE: return kUsage;
    case BB_ERR_NO_POSITIVE_ROOT: return kNoRoot;
    case BB_ERR_EXCESSIVE_TRUNCATION: return kTruncation;
    case BB_ERR_INTERNAL: return kInternal;
    default: return kNumeric;
  }
}

void check(bb_status s) {
  if (s != BB_OK) throw Failure{exit_code_for(s), std::string(bb_status_name(s)) + ": " + bb_last_error()};
}

std::string take(char* s) {
  std::string out(s);
  bb_string_free(s);
  return out;
}

class Model {
 public:
  explicit Model(const std::string& path) { check(bb_model_load(path.c_str(), &m_)); }
  ~Model() { bb_model_free(m_); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  const bb_model* get() const { return m_; }

 private:
  bb_model* m_ = nullptr;
};

class Campaign {
 public:
  Campaign(const Model& m, const bb_campaign_config& cfg) { check(bb_simulate(m.get(), &cfg, &c_)); }
  ~Campaign() { bb_campaign_free(c_); }
  Campaign(const Campaign&) = delete;
  Campaign& operator=(const Campaign&) = delete;
  const bb_campaign* get() const { return c_; }

 private:
  bb_campaign* c_ = nullptr;
};

ordered_json model_spec(const std::string& path) {
  std::ifstream in(path);
  try {
    return ordered_json::parse(in);
  } catch (const std::exception&) {
    return nullptr;
  }
}

// Writes every file into a staging directory next to `out` and only then moves
// them into place, so a failure never leaves a half-written output directory.
void write_outputs(const fs::path& out, const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Failure{kUsage, "cannot create output directory " + out.string() + ": " + ec.message()};
  const fs::path staging = out / (".staging-" + std::to_string(std::random_device{}()));
  fs::create_directory(staging, ec);
  if (ec) throw Failure{kUsage, "cannot write to " + out.string() + ": " + ec.message()};
  for (const auto& [name, content] : files) {
    std::ofstream f(staging / name, std::ios::binary);
    f << content;
    if (!f) {
      fs::remove_all(staging, ec);
      throw Failure{kUsage, "cannot write " + (out / name).string()};
    }
  }
  for (const auto& [name, content] : files) fs::rename(staging / name, out / name);
  fs::remove_all(staging, ec);
}

struct Manifest {
  ordered_json j;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit Manifest(const std::string& command) {
    j["command"] = command;
    j["version"] = bb_version();
  }
  std::string finish(const fs::path& out) {
    j["out"] = out.string();
    j["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return j.dump(2) + "\n";
  }
};

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (std::uint64_t(rd()) << 32) ^ rd();
}

unsigned default_workers() {
  const char* env = std::getenv("BUSYBURST_WORKERS");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const long v = std::stol(env, &used);
    if (used == std::string(env).size() && v >= 0) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw Failure{kUsage, std::string("BUSYBURST_WORKERS must be a non-negative integer, got \"") + env + "\""};
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double b = std::stod(item, &used);
      if (used != item.size() || !(b > 0)) throw std::invalid_argument(item);
      if (!out.empty() && !(b > out.back())) throw Failure{kUsage, "--thresholds must be strictly increasing"};
      out.push_back(b);
    } catch (const std::logic_error&) {
      throw Failure{kUsage, "--thresholds: \"" + item + "\" is not a positive number"};
    }
  }
  if (out.empty()) throw Failure{kUsage, "--thresholds is empty"};
  return out;
}

struct AnalyzeArgs {
  std::string model;
  double height = 1.0;
  std::size_t points = 1001;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  Manifest manifest("analyze");
  Model m(a.model);
  char* summary = nullptr;
  char* paths = nullptr;
  check(bb_analyze_report(m.get(), a.height, a.points, &summary, &paths));
  const auto summary_text = take(summary);
  const auto paths_text = take(paths);
  if (a.out.empty()) {
    std::cout << summary_text;
    return kOk;
  }
  manifest.j["model"] = a.model;
  manifest.j["model_spec"] = model_spec(a.model);
  manifest.j["height"] = a.height;
  write_outputs(a.out, {{"summary.json", summary_text}, {"paths.csv", paths_text},
                        {"manifest.json", manifest.finish(a.out)}});
  return kOk;
}

struct SimulateArgs {
  std::string model;
  std::uint64_t paths = 100000;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::uint64_t max_steps = 100'000'000;
  std::string thresholds;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  Manifest manifest("simulate");
  Model m(a.model);
  const std::uint64_t seed = a.seed ? *a.seed : entropy_seed();
  const unsigned workers = a.workers ? *a.workers : default_workers();
  std::vector<double> thresholds;
  if (!a.thresholds.empty()) thresholds = parse_thresholds(a.thresholds);

  bb_campaign_config cfg;
  bb_campaign_config_init(&cfg);
  cfg.n_paths = a.paths;
  cfg.base_seed = seed;
  cfg.max_steps = a.max_steps;
  cfg.workers = workers;
  cfg.thresholds = thresholds.empty() ? nullptr : thresholds.data();
  cfg.n_thresholds = thresholds.size();
  Campaign c(m, cfg);

  char* s = nullptr;
  check(bb_campaign_tail_csv(c.get(), &s));
  const auto tail = take(s);
  check(bb_campaign_extremes_csv(c.get(), &s));
  const auto extremes = take(s);
  check(bb_campaign_summary_json(c.get(), &s));
  const auto summary = take(s);

  manifest.j["model"] = a.model;
  manifest.j["model_spec"] = model_spec(a.model);
  manifest.j["seed"] = seed;
  manifest.j["seed_source"] = a.seed ? "flag" : "entropy";
  manifest.j["n_paths"] = a.paths;
  manifest.j["max_steps"] = a.max_steps;
  manifest.j["workers"] = workers;
  write_outputs(a.out, {{"tail.csv", tail},
                        {"extremes.csv", extremes},
                        {"summary.json", summary},
                        {"manifest.json", manifest.finish(a.out)}});
  return kOk;
}

struct EstimateArgs {
  std::string data;
  std::string kind = "iid";
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  Manifest manifest("estimate");
  const bb_series_kind kind = a.kind == "markov" ? BB_SERIES_MARKOV : BB_SERIES_IID;
  bb_estimate est{};
  char* json = nullptr;
  check(bb_estimate_file(a.data.c_str(), kind, &est, &json));
  const auto text = take(json);
  if (a.out.empty()) {
    std::cout << text;
    return kOk;
  }
  manifest.j["data"] = a.data;
  manifest.j["kind"] = a.kind;
  manifest.j["n"] = est.n;
  write_outputs(a.out, {{"estimate.json", text}, {"manifest.json", manifest.finish(a.out)}});
  return kOk;
}

struct PathsArgs {
  std::string model;
  double area = 0.0;
  double height = 0.0;
  std::size_t points = 1001;
  std::string out;
};

int run_paths(const PathsArgs& a) {
  Manifest manifest("paths");
  Model m(a.model);
  char* csv = nullptr;
  check(bb_paths_csv(m.get(), a.area, a.height, a.points, &csv));
  const auto text = take(csv);
  if (a.out.empty()) {
    std::cout << text;
    return kOk;
  }
  manifest.j["model"] = a.model;
  manifest.j["model_spec"] = model_spec(a.model);
  manifest.j["area"] = a.area;
  manifest.j["height"] = a.height;
  write_outputs(a.out, {{"paths.csv", text}, {"manifest.json", manifest.finish(a.out)}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Busy-period large deviations: analysis, simulation and estimation"};
  app.set_version_flag("--version", std::string(bb_version()));
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Large-deviation summary and most likely paths of a model");
  an->add_option("--model", analyze.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  an->add_option("--height", analyze.height, "Level h for the most likely path to a great height")
      ->check(CLI::PositiveNumber);
  an->add_option("--points", analyze.points, "Grid points per path")->check(CLI::Range(2, 10'000'000));
  an->add_option("--out", analyze.out, "Output directory (summary.json, paths.csv); stdout summary if omitted");

  SimulateArgs sim;
  auto* si = app.add_subcommand("simulate", "Monte Carlo campaign of busy cycles");
  si->add_option("--model", sim.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  si->add_option("--paths", sim.paths, "Number of busy cycles")->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
  si->add_option("--seed", sim.seed, "Base seed (drawn from entropy and recorded when omitted)");
  si->add_option("--workers", sim.workers, "Worker threads, 0 = all cores (default: $BUSYBURST_WORKERS or 0)");
  si->add_option("--max-steps", sim.max_steps, "Truncation length of a single cycle")
      ->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
  si->add_option("--thresholds", sim.thresholds, "Comma-separated ascending area thresholds b1,b2,...");
  si->add_option("--out", sim.out, "Output directory")->required();

  EstimateArgs est;
  auto* es = app.add_subcommand("estimate", "Estimate lambda* and K from observed increments");
  es->add_option("--data", est.data, "Increments, one per line or first CSV column")->required();
  es->add_option("--kind", est.kind, "Series model")->check(CLI::IsMember({"iid", "markov"}));
  es->add_option("--out", est.out, "Output directory (estimate.json); stdout if omitted");

  PathsArgs paths;
  auto* pa = app.add_subcommand("paths", "Sample psi*, psi*_b and varphi* on uniform grids");
  pa->add_option("--model", paths.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  pa->add_option("--area", paths.area, "Area b for psi*_b (omitted when 0)")->check(CLI::NonNegativeNumber);
  pa->add_option("--height", paths.height, "Height h for varphi* (omitted when 0)")->check(CLI::NonNegativeNumber);
  pa->add_option("--points", paths.points, "Grid points per path")->check(CLI::Range(2, 10'000'000));
  pa->add_option("--out", paths.out, "Output directory (paths.csv); stdout if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (an->parsed()) return run_analyze(analyze);
    if (si->parsed()) return run_simulate(sim);
    if (es->parsed()) return run_estimate(est);
    if (pa->parsed()) return run_paths(paths);
  } catch (const Failure& f) {
    std::cerr << "busyburst: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "busyburst: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
