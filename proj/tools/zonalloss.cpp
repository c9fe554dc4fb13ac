#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "zonalloss/calibration.hpp"
#include "zonalloss/config.hpp"
#include "zonalloss/dataset.hpp"
#include "zonalloss/errors.hpp"
#include "zonalloss/formulation.hpp"
#include "zonalloss/study.hpp"

namespace fs = std::filesystem;
using namespace zonalloss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

/// Signals a failure already reported to stderr.
struct Exit {
  int code;
};

LoadedSeries load_or_exit(const std::string& manifest_path) {
  try {
    LoadedSeries loaded = load_series(read_manifest(manifest_path));
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
    return loaded;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const ReferentialError& e) {
    std::cerr << "referential error: " << e.what() << '\n';
  } catch (const UnmappedNode& e) {
    std::cerr << "unmapped node: " << e.what() << '\n';
  }
  throw Exit{kExitValidation};
}

void require_valid(const LoadedSeries& loaded) {
  if (loaded.violations.empty()) return;
  for (const auto& [hour, v] : loaded.violations)
    std::cerr << "hour " << hour << ": " << v.entity << ": " << v.rule << " (" << v.detail << ")\n";
  throw Exit{kExitValidation};
}

/// Linear factors from the files, completed from flow history; piecewise factors of `segment_mw`.
void calibrate(LoadedSeries& loaded, double segment_mw) {
  std::vector<std::string> skipped;
  const auto linear = linear_factors_from_history(loaded, &skipped);
  for (const auto& id : skipped) std::cerr << "warning: line " << id << " has no usable flow history\n";
  calibrate_series(loaded.series, linear, segment_mw);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cannot write " << path << '\n';
    throw Exit{kExitValidation};
  }
  return f;
}

int cmd_validate(const std::string& manifest) {
  const LoadedSeries loaded = load_or_exit(manifest);
  require_valid(loaded);
  std::cout << loaded.series.size() << " hours, "
            << (loaded.series.empty() ? 0 : loaded.series.front().zones.size()) << " zones, "
            << (loaded.series.empty() ? 0 : loaded.series.front().interconnectors.size()) << " interconnectors: ok\n";
  return kExitOk;
}

int cmd_calibrate(const std::string& manifest, double segment_mw, const std::string& out) {
  LoadedSeries loaded = load_or_exit(manifest);
  require_valid(loaded);
  calibrate(loaded, segment_mw);
  std::vector<CalibratedLine> lines;
  if (!loaded.series.empty())
    for (const auto& line : loaded.series.front().interconnectors)
      if (line.loss_model) lines.push_back({line.id, line.rated_capacity, *line.loss_model});
  auto f = open_out(out);
  write_factors_csv(f, lines);
  std::printf("%-16s %6s %10s %12s %12s %12s\n", "line", "kind", "rated_mw", "rmse_lin_mw", "rmse_pw_mw", "max_jump_mw");
  const auto& first = loaded.series.front();
  for (const auto& c : lines) {
    const auto& line = first.interconnectors[first.line_index(c.line_id)];
    const double lin = c.model.linear ? approximation_rmse(c.model, *c.model.linear, c.rated_capacity) : NAN;
    std::printf("%-16s %6s %10.1f %12.4f %12.4f %12.4f\n", c.line_id.c_str(), to_string(line.kind).c_str(),
                c.rated_capacity, lin, approximation_rmse(c.model, c.model.piecewise, c.rated_capacity),
                max_discontinuity(c.model.piecewise));
  }
  return kExitOk;
}

nlohmann::ordered_json hour_json(const MarketInstance& inst, ScenarioId id, const HourResult& h) {
  nlohmann::ordered_json j;
  j["hour"] = h.hour;
  j["scenario"] = to_string(id);
  j["status"] = to_string(h.status);
  if (!h.solved()) {
    j["diagnostic"] = h.diagnostic;
    return j;
  }
  const auto& r = h.dispatch;
  j["objective_eur"] = r.objective;
  j["nodes"] = r.nodes;
  j["fixed_point"] = h.fixed_point;
  auto& prices = j["zonal_price"] = nlohmann::ordered_json::object();
  for (std::size_t z = 0; z < inst.zones.size(); ++z) prices[inst.zones[z].id] = r.zonal_price[z];
  auto& gen = j["generation"] = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < inst.generators.size(); ++g) gen[inst.generators[g].id] = r.generation[g];
  auto& lines = j["lines"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < inst.interconnectors.size(); ++l) {
    lines.push_back({{"id", inst.interconnectors[l].id},
                     {"flow_mw", r.flow[l]},
                     {"modeled_loss_mw", r.modeled_loss[l]},
                     {"loss_modeled", static_cast<bool>(r.loss_modeled[l])},
                     {"fixed_loss_mw", r.fixed_loss[l]},
                     {"expost_loss_mw", h.expost_loss[l]}});
  }
  return j;
}

int cmd_clear(const std::string& manifest, int hour, const std::string& scenario, double segment_mw,
              const std::string& out, const std::string& dump) {
  LoadedSeries loaded = load_or_exit(manifest);
  require_valid(loaded);
  if (hour < 0 || hour >= static_cast<int>(loaded.series.size())) {
    std::cerr << "hour " << hour << " is outside 0.." << loaded.series.size() - 1 << '\n';
    return kExitValidation;
  }
  calibrate(loaded, segment_mw);
  const ScenarioId id = scenario_from_string(scenario);
  const MarketInstance& inst = loaded.series[hour];
  if (!dump.empty()) {
    try {
      const ClearingProblem cp = build_problem(inst, scenario_spec(inst, id));
      auto f = open_out(dump);
      write_problem_dump(f, cp.problem, cp.variable_names, cp.row_names);
    } catch (const StatusNotOptimal& e) {
      std::cerr << "solver failure: " << e.what() << '\n';
      return kExitSolver;
    }
  }
  const ScenarioResult result = run_scenario({inst}, id);
  const HourResult& h = result.hours.front();
  const std::string text = hour_json(inst, id, h).dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else open_out(out) << text;
  if (!h.solved()) {
    std::cerr << "solver failure: " << h.diagnostic << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_study(const std::string& manifest, RunConfig cfg, const std::string& out, const std::string& hourly) {
  LoadedSeries loaded = load_or_exit(manifest);
  require_valid(loaded);
  calibrate(loaded, cfg.segment_mw);
  const fs::path dir = output_directory(cfg, out);
  fs::create_directories(dir);

  std::vector<ScenarioResult> results;
  for (ScenarioId id : cfg.scenarios) {
    const auto start = std::chrono::steady_clock::now();
    results.push_back(run_scenario(loaded.series, id, cfg.study));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& r = results.back();
    std::cerr << to_string(id) << ": " << r.hours.size() - r.skipped_hours() << " hours solved, "
              << r.skipped_hours() << " skipped, " << secs << " s\n";
    for (const auto& h : r.hours)
      if (!h.solved()) std::cerr << "  hour " << h.hour << ": " << h.diagnostic << '\n';
  }
  const ScenarioId reference = cfg.scenarios.front();
  const StudyReport report = compare_scenarios(results, reference);
  std::vector<std::vector<LineLossCost>> accounting;
  for (const auto& r : results) accounting.push_back(tso_loss_cost_accounting(r));

  {
    auto f = open_out(dir / "report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open_out(dir / "report.json");
    write_report_json(f, report, accounting);
  }
  {
    auto f = open_out(dir / "hours.csv");
    write_detail_csv(f, report);
  }
  {
    auto f = open_out(dir / "loss_cost.csv");
    for (std::size_t k = 0; k < results.size(); ++k) {
      std::ostringstream os;
      write_accounting_csv(os, results[k].id, accounting[k]);
      std::string text = os.str();
      if (k > 0) text = text.substr(text.find('\n') + 1);
      f << text;
    }
  }
  if (!hourly.empty()) write_hourly_detail((dir / hourly).string(), results);
  write_report_csv(std::cout, report);

  for (const auto& r : results)
    if (r.skipped_hours() > 0) return kExitSolver;
  return kExitOk;
}

int cmd_rmse(const std::string& manifest, const std::string& segments, const std::string& kinds, int hours,
             const StudyConfig& study) {
  LoadedSeries loaded = load_or_exit(manifest);
  require_valid(loaded);
  calibrate(loaded, 0.0);
  const std::vector<double> lengths = parse_number_list(segments);
  if (hours <= 0 || hours > static_cast<int>(loaded.series.size())) hours = static_cast<int>(loaded.series.size());
  const std::vector<MarketInstance> base(loaded.series.begin(), loaded.series.begin() + hours);

  std::vector<const Interconnector*> fleet;
  for (const auto& line : base.front().interconnectors)
    if (line.loss_model && (kinds == "all" || to_string(line.kind) == kinds)) fleet.push_back(&line);
  if (fleet.empty()) {
    std::cerr << "no lines of kind " << kinds << " carry a loss model\n";
    return kExitValidation;
  }

  int exit_code = kExitOk;
  auto time_scenario = [&](const std::vector<MarketInstance>& series, ScenarioId id) {
    const ScenarioResult r = run_scenario(series, id, study);
    double total = 0.0;
    for (const auto& h : r.hours) total += h.solve_seconds;
    if (r.skipped_hours() > 0) exit_code = kExitSolver;
    return total / static_cast<double>(r.hours.size());
  };

  std::printf("segment_mw,fleet_rmse_mw,max_jump_mw,seconds_per_hour\n");
  {
    double sum = 0.0;
    for (const auto* line : fleet) {
      if (!line->loss_model->linear) {
        std::cerr << "line " << line->id << " has no linear factors\n";
        return kExitValidation;
      }
      sum += approximation_rmse(*line->loss_model, *line->loss_model->linear, line->rated_capacity);
    }
    const ScenarioId id = kinds == "HVDC" ? ScenarioId::S2_LinearHVDC : ScenarioId::S4_LinearACHVDC;
    std::printf("linear,%.6f,%.6f,%.6f\n", sum / fleet.size(), 0.0, time_scenario(base, id));
  }
  for (double len : lengths) {
    std::vector<MarketInstance> series = base;
    calibrate_series(series, {}, len);
    double sum = 0.0;
    double jump = 0.0;
    for (const auto* line : fleet) {
      const auto segs = piecewise_factors(*line->loss_model, line->rated_capacity, len);
      sum += approximation_rmse(*line->loss_model, segs, line->rated_capacity);
      jump = std::max(jump, max_discontinuity(segs));
    }
    const ScenarioId id = kinds == "HVDC" ? ScenarioId::S3_PiecewiseHVDC : ScenarioId::S5_PiecewiseACHVDC;
    std::printf("%g,%.6f,%.6f,%.6f\n", len, sum / fleet.size(), jump, time_scenario(series, id));
    std::fflush(stdout);
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zonal market clearing with interconnector loss factors"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out;

  auto* validate = app.add_subcommand("validate", "Check a dataset against the schema and market invariants");
  validate->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();

  double segment_mw = 60.0;
  auto* calib = app.add_subcommand("calibrate", "Write linear and piecewise loss factors");
  calib->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  calib->add_option("--segment-mw", segment_mw, "Piecewise segment length (MW)")->check(CLI::PositiveNumber);
  calib->add_option("--out", out, "Factors CSV")->required();

  int hour = 0;
  std::string scenario = "S1";
  std::string dump;
  auto* clear_cmd = app.add_subcommand("clear", "Clear a single hour");
  clear_cmd->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  clear_cmd->add_option("--hour", hour, "Hour index")->required();
  clear_cmd->add_option("--scenario", scenario, "S1..S5");
  clear_cmd->add_option("--segment-mw", segment_mw, "Piecewise segment length (MW)")->check(CLI::PositiveNumber);
  clear_cmd->add_option("--out", out, "Result JSON (stdout when omitted)");
  clear_cmd->add_option("--dump", dump, "Write the canonical problem in text form");

  std::string config_file;
  std::string scenarios;
  std::optional<double> study_segment;
  std::optional<int> workers;
  std::string hourly;
  auto* study = app.add_subcommand("study", "Run the scenario comparison over all hours");
  study->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  study->add_option("--config", config_file, "Run configuration (JSON)");
  study->add_option("--scenarios", scenarios, "Comma-separated list, first is the reference");
  study->add_option("--segment-mw", study_segment, "Piecewise segment length (MW)")->check(CLI::PositiveNumber);
  study->add_option("--workers", workers, "Concurrent hour solves")->check(CLI::PositiveNumber);
  study->add_option("--out", out, "Output directory");
  study->add_option("--hourly", hourly, "Per-line hourly detail file name inside the output directory (.gz to compress)");

  std::string segments = "600,300,150,60,5";
  std::string kinds = "HVDC";
  int rmse_hours = 0;
  auto* rmse = app.add_subcommand("rmse", "Approximation error and solve time per segment length");
  rmse->add_option("manifest", manifest, "Dataset manifest (JSON)")->required();
  rmse->add_option("--segment-mw", segments, "Comma-separated segment lengths (MW)");
  rmse->add_option("--lines", kinds, "HVDC, AC or all")->check(CLI::IsMember({"HVDC", "AC", "all"}));
  rmse->add_option("--hours", rmse_hours, "Time only the first N hours (0 = all)");
  rmse->add_option("--config", config_file, "Run configuration (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(manifest);
    if (*calib) return cmd_calibrate(manifest, segment_mw, out);
    if (*clear_cmd) return cmd_clear(manifest, hour, scenario, segment_mw, out, dump);
    RunConfig cfg = config_file.empty() ? RunConfig{} : read_config(config_file);
    if (*study) {
      if (!scenarios.empty()) cfg.scenarios = parse_scenario_list(scenarios);
      if (study_segment) cfg.segment_mw = *study_segment;
      if (workers) cfg.study.workers = *workers;
      if (cfg.scenarios.empty()) throw Error("no scenarios given");
      return cmd_study(manifest, cfg, out, hourly);
    }
    if (*rmse) return cmd_rmse(manifest, segments, kinds, rmse_hours, cfg.study);
  } catch (const Exit& e) {
    return e.code;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CalibrationMissing& e) {
    std::cerr << "calibration missing: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
