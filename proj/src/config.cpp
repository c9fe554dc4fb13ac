#include "zonalloss/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "zonalloss/errors.hpp"

namespace zonalloss {

RunConfig read_config(const std::filesystem::path& file) {
  const std::string name = file.string();
  std::ifstream in(file);
  if (!in) throw ParseError(name, 0, 0, "cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(name, 0, static_cast<long>(e.byte), e.what());
  }
  if (!doc.is_object()) throw ParseError(name, 1, 1, "config must be a JSON object");
  RunConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "scenarios") {
        cfg.scenarios.clear();
        for (const auto& s : value) cfg.scenarios.push_back(scenario_from_string(s.get<std::string>()));
      } else if (key == "segment_mw") {
        cfg.segment_mw = value.get<double>();
      } else if (key == "workers") {
        cfg.study.workers = value.get<int>();
      } else if (key == "absolute_gap") {
        cfg.study.milp.absolute_gap = value.get<double>();
      } else if (key == "integrality_tol") {
        cfg.study.milp.integrality_tol = value.get<double>();
      } else if (key == "node_limit") {
        cfg.study.milp.node_limit = value.get<long>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else {
        throw ParseError(name, 0, 0, "unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(name, 0, 0, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(name, 0, 0, e.what());
  }
  if (cfg.segment_mw <= 0.0) throw ParseError(name, 0, 0, "segment_mw must be positive");
  if (cfg.study.workers < 1) throw ParseError(name, 0, 0, "workers must be at least 1");
  return cfg;
}

std::filesystem::path output_directory(const RunConfig& config, const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return config.output_dir;
}

std::vector<ScenarioId> parse_scenario_list(const std::string& csv) {
  std::vector<ScenarioId> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(scenario_from_string(item));
  return out;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace zonalloss
