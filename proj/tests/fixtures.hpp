#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "zonalloss/calibration.hpp"
#include "zonalloss/market.hpp"

namespace zonalloss::testing {

/// Storebaelt coefficients with the published linear factors.
inline LossModel storebaelt_model() {
  LossModel m;
  m.quad_a = 0.000025;
  m.quad_c = 1.7590;
  m.linear = LinearFactors{0.0142, 1.7590};
  return m;
}

/// Zone A exports over one HVDC line to zone B.
inline MarketInstance two_zone_instance() {
  MarketInstance inst;
  inst.hour = 0;
  inst.zones = {{"A", 100.0, 0.0}, {"B", 400.0, 0.0}};
  inst.generators = {{"gA", "A", 10.0, 0.0, 600.0}, {"gB", "B", 40.0, 0.0, 500.0}};
  Interconnector line;
  line.id = "AB";
  line.kind = LineKind::HVDC;
  line.from_zone = "A";
  line.to_zone = "B";
  line.atc_fwd = 600.0;
  line.atc_rev = 600.0;
  line.rated_capacity = 600.0;
  line.loss_model = storebaelt_model();
  inst.interconnectors = {line};
  return inst;
}

/// Attaches piecewise factors of the given length to every line with a loss model.
inline void add_piecewise(MarketInstance& inst, double segment_mw) {
  for (auto& line : inst.interconnectors)
    if (line.loss_model)
      line.loss_model->piecewise = piecewise_factors(*line.loss_model, line.rated_capacity, segment_mw);
}

}  // namespace zonalloss::testing

namespace zonalloss::testing {

struct FleetLine {
  std::string name;
  double a;
  double b;
  double c;
  double alpha;  // published linear factor
  double beta;
  double rated;  // MW, nameplate transfer capacity
};

/// HVDC loss coefficients and published linear factors (a, b, c, alpha, beta), with ratings.
inline std::vector<FleetLine> hvdc_fleet() {
  return {
      {"Storebaelt", 0.000025, 0.0, 1.7590, 0.0142, 1.7590, 600.0},
      {"Skagerrak", 0.000017, 0.0, 8.2405, 0.0159, 8.2405, 1700.0},
      {"KontiSkan", 0.000035, 0.0, 2.1616, 0.0156, 2.1616, 740.0},
      {"BalticCable", 0.000041, 0.0, 1.6633, 0.0184, 1.6633, 600.0},
      {"SwePol", 0.000045, 0.0, 1.5907, 0.0266, 1.5907, 600.0},
      {"Kontek", 0.000031, 0.0, 1.9659, 0.0184, 1.9659, 600.0},
      {"FennoSkan", 0.000026, 0.0, 4.6490, 0.0124, 4.6490, 1200.0},
      {"Estlink", 0.000033, 0.0, 4.4000, 0.0090, 4.4000, 1016.0},
      {"NordBalt", 0.000022, 0.0, 2.6478, 0.0132, 2.6478, 700.0},
      {"NorNed", 0.000043, 0.0062, 1.4971, 0.0373, 1.4971, 700.0},
  };
}

inline LossModel model_of(const FleetLine& line) {
  LossModel m;
  m.quad_a = line.a;
  m.quad_b = line.b;
  m.quad_c = line.c;
  return m;
}

}  // namespace zonalloss::testing

namespace zonalloss::testing {

/// Random chain of 2-4 zones with HVDC lines carrying linear and piecewise factors.
/// All generator costs are strictly positive.
inline MarketInstance random_positive_instance(std::mt19937_64& rng, double segment_mw = 120.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto fleet = hvdc_fleet();
  const int zones = 2 + static_cast<int>(unit(rng) * 3.0);
  MarketInstance inst;
  for (int z = 0; z < zones; ++z) {
    const std::string id = "Z" + std::to_string(z);
    inst.zones.push_back({id, 50.0 + 400.0 * unit(rng), 0.0});
    inst.generators.push_back({"base" + std::to_string(z), id, 5.0 + 40.0 * unit(rng), 0.0, 100.0 + 600.0 * unit(rng)});
    inst.generators.push_back({"peak" + std::to_string(z), id, 60.0 + 40.0 * unit(rng), 0.0, 800.0});
  }
  for (int z = 0; z + 1 < zones; ++z) {
    const auto& f = fleet[static_cast<std::size_t>(unit(rng) * fleet.size()) % fleet.size()];
    Interconnector line;
    line.id = "L" + std::to_string(z);
    line.kind = LineKind::HVDC;
    line.from_zone = inst.zones[z].id;
    line.to_zone = inst.zones[z + 1].id;
    line.rated_capacity = f.rated;
    line.atc_fwd = f.rated * (0.2 + 0.8 * unit(rng));
    line.atc_rev = f.rated * (0.2 + 0.8 * unit(rng));
    LossModel m = model_of(f);
    m.linear = LinearFactors{f.alpha, f.beta};
    m.piecewise = piecewise_factors(m, f.rated, segment_mw);
    line.loss_model = m;
    inst.interconnectors.push_back(line);
  }
  return inst;
}

}  // namespace zonalloss::testing

namespace zonalloss::testing {

inline Interconnector hvdc_line(const std::string& id, const std::string& from, const std::string& to,
                                const FleetLine& f, double atc_fwd, double atc_rev) {
  Interconnector line;
  line.id = id;
  line.kind = LineKind::HVDC;
  line.from_zone = from;
  line.to_zone = to;
  line.atc_fwd = atc_fwd;
  line.atc_rev = atc_rev;
  line.rated_capacity = f.rated;
  LossModel m = model_of(f);
  m.linear = LinearFactors{f.alpha, f.beta};
  line.loss_model = m;
  return line;
}

inline const FleetLine& fleet_line(const std::string& name) {
  static const std::vector<FleetLine> fleet = hvdc_fleet();
  for (const auto& f : fleet)
    if (f.name == name) return f;
  throw std::out_of_range(name);
}

/// Zone A holds a generator with cost -10 EUR/MWh and exports to B over Storebaelt.
inline MarketInstance negative_price_instance() {
  MarketInstance inst;
  inst.zones = {{"A", 100.0, 0.0}, {"B", 400.0, 0.0}};
  inst.generators = {{"gA", "A", -10.0, 0.0, 600.0}, {"gB", "B", 40.0, 0.0, 500.0}};
  inst.interconnectors = {hvdc_line("AB", "A", "B", fleet_line("Storebaelt"), 600.0, 600.0)};
  return inst;
}

/// Three HVDC lines in parallel from a cheap exporting zone A to an importing zone B.
inline MarketInstance three_parallel_hvdc(double import_mw = 1800.0) {
  MarketInstance inst;
  inst.zones = {{"A", 200.0, 0.0}, {"B", import_mw, 0.0}};
  inst.generators = {{"gA", "A", 10.0, 0.0, 4000.0}, {"gB", "B", 100.0, 0.0, 3000.0}};
  const FleetLine& sb = fleet_line("Storebaelt");
  const FleetLine& ks = fleet_line("KontiSkan");
  const FleetLine& sk = fleet_line("Skagerrak");
  inst.interconnectors = {hvdc_line("SB", "A", "B", sb, sb.rated, sb.rated),
                          hvdc_line("KS", "A", "B", ks, ks.rated, ks.rated),
                          hvdc_line("SK", "A", "B", sk, sk.rated, sk.rated)};
  return inst;
}

/// FI is supplied over the FennoSkan HVDC link from SE3 and over an AC tie from SE1.
/// SE1 generation is slightly dearer than SE3 generation, in two tiers.
inline MarketInstance ac_parallel_instance(int hour = 0, double fi_demand = 1400.0) {
  MarketInstance inst;
  inst.hour = hour;
  inst.zones = {{"SE3", 0.0, 0.0}, {"SE1", 0.0, 0.0}, {"FI", fi_demand, 0.0}};
  inst.generators = {{"se3", "SE3", 10.0, 0.0, 3000.0},
                     {"se1_a", "SE1", 10.05, 0.0, 400.0},
                     {"se1_b", "SE1", 10.3, 0.0, 3000.0},
                     {"fi", "FI", 100.0, 0.0, 3000.0}};
  const FleetLine& fs = fleet_line("FennoSkan");
  Interconnector ac;
  ac.id = "SE1-FI";
  ac.kind = LineKind::AC;
  ac.from_zone = "SE1";
  ac.to_zone = "FI";
  ac.atc_fwd = 1500.0;
  ac.atc_rev = 1500.0;
  ac.rated_capacity = 1500.0;
  LossModel m;
  m.quad_a = 1e-5;
  m.linear = LinearFactors{0.005, 0.0};
  ac.loss_model = m;
  inst.interconnectors = {hvdc_line("FennoSkan", "SE3", "FI", fs, fs.rated, fs.rated), ac};
  return inst;
}

}  // namespace zonalloss::testing
