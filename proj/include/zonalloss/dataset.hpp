#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zonalloss/calibration.hpp"
#include "zonalloss/market.hpp"

namespace zonalloss {

/// Nodal input files, aggregated to zones on load.
struct NodalFiles {
  std::filesystem::path nodes;        // node,zone
  std::filesystem::path generators;   // id,node,cost,p_min,p_max
  std::filesystem::path demand;       // hour,node,mw
  std::filesystem::path injections;   // hour,node,mw (optional, empty path when absent)
  std::filesystem::path circuits;     // id,kind,from_node,to_node,rated,limit_fwd,limit_rev,quad_a,quad_b,quad_c
};

/// Paths are absolute or relative to the manifest's directory. Either the zonal files or
/// `nodal` must be present.
struct DatasetManifest {
  std::filesystem::path zones;            // id
  std::filesystem::path generators;       // id,zone,cost,p_min,p_max
  std::filesystem::path interconnectors;  // id,kind,from,to,rated,quad_a,quad_b,quad_c,alpha,beta
  std::filesystem::path atc;              // hour,line,fwd,rev
  std::filesystem::path demand;           // hour,zone,mw
  std::filesystem::path injections;       // hour,zone,mw (optional)
  std::filesystem::path flows;            // hour,line,mw (optional history for calibration)
  std::optional<NodalFiles> nodal;
};

/// Reads a JSON manifest and resolves its paths. Throws ParseError.
DatasetManifest read_manifest(const std::filesystem::path& file);

/// Zonal data in schema form: static entities plus hourly series.
struct ZonalDataset {
  std::vector<std::string> zones;
  std::vector<Generator> generators;
  std::vector<Interconnector> interconnectors;  // atc fields unused
  int hours = 0;
  std::map<std::pair<int, std::string>, std::pair<double, double>> atc;  // (hour, line) -> (fwd, rev)
  std::map<std::pair<int, std::string>, double> demand;                  // (hour, zone)
  std::map<std::pair<int, std::string>, double> injections;              // (hour, zone), absent = 0
};

struct AggregatedLine {
  std::string line_id;
  std::vector<std::string> circuits;
};

struct AggregationMetadata {
  std::vector<AggregatedLine> lines;
  std::vector<std::string> notes;
};

struct NodeCircuit {
  std::string id;
  LineKind kind = LineKind::AC;
  std::string from_node;
  std::string to_node;
  double rated = 0.0;
  double limit_fwd = 0.0;
  double limit_rev = 0.0;
  LossModel loss;
};

struct NodalDataset {
  std::map<std::string, std::string> node_zone;
  std::vector<std::string> node_order;  // as listed; fixes the zone order of the result
  std::vector<Generator> generators;    // `zone` holds the node id
  std::vector<NodeCircuit> circuits;
  int hours = 0;
  std::map<std::pair<int, std::string>, double> demand;      // (hour, node)
  std::map<std::pair<int, std::string>, double> injections;  // (hour, node)
};

/// Sums nodal demand and injections per zone, re-homes generators, drops intra-zonal
/// circuits, and collapses the circuits between each zone pair (per kind) into one line:
/// quad_a combined like parallel resistances, quad_b weighted by the loss-minimizing flow
/// shares, quad_c, ratings and limits summed. Throws UnmappedNode.
ZonalDataset aggregate_nodal_to_zonal(const NodalDataset& nodal, AggregationMetadata* metadata = nullptr);

NodalDataset read_nodal(const NodalFiles& files);
ZonalDataset read_zonal(const DatasetManifest& manifest);

struct LoadedSeries {
  std::vector<MarketInstance> series;
  std::vector<std::string> warnings;
  std::vector<std::pair<int, Violation>> violations;  // (hour, violation)
  std::map<std::string, FlowHistory> flows;            // per line id, from the optional flows file
  std::optional<AggregationMetadata> aggregation;
};

/// One validated instance per hour. Negative ATC values are clamped to zero with a
/// warning. Throws ParseError, ReferentialError, UnmappedNode.
LoadedSeries load_series(const DatasetManifest& manifest);

/// Builds the hourly instances of a zonal dataset. Throws ReferentialError for a missing
/// (hour, line) ATC or (hour, zone) demand entry.
std::vector<MarketInstance> build_series(const ZonalDataset& data);

/// Writes the zonal CSV files and a manifest.json into `dir`; returns the manifest path.
/// Static entities are taken from the first hour. Numbers are written round-trip exact.
std::filesystem::path write_series(const std::vector<MarketInstance>& series, const std::filesystem::path& dir);

/// Linear factors for lines whose file data left alpha blank, from the flow history.
/// Lines without history or without non-zero flows are reported in `skipped`.
std::map<std::string, LinearFactors> linear_factors_from_history(const LoadedSeries& loaded,
                                                                 std::vector<std::string>* skipped = nullptr);

}  // namespace zonalloss
