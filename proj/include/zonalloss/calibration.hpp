#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "zonalloss/market.hpp"

namespace zonalloss {

struct FlowHistory {
  std::string line_id;
  std::vector<double> samples;  // signed MW, one per historical hour
};

/// a*f^2 + b*|f| + c. Throws OutOfRange when |f| exceeds the rating.
double quadratic_loss(const LossModel& model, double flow, double rated_capacity);

/// Same curve without the range check.
double quadratic_loss(const LossModel& model, double flow);

/// Median of |f| over the samples with f != 0. Throws NoNonzeroFlows when there are none.
double median_nonzero_flow(const FlowHistory& history);

/// Secant through (0, c) and (m, loss(m)).
LinearFactors linear_factors_at(const LossModel& model, double median_flow);

/// Secant calibrated at the median of the non-zero historical flows.
LinearFactors linear_factors(const LossModel& model, const FlowHistory& history);

/// Equal-width segments of `segment_len` from 0 up to the rating (last one truncated),
/// each carrying the continuous least-squares line of the quadratic over the segment.
std::vector<LossSegment> piecewise_factors(const LossModel& model, double rated_capacity, double segment_len);

/// Approximate loss at |flow|. Breakpoints belong to the lower segment.
double linear_value(const LinearFactors& factors, double flow);
double piecewise_value(std::span<const LossSegment> segments, double flow);

/// RMSE of (approximation - quadratic) over the uniform grid 0, step, 2*step, ..., rated.
double approximation_rmse(const LossModel& model, const LinearFactors& factors, double rated_capacity,
                          double step = 1.0);
double approximation_rmse(const LossModel& model, std::span<const LossSegment> segments, double rated_capacity,
                          double step = 1.0);

/// Largest jump between consecutive segment lines at their shared breakpoint.
double max_discontinuity(std::span<const LossSegment> segments);

/// One line of a calibrated fleet, used by the CSV export.
struct CalibratedLine {
  std::string line_id;
  double rated_capacity = 0.0;
  LossModel model;
};

/// CSV with header `line,k,lo,hi,alpha,beta`. Linear factors are written as k=0 over [0, rated].
void write_factors_csv(std::ostream& out, std::span<const CalibratedLine> lines);

}  // namespace zonalloss
