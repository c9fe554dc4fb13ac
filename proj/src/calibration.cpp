#include "zonalloss/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zonalloss/errors.hpp"

namespace zonalloss {

namespace {

constexpr double kRangeTol = 1e-6;

std::vector<double> evaluation_grid(double rated_capacity, double step) {
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor(rated_capacity / step + 1e-9));
  grid.reserve(count + 2);
  for (long i = 0; i <= count; ++i) grid.push_back(static_cast<double>(i) * step);
  if (rated_capacity - grid.back() > 1e-9) grid.push_back(rated_capacity);
  return grid;
}

template <typename Approx>
double rmse_on_grid(const LossModel& model, double rated_capacity, double step, Approx approx) {
  if (!(step > 0.0)) throw Error("evaluation step must be positive");
  const auto grid = evaluation_grid(rated_capacity, step);
  double sum = 0.0;
  for (double f : grid) {
    const double e = approx(f) - quadratic_loss(model, f);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(grid.size()));
}

}  // namespace

double quadratic_loss(const LossModel& model, double flow) {
  const double f = std::abs(flow);
  return model.quad_a * f * f + model.quad_b * f + model.quad_c;
}

double quadratic_loss(const LossModel& model, double flow, double rated_capacity) {
  if (std::abs(flow) > rated_capacity + kRangeTol)
    throw OutOfRange("flow " + std::to_string(flow) + " MW exceeds rating " + std::to_string(rated_capacity));
  return quadratic_loss(model, flow);
}

double median_nonzero_flow(const FlowHistory& history) {
  std::vector<double> mags;
  mags.reserve(history.samples.size());
  for (double f : history.samples)
    if (f != 0.0) mags.push_back(std::abs(f));
  if (mags.empty()) throw NoNonzeroFlows("line " + history.line_id + " has no non-zero historical flow");
  std::sort(mags.begin(), mags.end());
  const std::size_t n = mags.size();
  return n % 2 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

LinearFactors linear_factors_at(const LossModel& model, double median_flow) {
  if (!(median_flow > 0.0)) throw Error("calibration point must be positive");
  return {(quadratic_loss(model, median_flow) - model.quad_c) / median_flow, model.quad_c};
}

LinearFactors linear_factors(const LossModel& model, const FlowHistory& history) {
  return linear_factors_at(model, median_nonzero_flow(history));
}

std::vector<LossSegment> piecewise_factors(const LossModel& model, double rated_capacity, double segment_len) {
  if (!(segment_len > 0.0)) throw Error("segment length must be positive");
  if (!(rated_capacity > 0.0)) throw Error("rated capacity must be positive");
  std::vector<LossSegment> segments;
  const double a = model.quad_a;
  for (long k = 0;; ++k) {
    const double lo = static_cast<double>(k) * segment_len;
    if (lo >= rated_capacity - 1e-9) break;
    double hi = static_cast<double>(k + 1) * segment_len;
    if (hi > rated_capacity - 1e-9) hi = rated_capacity;
    const double w = hi - lo;
    segments.push_back({lo, hi, a * (lo + hi) + model.quad_b, model.quad_c - a * (lo * hi + w * w / 6.0)});
  }
  return segments;
}

double linear_value(const LinearFactors& factors, double flow) { return factors.alpha * std::abs(flow) + factors.beta; }

double piecewise_value(std::span<const LossSegment> segments, double flow) {
  const double f = std::abs(flow);
  for (const auto& s : segments)
    if (f <= s.hi + 1e-9) return s.alpha * f + s.beta;
  throw OutOfRange("flow " + std::to_string(flow) + " MW lies beyond the last segment");
}

double approximation_rmse(const LossModel& model, const LinearFactors& factors, double rated_capacity, double step) {
  return rmse_on_grid(model, rated_capacity, step, [&](double f) { return linear_value(factors, f); });
}

double approximation_rmse(const LossModel& model, std::span<const LossSegment> segments, double rated_capacity,
                          double step) {
  return rmse_on_grid(model, rated_capacity, step, [&](double f) { return piecewise_value(segments, f); });
}

double max_discontinuity(std::span<const LossSegment> segments) {
  double worst = 0.0;
  for (std::size_t k = 1; k < segments.size(); ++k) {
    const double x = segments[k].lo;
    const double left = segments[k - 1].alpha * x + segments[k - 1].beta;
    const double right = segments[k].alpha * x + segments[k].beta;
    worst = std::max(worst, std::abs(right - left));
  }
  return worst;
}

void write_factors_csv(std::ostream& out, std::span<const CalibratedLine> lines) {
  char buf[256];
  out << "line,k,lo,hi,alpha,beta\n";
  for (const auto& line : lines) {
    if (line.model.linear) {
      std::snprintf(buf, sizeof buf, "%s,0,%.6f,%.6f,%.9f,%.9f\n", line.line_id.c_str(), 0.0, line.rated_capacity,
                    line.model.linear->alpha, line.model.linear->beta);
      out << buf;
    }
    for (std::size_t k = 0; k < line.model.piecewise.size(); ++k) {
      const auto& s = line.model.piecewise[k];
      std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.9f,%.9f\n", line.line_id.c_str(), k + 1, s.lo, s.hi, s.alpha,
                    s.beta);
      out << buf;
    }
  }
}

}  // namespace zonalloss
