#include "grok/phases.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "grok/error.hpp"

namespace grok {

int Trace::extra_index(const std::string& name) const {
  for (std::size_t i = 0; i < extra_names.size(); ++i)
    if (extra_names[i] == name) return static_cast<int>(i);
  return -1;
}

std::optional<double> Trace::extra(const TraceRecord& rec, const std::string& name) const {
  const int k = extra_index(name);
  if (k < 0 || static_cast<std::size_t>(k) >= rec.extras.size()) return std::nullopt;
  return rec.extras[static_cast<std::size_t>(k)];
}

PhaseReport detect_phases(const Trace& trace, double train_tol, double rec_tol) {
  require(!trace.records.empty(), "detect_phases: empty trace");
  require(train_tol > 0.0 && rec_tol > 0.0, "detect_phases: tolerances must be > 0");
  const auto& recs = trace.records;
  const std::size_t R = recs.size();

  PhaseReport rep;
  std::size_t i1 = R;
  for (std::size_t i = 0; i < R; ++i)
    if (recs[i].train_err <= train_tol) {
      i1 = i;
      break;
    }
  if (i1 < R) {
    rep.t1 = recs[i1].step;
    rep.train_err_at_t1 = recs[i1].train_err;
  }
  for (std::size_t i = (i1 < R ? i1 : 0); i < R; ++i)
    if (recs[i].rec_err <= rec_tol) {
      rep.t2 = recs[i].step;
      rep.rec_err_at_t2 = recs[i].rec_err;
      break;
    }
  if (rep.t1 && rep.t2) rep.delta_t = *rep.t2 - *rep.t1;

  if (i1 < R) rep.l2_grew_after_t1 = recs.back().norm_l2 > 1.01 * recs[i1].norm_l2;

  // Coefficient of variation of train_err over the last 10% of records.
  const std::size_t tail = std::max<std::size_t>(2, (R + 9) / 10);
  if (R >= 2) {
    const std::size_t from = R - std::min(tail, R);
    double mean = 0.0;
    for (std::size_t i = from; i < R; ++i) mean += recs[i].train_err;
    mean /= static_cast<double>(R - from);
    double var = 0.0;
    for (std::size_t i = from; i < R; ++i) var += std::pow(recs[i].train_err - mean, 2);
    var /= static_cast<double>(R - from);
    rep.oscillating = mean > 0.0 && std::sqrt(var) / mean > 0.5;
  }
  return rep;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 2, "loglog_slope: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : points) {
    require(x > 0.0 && y > 0.0, "loglog_slope: coordinates must be positive");
    mx += std::log(x);
    my += std::log(y);
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (auto [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  require(sxx > 0.0, "loglog_slope: all x equal");
  return sxy / sxx;
}

Eigen::MatrixXd component_trajectory(const Trace& trace, const std::string& prefix) {
  std::vector<int> cols;
  for (int k = 0;; ++k) {
    const int idx = trace.extra_index(prefix + std::to_string(k));
    if (idx < 0) break;
    cols.push_back(idx);
  }
  require(!cols.empty(), "trajectory: trace has no '" + prefix + "' components");
  Eigen::MatrixXd out(static_cast<long>(trace.records.size()), static_cast<long>(cols.size()));
  std::vector<double> row(cols.size());
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& ex = trace.records[r].extras;
    for (std::size_t c = 0; c < cols.size(); ++c) row[c] = ex.at(static_cast<std::size_t>(cols[c]));
    std::sort(row.begin(), row.end(), std::greater<>());
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<long>(r), static_cast<long>(c)) = row[c];
  }
  return out;
}

Eigen::MatrixXd singular_trajectory(const Trace& trace) {
  return component_trajectory(trace, "sv");
}

std::optional<long> first_at_or_below(const Eigen::MatrixXd& traj, long k,
                                      double threshold, long from) {
  require(k >= 0 && k < traj.cols(), "first_at_or_below: column out of range");
  for (long r = std::max(0L, from); r < traj.rows(); ++r)
    if (traj(r, k) <= threshold) return r;
  return std::nullopt;
}

}  // namespace grok
