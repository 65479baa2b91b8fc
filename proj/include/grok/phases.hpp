#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grok/trace.hpp"

namespace grok {

inline constexpr double kDefaultTol = 1e-4;

struct PhaseReport {
  std::optional<long> t1;       // memorization step
  std::optional<long> t2;       // generalization step
  std::optional<long> delta_t;  // t2 - t1
  double train_err_at_t1 = 0.0;
  double rec_err_at_t2 = 0.0;
  bool oscillating = false;
  bool l2_grew_after_t1 = false;
};

// Threshold crossings on recorded steps. When t1 exists, t2 is searched from
// t1 onward.
PhaseReport detect_phases(const Trace& trace, double train_tol = kDefaultTol,
                          double rec_tol = kDefaultTol);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

// Rows are records, columns the "<prefix><i>" extras sorted descending per row.
Eigen::MatrixXd component_trajectory(const Trace& trace, const std::string& prefix);
Eigen::MatrixXd singular_trajectory(const Trace& trace);

// First record index at or after `from` where column k falls to <= threshold.
std::optional<long> first_at_or_below(const Eigen::MatrixXd& traj, long k,
                                      double threshold, long from = 0);

}  // namespace grok
