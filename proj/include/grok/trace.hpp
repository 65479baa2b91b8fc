#pragma once

#include <optional>
#include <string>
#include <vector>

namespace grok {

struct TraceRecord {
  long step = 0;  // updates applied so far; 0 is the initialization
  double train_err = 0.0;
  double rec_err = 0.0;
  double norm_l1 = 0.0;
  double norm_l2 = 0.0;
  double norm_nuc = 0.0;
  double grad_g_norm = 0.0;
  double reg_grad_norm = 0.0;
  std::vector<double> extras;  // aligned with Trace::extra_names
};

struct Trace {
  std::vector<std::string> extra_names;
  std::vector<TraceRecord> records;
  bool diverged = false;
  bool large_beta_warning = false;
  bool early_exit = false;
  long steps_run = 0;

  bool empty() const { return records.empty(); }
  const TraceRecord& back() const { return records.back(); }
  // Index of an extra column, or -1.
  int extra_index(const std::string& name) const;
  std::optional<double> extra(const TraceRecord& rec, const std::string& name) const;
};

}  // namespace grok
