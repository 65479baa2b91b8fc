#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include <json.hpp>

#include "grok/instances.hpp"
#include "grok/phases.hpp"
#include "grok/theory.hpp"
#include "grok/trace.hpp"

namespace grok::io {

using Json = nlohmann::json;

inline constexpr const char* kInstanceVersion = "v1";
inline constexpr const char* kReportVersion = "v1";

using Instance = std::variant<SparseRecoveryInstance, LowRankInstance>;

// Instance JSON v1. Matrices are arrays of rows; an infinite snr is written
// as the string "inf".
Json instance_to_json(const SparseRecoveryInstance& inst);
Json instance_to_json(const LowRankInstance& inst);
Instance instance_from_json(const Json& j);

void write_instance(const std::string& path, const Instance& inst);
Instance read_instance(const std::string& path);

// Trace CSV: step, train_err, rec_err, norm_l1, norm_l2, norm_nuc,
// grad_g_norm, reg_grad_norm, then one extras.<name> column per extra.
// Values use 17 significant digits so a read reproduces the doubles exactly.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::string& path);

Json phases_to_json(const PhaseReport& rep);
Json bounds_to_json(const TheoryBounds& b);

// Report JSON v1 skeleton: schema, version, status and the echoed config.
Json make_report(const Json& config, const Trace& trace);

// 16 hex digits of FNV-1a over the canonical (sorted-key) dump of `params`.
std::string run_id(const Json& params);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace grok::io
