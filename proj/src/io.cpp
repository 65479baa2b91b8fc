#include "grok/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "grok/error.hpp"

namespace grok::io {

namespace {

const char* const kCoreColumns[] = {"step",    "train_err", "rec_err",     "norm_l1",
                                    "norm_l2", "norm_nuc",  "grad_g_norm", "reg_grad_norm"};
constexpr std::size_t kNumCore = 8;
const std::string kExtraPrefix = "extras.";

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

MatrixXd matrix_from_json(const Json& j, long rows, long cols, const char* name) {
  if (!j.is_array() || static_cast<long>(j.size()) != rows)
    throw IoError(std::string("instance: field '") + name + "' has the wrong number of rows");
  MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<long>(row.size()) != cols)
      throw IoError(std::string("instance: field '") + name + "' has a ragged row");
    for (long c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

VectorXd vector_from_json(const Json& j, long size, const char* name) {
  if (!j.is_array() || static_cast<long>(j.size()) != size)
    throw IoError(std::string("instance: field '") + name + "' has the wrong length");
  VectorXd v(size);
  for (long i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Json snr_to_json(double snr) { return std::isinf(snr) ? Json("inf") : Json(snr); }

double snr_from_json(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteSnr;
  return j.get<double>();
}

Json opt_to_json(const std::optional<long>& v) { return v ? Json(*v) : Json(nullptr); }

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, long line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError("trace csv: line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Json instance_to_json(const SparseRecoveryInstance& inst) {
  return Json{{"schema", "grok.instance"},
              {"version", kInstanceVersion},
              {"kind", "sparse"},
              {"n", inst.n},
              {"s", inst.s},
              {"N", inst.N},
              {"tau", inst.tau},
              {"snr", snr_to_json(inst.snr)},
              {"seed", inst.seed},
              {"Phi", matrix_to_json(inst.Phi)},
              {"M", matrix_to_json(inst.M)},
              {"X", matrix_to_json(inst.X)},
              {"a_star", vector_to_json(inst.a_star)},
              {"xi", vector_to_json(inst.xi)},
              {"y_star", vector_to_json(inst.y_star)}};
}

Json instance_to_json(const LowRankInstance& inst) {
  Json observed = Json::array();
  for (const auto& [i, j] : inst.observed) observed.push_back({i, j});
  return Json{{"schema", "grok.instance"},
              {"version", kInstanceVersion},
              {"kind", "lowrank"},
              {"n1", inst.n1},
              {"n2", inst.n2},
              {"r", inst.r},
              {"N", inst.N},
              {"tau", inst.tau},
              {"mode", to_string(inst.mode)},
              {"snr", snr_to_json(inst.snr)},
              {"seed", inst.seed},
              {"A_star", matrix_to_json(inst.A_star)},
              {"X", matrix_to_json(inst.X)},
              {"xi", vector_to_json(inst.xi)},
              {"y_star", vector_to_json(inst.y_star)},
              {"observed", observed}};
}

Instance instance_from_json(const Json& j) {
  try {
    if (j.value("schema", "") != "grok.instance") throw IoError("instance: missing schema tag");
    if (j.at("version") != kInstanceVersion)
      throw IoError("instance: unsupported version " + j.at("version").dump());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sparse") {
      SparseRecoveryInstance inst;
      inst.n = j.at("n").get<long>();
      inst.s = j.at("s").get<long>();
      inst.N = j.at("N").get<long>();
      inst.tau = j.at("tau").get<double>();
      inst.snr = snr_from_json(j.at("snr"));
      inst.seed = j.at("seed").get<std::uint64_t>();
      inst.Phi = matrix_from_json(j.at("Phi"), inst.n, inst.n, "Phi");
      inst.M = matrix_from_json(j.at("M"), inst.N, inst.n, "M");
      inst.X = matrix_from_json(j.at("X"), inst.N, inst.n, "X");
      inst.a_star = vector_from_json(j.at("a_star"), inst.n, "a_star");
      inst.xi = vector_from_json(j.at("xi"), inst.N, "xi");
      inst.y_star = vector_from_json(j.at("y_star"), inst.N, "y_star");
      return inst;
    }
    if (kind == "lowrank") {
      LowRankInstance inst;
      inst.n1 = j.at("n1").get<long>();
      inst.n2 = j.at("n2").get<long>();
      inst.r = j.at("r").get<long>();
      inst.N = j.at("N").get<long>();
      inst.tau = j.at("tau").get<double>();
      inst.mode = parse_lowrank_mode(j.at("mode").get<std::string>());
      inst.snr = snr_from_json(j.at("snr"));
      inst.seed = j.at("seed").get<std::uint64_t>();
      inst.A_star = matrix_from_json(j.at("A_star"), inst.n1, inst.n2, "A_star");
      inst.X = matrix_from_json(j.at("X"), inst.N, inst.n1 * inst.n2, "X");
      inst.xi = vector_from_json(j.at("xi"), inst.N, "xi");
      inst.y_star = vector_from_json(j.at("y_star"), inst.N, "y_star");
      for (const Json& e : j.at("observed")) inst.observed.emplace_back(e.at(0).get<long>(), e.at(1).get<long>());
      return inst;
    }
    throw IoError("instance: unknown kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw IoError(std::string("instance: malformed JSON: ") + e.what());
  } catch (const InputError& e) {
    throw IoError(std::string("instance: ") + e.what());
  }
}

void write_instance(const std::string& path, const Instance& inst) {
  const Json j = std::visit([](const auto& x) { return instance_to_json(x); }, inst);
  write_text(path, j.dump() + "\n");
}

Instance read_instance(const std::string& path) { return instance_from_json(read_json(path)); }

void write_trace_csv(std::ostream& out, const Trace& trace) {
  for (std::size_t c = 0; c < kNumCore; ++c) out << (c ? "," : "") << kCoreColumns[c];
  for (const auto& name : trace.extra_names) out << ',' << kExtraPrefix << name;
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.step;
    for (double v : {r.train_err, r.rec_err, r.norm_l1, r.norm_l2, r.norm_nuc, r.grad_g_norm, r.reg_grad_norm})
      out << ',' << format_double(v);
    for (std::size_t k = 0; k < trace.extra_names.size(); ++k)
      out << ',' << (k < r.extras.size() ? format_double(r.extras[k]) : std::string("nan"));
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  write_text(path, ss.str());
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < kNumCore) throw IoError("trace csv: header has too few columns");
  for (std::size_t c = 0; c < kNumCore; ++c)
    if (header[c] != kCoreColumns[c])
      throw IoError("trace csv: expected column '" + std::string(kCoreColumns[c]) + "', got '" + header[c] + "'");
  Trace trace;
  for (std::size_t c = kNumCore; c < header.size(); ++c) {
    if (header[c].rfind(kExtraPrefix, 0) != 0) throw IoError("trace csv: unexpected column '" + header[c] + "'");
    trace.extra_names.push_back(header[c].substr(kExtraPrefix.size()));
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError("trace csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                    " fields, expected " + std::to_string(header.size()));
    TraceRecord r;
    const double step = parse_double(cells[0], lineno);
    if (step != std::floor(step)) throw IoError("trace csv: line " + std::to_string(lineno) + ": step is not an integer");
    r.step = static_cast<long>(step);
    double* core[] = {&r.train_err, &r.rec_err, &r.norm_l1, &r.norm_l2, &r.norm_nuc, &r.grad_g_norm, &r.reg_grad_norm};
    for (std::size_t c = 1; c < kNumCore; ++c) *core[c - 1] = parse_double(cells[c], lineno);
    for (std::size_t c = kNumCore; c < cells.size(); ++c) r.extras.push_back(parse_double(cells[c], lineno));
    trace.records.push_back(std::move(r));
  }
  if (!trace.records.empty()) trace.steps_run = trace.records.back().step;
  return trace;
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  return read_trace_csv(in);
}

Json phases_to_json(const PhaseReport& rep) {
  return Json{{"t1", opt_to_json(rep.t1)},
              {"t2", opt_to_json(rep.t2)},
              {"delta_t", opt_to_json(rep.delta_t)},
              {"train_err_at_t1", rep.train_err_at_t1},
              {"rec_err_at_t2", rep.rec_err_at_t2},
              {"oscillating", rep.oscillating},
              {"l2_grew_after_t1", rep.l2_grew_after_t1}};
}

Json bounds_to_json(const TheoryBounds& b) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"rho2", b.rho2},
              {"rho2_row_space", b.rho2_row_space},
              {"rho2_ridge", b.rho2_ridge},
              {"t1_bound", opt_to_json(b.t1_bound)},
              {"delta_t", finite_or_null(b.delta_t)},
              {"eta", b.eta},
              {"residual_floor", b.residual_floor},
              {"residence_radius", finite_or_null(b.residence_radius)},
              {"chi_estimate", b.chi_estimate ? finite_or_null(*b.chi_estimate) : Json(nullptr)}};
}

Json make_report(const Json& config, const Trace& trace) {
  return Json{{"schema", "grok.report"},
              {"version", kReportVersion},
              {"run_id", run_id(config)},
              {"status", trace.diverged ? "diverged" : "ok"},
              {"steps_run", trace.steps_run},
              {"records", trace.records.size()},
              {"early_exit", trace.early_exit},
              {"large_beta_warning", trace.large_beta_warning},
              {"config", config}};
}

std::string run_id(const Json& params) {
  const std::string canon = params.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace grok::io
