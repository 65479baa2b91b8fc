#include "grok/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "grok/error.hpp"
#include "grok/io.hpp"
#include "grok/neural.hpp"
#include "grok/optimizers.hpp"
#include "grok/phases.hpp"
#include "grok/svg.hpp"
#include "grok/theory.hpp"

namespace grok::cli {

namespace {

using io::Json;

// Everything `run` needs besides the instance. Field names double as JSON
// config keys; flags use the same names with dashes.
struct RunSpec {
  std::string task = "linear";
  std::string method = "subgradient";
  std::string reg = "l1";
  double alpha = 0.1;
  double beta = 1e-5;
  double init_scale = 1e-6;
  long steps = 1000;
  long eval_every = 0;
  long depth = 1;
  long inner_dim = 0;
  std::uint64_t seed = 0;
  double train_tol = kDefaultTol;
  double rec_tol = kDefaultTol;
  bool components = false;
  bool early_exit = true;
  double eta = 1.0;
  long cl_samples = 0;
  double cl_radius = 0.0;
  // neural tasks
  long p = 97;
  long d1 = 64;
  long d2 = 64;
  double r_train = 0.4;
  std::string combine = "sum";
  long d = 100;
  long width = 500;
  long c = 2;
  long n_train = 100;
  long n_test = 1000;
  double sobolev_beta = 0.0;

  bool neural() const { return task != "linear"; }
};

using FieldPtr = std::variant<std::string RunSpec::*, double RunSpec::*, long RunSpec::*,
                              std::uint64_t RunSpec::*, bool RunSpec::*>;

struct Field {
  const char* name;
  FieldPtr ptr;
  const char* help;
  bool neural_only = false;
};

const std::vector<Field>& run_fields() {
  static const std::vector<Field> fields = {
      {"task", &RunSpec::task, "linear, mod_add or teacher_student"},
      {"method", &RunSpec::method, "subgradient, projected or proximal"},
      {"reg", &RunSpec::reg, "none, l1, l2 or nuclear"},
      {"alpha", &RunSpec::alpha, "step size (Adam learning rate for neural tasks)"},
      {"beta", &RunSpec::beta, "regularization strength"},
      {"init_scale", &RunSpec::init_scale, "initialization scale zeta"},
      {"steps", &RunSpec::steps, "number of updates"},
      {"eval_every", &RunSpec::eval_every, "record interval; 0 picks max(1, steps/5000)"},
      {"depth", &RunSpec::depth, "number of factors L"},
      {"inner_dim", &RunSpec::inner_dim, "inner width of factorized runs; 0 picks min(n1, n2)"},
      {"seed", &RunSpec::seed, "initialization seed"},
      {"train_tol", &RunSpec::train_tol, "memorization threshold on train_err"},
      {"rec_tol", &RunSpec::rec_tol, "generalization threshold on rec_err"},
      {"components", &RunSpec::components, "record coordinates / singular values as extras"},
      {"early_exit", &RunSpec::early_exit, "stop after 100 records with rec_err <= rec_tol/10"},
      {"eta", &RunSpec::eta, "eta used for the generalization-delay bound"},
      {"cl_samples", &RunSpec::cl_samples, "Monte Carlo samples for the CL constant; 0 skips it"},
      {"cl_radius", &RunSpec::cl_radius, "CL ball radius; 0 picks 2 |a_init - a_hat|"},
      {"p", &RunSpec::p, "modulus", true},
      {"d1", &RunSpec::d1, "embedding width", true},
      {"d2", &RunSpec::d2, "hidden width", true},
      {"r_train", &RunSpec::r_train, "training fraction", true},
      {"combine", &RunSpec::combine, "embedding combination: sum or hadamard", true},
      {"d", &RunSpec::d, "teacher input dimension", true},
      {"width", &RunSpec::width, "teacher and student hidden width", true},
      {"c", &RunSpec::c, "teacher output dimension", true},
      {"n_train", &RunSpec::n_train, "teacher-student training inputs", true},
      {"n_test", &RunSpec::n_test, "teacher-student test inputs", true},
      {"sobolev_beta", &RunSpec::sobolev_beta, "Sobolev penalty weight", true},
  };
  return fields;
}

std::string dashed(const std::string& name) {
  std::string s = name;
  for (char& ch : s)
    if (ch == '_') ch = '-';
  return s;
}

Json spec_to_json(const RunSpec& s) {
  Json j = Json::object();
  for (const auto& f : run_fields()) {
    if (f.neural_only && !s.neural()) continue;
    std::visit([&](auto ptr) { j[f.name] = s.*ptr; }, f.ptr);
  }
  return j;
}

void apply_json(RunSpec& s, const Json& j) {
  if (!j.is_object()) throw InputError("run config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const Field* field = nullptr;
    for (const auto& f : run_fields())
      if (key == f.name) field = &f;
    if (!field) throw InputError("unknown run parameter '" + key + "'");
    try {
      std::visit([&](auto ptr) { s.*ptr = value.get<std::remove_reference_t<decltype(s.*ptr)>>(); }, field->ptr);
    } catch (const Json::exception&) {
      throw InputError("run parameter '" + key + "' has the wrong type");
    }
  }
}

nn::Task parse_task(const std::string& t) {
  if (t == "mod_add" || t == "mod-add") return nn::Task::mod_add;
  if (t == "teacher_student" || t == "teacher-student") return nn::Task::teacher_student;
  throw InputError("unknown task '" + t + "'");
}

void validate(const RunSpec& s) {
  require(s.task == "linear" || s.task == "mod_add" || s.task == "mod-add" || s.task == "teacher_student" ||
              s.task == "teacher-student",
          "unknown task '" + s.task + "'");
  parse_method(s.method);
  parse_reg_kind(s.reg);
  require(s.alpha > 0.0 && std::isfinite(s.alpha), "alpha must be > 0");
  require(s.beta >= 0.0 && std::isfinite(s.beta), "beta must be >= 0");
  require(s.init_scale >= 0.0, "init-scale must be >= 0");
  require(s.steps >= 0, "steps must be >= 0");
  require(s.eval_every >= 0, "eval-every must be >= 0");
  require(s.depth >= 1, "depth must be >= 1");
  require(s.train_tol > 0.0 && s.rec_tol > 0.0, "tolerances must be > 0");
  require(s.cl_samples >= 0, "cl-samples must be >= 0");
  require(s.combine == "sum" || s.combine == "hadamard", "combine must be sum or hadamard");
}

RunConfig to_run_config(const RunSpec& s) {
  RunConfig cfg;
  cfg.method = parse_method(s.method);
  cfg.alpha = s.alpha;
  cfg.max_steps = s.steps;
  cfg.init_scale = s.init_scale;
  cfg.depth = static_cast<int>(s.depth);
  cfg.inner_dim = s.inner_dim;
  cfg.eval_every = s.eval_every;
  cfg.record_components = s.components;
  cfg.seed = s.seed;
  cfg.train_tol = s.train_tol;
  cfg.rec_tol = s.rec_tol;
  cfg.early_exit = s.early_exit;
  return cfg;
}

Json instance_summary(const io::Instance& inst) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        Json j = io::instance_to_json(x);
        if constexpr (std::is_same_v<T, SparseRecoveryInstance>) {
          for (const char* k : {"Phi", "M", "X", "a_star", "xi", "y_star"}) j.erase(k);
        } else {
          for (const char* k : {"A_star", "X", "xi", "y_star", "observed"}) j.erase(k);
        }
        j.erase("schema");
        j.erase("version");
        return j;
      },
      inst);
}

io::Instance generate_instance(const Json& p) {
  try {
    const std::string kind = p.at("kind").get<std::string>();
    const double tau = p.value("tau", 0.0);
    double snr = kDefaultSnr;
    if (p.contains("snr")) {
      const Json& v = p.at("snr");
      snr = v.is_string() && v.get<std::string>() == "inf" ? kInfiniteSnr : v.get<double>();
    }
    const auto seed = p.value("seed", std::uint64_t{0});
    if (kind == "sparse")
      return gen_sparse_instance(p.at("n").get<long>(), p.at("s").get<long>(), p.at("N").get<long>(), tau, snr, seed);
    if (kind == "lowrank")
      return gen_lowrank_instance(p.at("n1").get<long>(), p.at("n2").get<long>(), p.at("r").get<long>(),
                                  p.at("N").get<long>(), tau, parse_lowrank_mode(p.value("mode", "completion")),
                                  snr, seed);
    throw InputError("unknown instance kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw InputError(std::string("instance parameters: ") + e.what());
  }
}

struct RunResult {
  Json report;
  Trace trace;
};

RunResult execute_run(const RunSpec& spec, const io::Instance* inst) {
  validate(spec);
  Json config = spec_to_json(spec);
  if (inst) config["instance"] = instance_summary(*inst);

  RunResult out;
  std::optional<TheoryBounds> bounds;
  const Regularizer reg{parse_reg_kind(spec.reg), spec.beta};
  const RunConfig cfg = to_run_config(spec);

  if (spec.neural()) {
    nn::NeuralArch arch;
    arch.p = spec.p;
    arch.d1 = spec.d1;
    arch.d2 = spec.d2;
    arch.r_train = spec.r_train;
    arch.combine = spec.combine == "hadamard" ? nn::Combine::hadamard : nn::Combine::sum;
    arch.d = spec.d;
    arch.r = spec.width;
    arch.c = spec.c;
    arch.n_train = spec.n_train;
    arch.n_test = spec.n_test;
    out.trace = nn::train_neural(parse_task(spec.task), reg, cfg, arch, spec.sobolev_beta);
  } else {
    require(inst != nullptr, "linear runs need --instance");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          VectorXd a_star;
          if constexpr (std::is_same_v<T, SparseRecoveryInstance>) {
            out.trace = spec.depth == 1 ? run_flat(x, reg, cfg) : run_deep_hadamard(x, reg, cfg);
            a_star = x.a_star;
          } else {
            out.trace = spec.depth == 1 ? run_flat(x, reg, cfg) : run_deep_factorized(x, cfg, reg);
            a_star = vec(x.A_star);
          }
          if (spec.depth == 1) {
            const VectorXd a0 = initial_iterate(a_star.size(), spec.init_scale, spec.seed);
            TheoryBounds b = compute_bounds(x.X, x.y_star, a_star, a0, spec.alpha, spec.beta, spec.eta);
            if (spec.cl_samples > 0) {
              const VectorXd a_hat = least_squares_solution(x.X, x.y_star);
              const double r = spec.cl_radius > 0.0 ? spec.cl_radius : 2.0 * (a0 - a_hat).norm();
              if (r > 0.0)
                b.chi_estimate = estimate_cl_constant({x.X, x.y_star}, a0, r, spec.cl_samples, spec.seed).chi;
            }
            bounds = b;
          }
        },
        *inst);
  }

  out.report = io::make_report(config, out.trace);
  out.report["phases"] = out.trace.empty()
                             ? Json(nullptr)
                             : io::phases_to_json(detect_phases(out.trace, spec.train_tol, spec.rec_tol));
  out.report["bounds"] = bounds ? io::bounds_to_json(*bounds) : Json(nullptr);
  if (!out.trace.empty()) {
    const auto& r = out.trace.back();
    out.report["final"] = {{"step", r.step},       {"train_err", r.train_err}, {"rec_err", r.rec_err},
                           {"norm_l1", r.norm_l1}, {"norm_l2", r.norm_l2},     {"norm_nuc", r.norm_nuc}};
  } else {
    out.report["final"] = nullptr;
  }
  return out;
}

// ---- subcommands ---------------------------------------------------------

int cmd_gen(const std::string& kind, const Json& params, const std::string& out_path) {
  Json p = params;
  p["kind"] = kind;
  const io::Instance inst = generate_instance(p);
  io::write_instance(out_path, inst);
  std::cout << out_path << "\n";
  return kExitOk;
}

int cmd_run(const RunSpec& spec, const std::string& instance_path, const std::string& trace_path,
            const std::string& report_path) {
  std::optional<io::Instance> inst;
  if (!instance_path.empty()) inst = io::read_instance(instance_path);
  RunResult res = execute_run(spec, inst ? &*inst : nullptr);
  io::write_trace_csv(trace_path, res.trace);
  res.report["trace_file"] = trace_path;
  io::write_text(report_path, res.report.dump(2) + "\n");
  std::cout << report_path << "\n";
  return kExitOk;
}

const std::vector<std::string> kGridKeys = {"alpha", "beta", "L", "N", "tau", "s", "r", "seed"};

std::vector<Json> expand_grid(const Json& grid, bool cartesian) {
  if (!grid.is_object() || grid.empty()) throw InputError("sweep: grid is empty");
  std::vector<std::pair<std::string, Json>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (std::find(kGridKeys.begin(), kGridKeys.end(), key) == kGridKeys.end())
      throw InputError("sweep: unsupported grid parameter '" + key + "'");
    if (!values.is_array() || values.empty()) throw InputError("sweep: grid list '" + key + "' is empty");
    axes.emplace_back(key, values);
  }
  std::vector<Json> points;
  if (cartesian) {
    points.push_back(Json::object());
    for (const auto& [key, values] : axes) {
      std::vector<Json> next;
      for (const auto& pt : points)
        for (const auto& v : values) {
          Json q = pt;
          q[key] = v;
          next.push_back(std::move(q));
        }
      points = std::move(next);
    }
  } else {
    const std::size_t len = axes.front().second.size();
    for (const auto& [key, values] : axes)
      if (values.size() != len) throw InputError("sweep: zipped grid lists must have equal length");
    for (std::size_t i = 0; i < len; ++i) {
      Json q = Json::object();
      for (const auto& [key, values] : axes) q[key] = values[i];
      points.push_back(std::move(q));
    }
  }
  return points;
}

int sweep_workers(std::size_t runs) {
  int workers = omp_get_max_threads();
  if (const char* env = std::getenv("GROK_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) workers = v;
  }
  return std::max(1, std::min<int>(workers, static_cast<int>(runs)));
}

std::string opt_cell(const Json& j) { return j.is_null() ? "" : j.dump(); }

std::string csv_escape(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
  return s;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_override) {
  const Json spec = io::read_json(spec_path);
  if (!spec.is_object()) throw InputError("sweep: spec must be a JSON object");
  RunSpec base;
  if (spec.contains("run")) apply_json(base, spec.at("run"));
  const Json inst_base = spec.value("instance", Json(nullptr));
  if (!base.neural() && !inst_base.is_object()) throw InputError("sweep: linear sweeps need an 'instance' object");
  const std::vector<Json> points = expand_grid(spec.value("grid", Json::object()), spec.value("cartesian", true));
  const std::string out_dir = !out_override.empty() ? out_override : spec.value("out_dir", std::string("sweep"));

  // Resolve and validate every point before any run starts.
  struct Job {
    RunSpec run;
    Json inst;
    Json point;
    std::string id;
  };
  std::vector<Job> jobs;
  for (const Json& pt : points) {
    Job job{base, inst_base, pt, ""};
    for (const auto& [key, v] : pt.items()) {
      try {
        if (key == "alpha") job.run.alpha = v.get<double>();
        else if (key == "beta") job.run.beta = v.get<double>();
        else if (key == "L") job.run.depth = v.get<long>();
        else if (key == "seed") {
          job.run.seed = v.get<std::uint64_t>();
          if (job.inst.is_object()) job.inst["seed"] = v;
        } else {
          if (!job.inst.is_object()) throw InputError("sweep: '" + key + "' needs an instance");
          job.inst[key] = v;
        }
      } catch (const Json::exception&) {
        throw InputError("sweep: grid value for '" + key + "' has the wrong type");
      }
    }
    validate(job.run);
    job.id = io::run_id(Json{{"instance", job.inst}, {"run", spec_to_json(job.run)}});
    jobs.push_back(std::move(job));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

  struct Row {
    std::string status = "failed";
    std::string error;
    Json report;
  };
  std::vector<Row> rows(jobs.size());
  const int workers = sweep_workers(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long i = 0; i < static_cast<long>(jobs.size()); ++i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    Row& row = rows[static_cast<std::size_t>(i)];
    try {
      std::optional<io::Instance> inst;
      if (job.inst.is_object()) inst = generate_instance(job.inst);
      RunResult res = execute_run(job.run, inst ? &*inst : nullptr);
      const std::string base_path = (std::filesystem::path(out_dir) / job.id).string();
      io::write_trace_csv(base_path + ".csv", res.trace);
      res.report["trace_file"] = job.id + ".csv";
      res.report["sweep_point"] = job.point;
      io::write_text(base_path + ".json", res.report.dump(2) + "\n");
      row.status = res.report.at("status").get<std::string>();
      row.report = std::move(res.report);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  std::ostringstream csv;
  csv << "run_id,status,alpha,beta,L,N,tau,s,r,seed,t1,t2,delta_t,final_train_err,final_rec_err,error\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const Row& row = rows[i];
    failed += row.status == "failed";
    auto inst_cell = [&](const char* k) { return job.inst.is_object() && job.inst.contains(k) ? job.inst[k].dump() : ""; };
    csv << job.id << ',' << row.status << ',' << io::Json(job.run.alpha).dump() << ',' << io::Json(job.run.beta).dump()
        << ',' << job.run.depth << ',' << inst_cell("N") << ',' << inst_cell("tau") << ',' << inst_cell("s") << ','
        << inst_cell("r") << ',' << job.run.seed;
    const Json ph = row.report.is_object() ? row.report.value("phases", Json(nullptr)) : Json(nullptr);
    const Json fin = row.report.is_object() ? row.report.value("final", Json(nullptr)) : Json(nullptr);
    for (const char* k : {"t1", "t2", "delta_t"}) csv << ',' << (ph.is_object() ? opt_cell(ph[k]) : "");
    for (const char* k : {"train_err", "rec_err"}) csv << ',' << (fin.is_object() ? opt_cell(fin[k]) : "");
    csv << ',' << csv_escape(row.error) << '\n';
  }
  const std::string summary = (std::filesystem::path(out_dir) / "summary.csv").string();
  io::write_text(summary, csv.str());
  std::cout << summary << "\n";
  if (failed == jobs.size()) {
    std::cerr << "sweep: every run failed";
    if (!rows.empty() && !rows.front().error.empty()) std::cerr << " (first error: " << rows.front().error << ")";
    std::cerr << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_report(const std::string& trace_path, double train_tol, double rec_tol, const std::string& out_path) {
  require(train_tol > 0.0 && rec_tol > 0.0, "tolerances must be > 0");
  const Trace trace = io::read_trace_csv(trace_path);
  if (trace.empty()) throw IoError("trace '" + trace_path + "' has no records");
  Json rep{{"schema", "grok.report"},
           {"version", io::kReportVersion},
           {"trace_file", trace_path},
           {"train_tol", train_tol},
           {"rec_tol", rec_tol},
           {"records", trace.records.size()},
           {"phases", io::phases_to_json(detect_phases(trace, train_tol, rec_tol))}};
  const auto& r = trace.back();
  rep["final"] = {{"step", r.step}, {"train_err", r.train_err}, {"rec_err", r.rec_err}, {"norm_l2", r.norm_l2}};
  const std::string text = rep.dump(2) + "\n";
  if (!out_path.empty()) io::write_text(out_path, text);
  std::cout << text;
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_plot(const std::string& trace_path, const std::string& series_list, const std::string& out_path,
             const std::string& title, bool log_x, bool linear_y) {
  const Trace trace = io::read_trace_csv(trace_path);
  std::vector<double> steps;
  for (const auto& r : trace.records) steps.push_back(static_cast<double>(r.step));

  const std::vector<std::pair<std::string, double TraceRecord::*>> core = {
      {"train_err", &TraceRecord::train_err}, {"rec_err", &TraceRecord::rec_err},
      {"norm_l1", &TraceRecord::norm_l1},     {"norm_l2", &TraceRecord::norm_l2},
      {"norm_nuc", &TraceRecord::norm_nuc},   {"grad_g_norm", &TraceRecord::grad_g_norm},
      {"reg_grad_norm", &TraceRecord::reg_grad_norm}};

  std::vector<svg::Series> series;
  const auto names = split_list(series_list);
  require(!names.empty(), "plot: --series is empty");
  for (std::string name : names) {
    if (name.rfind("extras.", 0) == 0) name = name.substr(7);
    auto it = std::find_if(core.begin(), core.end(), [&](const auto& c) { return c.first == name; });
    if (it != core.end()) {
      svg::Series s{name, steps, {}};
      for (const auto& r : trace.records) s.y.push_back(r.*(it->second));
      series.push_back(std::move(s));
      continue;
    }
    if (trace.extra_index(name) >= 0) {
      svg::Series s{name, steps, {}};
      for (const auto& r : trace.records) s.y.push_back(*trace.extra(r, name));
      series.push_back(std::move(s));
      continue;
    }
    const MatrixXd traj = component_trajectory(trace, name);
    require(traj.cols() > 0, "plot: unknown series '" + name + "'");
    for (long k = 0; k < traj.cols(); ++k) {
      svg::Series s{name + std::to_string(k + 1), steps, {}};
      for (long i = 0; i < traj.rows(); ++i) s.y.push_back(traj(i, k));
      series.push_back(std::move(s));
    }
  }
  svg::PlotOptions opts;
  opts.title = title.empty() ? trace_path : title;
  opts.log_x = log_x;
  opts.log_y = !linear_y;
  io::write_text(out_path, svg::line_chart(series, opts));
  std::cout << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Grokking laboratory: instances, solvers, phase detection and plots"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->require_subcommand(1);
  std::string gen_out = "instance.json";
  long n = 0, s = 0, N = 0, n1 = 0, n2 = 0, r = 0;
  double tau = 0.0, snr = kDefaultSnr;
  std::uint64_t gen_seed = 0;
  std::string mode = "completion";
  auto* gen_sparse = gen->add_subcommand("sparse", "Sparse recovery instance");
  gen_sparse->add_option("--n", n, "signal dimension")->required();
  gen_sparse->add_option("--s", s, "sparsity")->required();
  gen_sparse->add_option("--N", N, "number of measurements")->required();
  auto* gen_low = gen->add_subcommand("lowrank", "Low-rank matrix instance");
  gen_low->add_option("--n1", n1, "rows")->required();
  gen_low->add_option("--n2", n2, "columns")->required();
  gen_low->add_option("--r", r, "rank")->required();
  gen_low->add_option("--N", N, "number of observations")->required();
  gen_low->add_option("--mode", mode, "completion or sensing")->capture_default_str();
  for (auto* sub : {gen_sparse, gen_low}) {
    sub->add_option("--tau", tau, "fraction of measurements aligned with the signal basis")->capture_default_str();
    sub->add_option("--snr", snr, "signal-to-noise ratio (inf for noiseless)")->capture_default_str();
    sub->add_option("--seed", gen_seed, "instance seed")->capture_default_str();
    sub->add_option("-o,--out", gen_out, "output path")->capture_default_str();
  }

  // run
  auto* run = app.add_subcommand("run", "Run a solver and write a trace CSV and report JSON");
  RunSpec flags;
  std::vector<std::pair<const Field*, CLI::Option*>> bound;
  std::string instance_path, config_path, trace_path = "trace.csv", report_path = "report.json";
  run->add_option("--instance", instance_path, "instance JSON (linear task)");
  run->add_option("--config", config_path, "JSON run config; flags override its values");
  run->add_option("--trace", trace_path, "trace CSV output")->capture_default_str();
  run->add_option("--report", report_path, "report JSON output")->capture_default_str();
  for (const auto& f : run_fields()) {
    const std::string flag = "--" + dashed(f.name);
    CLI::Option* opt = std::visit(
        [&](auto ptr) -> CLI::Option* {
          using V = std::remove_reference_t<decltype(flags.*ptr)>;
          if constexpr (std::is_same_v<V, bool>) {
            return run->add_flag(flag + ",!--no-" + dashed(f.name), flags.*ptr, f.help);
          } else {
            return run->add_option(flag, flags.*ptr, f.help)->capture_default_str();
          }
        },
        f.ptr);
    bound.emplace_back(&f, opt);
  }
  run->get_option("--steps")->check(CLI::NonNegativeNumber);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid from a JSON spec");
  std::string sweep_spec, sweep_out;
  sweep->add_option("spec", sweep_spec, "sweep spec JSON")->required();
  sweep->add_option("-o,--out-dir", sweep_out, "overrides the spec's out_dir");

  // report
  auto* report = app.add_subcommand("report", "Recompute phases from a trace CSV");
  std::string rep_trace, rep_out;
  double tol = 0.0, train_tol = kDefaultTol, rec_tol = kDefaultTol;
  report->add_option("--trace", rep_trace, "trace CSV")->required();
  auto* tol_opt = report->add_option("--tol", tol, "sets both tolerances");
  report->add_option("--train-tol", train_tol, "memorization threshold")->capture_default_str();
  report->add_option("--rec-tol", rec_tol, "generalization threshold")->capture_default_str();
  report->add_option("-o,--out", rep_out, "also write the JSON here");

  // plot
  auto* plot = app.add_subcommand("plot", "Render trace series as an SVG line chart");
  std::string plot_trace, plot_series = "train_err,rec_err", plot_out = "plot.svg", plot_title;
  bool log_x = false, linear_y = false;
  plot->add_option("--trace", plot_trace, "trace CSV")->required();
  plot->add_option("--series", plot_series,
                   "comma-separated columns; a component prefix such as sv expands to one line per component")
      ->capture_default_str();
  plot->add_option("-o,--out", plot_out, "output SVG")->capture_default_str();
  plot->add_option("--title", plot_title, "chart title");
  plot->add_flag("--logx", log_x, "logarithmic step axis");
  plot->add_flag("--linear-y", linear_y, "linear value axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      Json p;
      if (*gen_sparse) p = {{"n", n}, {"s", s}, {"N", N}};
      else p = {{"n1", n1}, {"n2", n2}, {"r", r}, {"N", N}, {"mode", mode}};
      p["tau"] = tau;
      p["snr"] = std::isinf(snr) ? Json("inf") : Json(snr);
      p["seed"] = gen_seed;
      return cmd_gen(*gen_sparse ? "sparse" : "lowrank", p, gen_out);
    }
    if (*run) {
      RunSpec spec;
      if (!config_path.empty()) apply_json(spec, io::read_json(config_path));
      for (const auto& [field, opt] : bound)
        if (opt->count() > 0) std::visit([&](auto ptr) { spec.*ptr = flags.*ptr; }, field->ptr);
      return cmd_run(spec, instance_path, trace_path, report_path);
    }
    if (*sweep) return cmd_sweep(sweep_spec, sweep_out);
    if (*report) {
      if (tol_opt->count() > 0) train_tol = rec_tol = tol;
      return cmd_report(rep_trace, train_tol, rec_tol, rep_out);
    }
    if (*plot) return cmd_plot(plot_trace, plot_series, plot_out, plot_title, log_x, linear_y);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("grok");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace grok::cli
