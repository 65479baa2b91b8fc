#include "grok/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "grok/error.hpp"
#include "grok/kernels.hpp"
#include "grok/linalg.hpp"
#include "grok/rng.hpp"

namespace grok {

std::string to_string(RegKind k) {
  switch (k) {
    case RegKind::none: return "none";
    case RegKind::l1: return "l1";
    case RegKind::l2: return "l2";
    case RegKind::nuclear: return "nuclear";
  }
  return "none";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::subgradient: return "subgradient";
    case Method::projected_subgradient: return "projected";
    case Method::proximal: return "proximal";
  }
  return "subgradient";
}

RegKind parse_reg_kind(const std::string& s) {
  if (s == "none") return RegKind::none;
  if (s == "l1") return RegKind::l1;
  if (s == "l2") return RegKind::l2;
  if (s == "nuclear" || s == "nuc" || s == "lstar") return RegKind::nuclear;
  throw InputError("unknown regularizer: " + s);
}

Method parse_method(const std::string& s) {
  if (s == "subgradient") return Method::subgradient;
  if (s == "projected" || s == "projected_subgradient") return Method::projected_subgradient;
  if (s == "proximal" || s == "ista" || s == "svt") return Method::proximal;
  throw InputError("unknown method: " + s);
}

long RunConfig::resolved_eval_every() const {
  return eval_every > 0 ? eval_every : std::max(1L, max_steps / 5000);
}

VectorXd initial_iterate(long n, double init_scale, std::uint64_t seed) {
  VectorXd a = VectorXd::Zero(n);
  if (init_scale == 0.0) return a;
  Rng rng(seed, Stream::init);
  const double sd = init_scale / std::sqrt(static_cast<double>(n));
  for (long i = 0; i < n; ++i) a(i) = sd * rng.normal();
  return a;
}

namespace {

void check_config(const RunConfig& cfg, const Regularizer& reg) {
  require(cfg.alpha > 0.0, "alpha must be > 0");
  require(cfg.max_steps >= 1, "max_steps must be >= 1");
  require(cfg.depth >= 1, "depth must be >= 1");
  require(cfg.init_scale >= 0.0, "init_scale must be >= 0");
  require(reg.beta >= 0.0, "beta must be >= 0");
  require(cfg.rec_tol > 0.0 && cfg.train_tol > 0.0, "tolerances must be > 0");
}

// The linear model seen by the flat solvers: y = X v with v = vec(target).
struct LinearProblem {
  const MatrixXd& X;
  MatrixXd Xt;
  const VectorXd& y;
  VectorXd target;
  long rows;
  long cols;  // 1 for vector problems

  LinearProblem(const MatrixXd& X_, const VectorXd& y_, VectorXd target_, long r, long c)
      : X(X_), Xt(X_.transpose()), y(y_), target(std::move(target_)), rows(r), cols(c) {}
  bool is_matrix() const { return cols > 1; }
  long dim() const { return rows * cols; }
};

double safe_norm(const VectorXd& v) {
  const double n = v.norm();
  return n > 0.0 ? n : 1.0;
}

VectorXd reg_subgradient(const Regularizer& reg, const VectorXd& v, const LinearProblem& p) {
  switch (reg.kind) {
    case RegKind::none: return VectorXd::Zero(v.size());
    case RegKind::l1: return l1_subgradient(v);
    case RegKind::l2: return v;
    case RegKind::nuclear:
      return vec(nuclear_subgradient(unvec(v, p.rows, p.cols)));
  }
  return VectorXd::Zero(v.size());
}

VectorXd reg_prox(const Regularizer& reg, const VectorXd& v, double gamma, const LinearProblem& p) {
  switch (reg.kind) {
    case RegKind::none: return v;
    case RegKind::l1: return soft_threshold(v, gamma);
    case RegKind::l2: return v / (1.0 + gamma);
    case RegKind::nuclear:
      return vec(singular_value_threshold(unvec(v, p.rows, p.cols), gamma));
  }
  return v;
}

bool large_beta(const MatrixXd& X, const Regularizer& reg, long rows, long cols) {
  if (reg.kind != RegKind::l1 && reg.kind != RegKind::nuclear) return false;
  SvdFactors f = compact_svd(X);
  const double smax = f.rank() ? f.S(0) * f.S(0) : 0.0;
  const double width = reg.kind == RegKind::l1 ? static_cast<double>(rows * cols)
                                               : static_cast<double>(std::min(rows, cols));
  return reg.strength() * std::sqrt(width) > smax;
}

// Accumulates records and tracks the early-exit condition.
class Recorder {
 public:
  Recorder(const RunConfig& cfg, Trace& trace) : cfg_(cfg), trace_(trace), every_(cfg.resolved_eval_every()) {}

  bool due(long step) const { return step % every_ == 0 || step == cfg_.max_steps; }

  // Returns false when the run should stop.
  bool push(TraceRecord rec) {
    const bool finite = std::isfinite(rec.train_err) && std::isfinite(rec.rec_err) &&
                        std::isfinite(rec.norm_l1) && std::isfinite(rec.norm_l2) &&
                        std::isfinite(rec.grad_g_norm);
    if (!finite) {
      trace_.diverged = true;
      return false;
    }
    trace_.steps_run = rec.step;
    const double rec_err = rec.rec_err;
    trace_.records.push_back(std::move(rec));
    if (!cfg_.early_exit) return true;
    streak_ = rec_err <= cfg_.rec_tol / 10.0 ? streak_ + 1 : 0;
    if (streak_ >= 100 && trace_.records.back().step < cfg_.max_steps) {
      trace_.early_exit = true;
      return false;
    }
    return true;
  }

 private:
  const RunConfig& cfg_;
  Trace& trace_;
  long every_;
  long streak_ = 0;
};

void fill_norms(TraceRecord& rec, const VectorXd& v, long rows, long cols) {
  rec.norm_l1 = v.lpNorm<1>();
  rec.norm_l2 = v.norm();
  rec.norm_nuc = cols > 1 ? norm(unvec(v, rows, cols), NormKind::nuclear) : rec.norm_l2;
}

std::vector<std::string> component_names(const LinearProblem& p) {
  std::vector<std::string> names;
  if (p.is_matrix()) {
    const long k = std::min(p.rows, p.cols);
    for (long i = 0; i < k; ++i) names.push_back("sv" + std::to_string(i));
    for (long i = 0; i < k; ++i) names.push_back("err_sv" + std::to_string(i));
  } else {
    for (long i = 0; i < p.rows; ++i) names.push_back("a" + std::to_string(i));
  }
  return names;
}

std::vector<double> padded_singular_values(const MatrixXd& A) {
  const long k = std::min(A.rows(), A.cols());
  Eigen::JacobiSVD<MatrixXd> svd(A);
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (long i = 0; i < svd.singularValues().size(); ++i) out[i] = svd.singularValues()(i);
  return out;
}

std::vector<double> components(const VectorXd& v, const LinearProblem& p) {
  if (!p.is_matrix()) return std::vector<double>(v.data(), v.data() + v.size());
  MatrixXd A = unvec(v, p.rows, p.cols);
  std::vector<double> out = padded_singular_values(A);
  std::vector<double> err = padded_singular_values(A - unvec(p.target, p.rows, p.cols));
  out.insert(out.end(), err.begin(), err.end());
  return out;
}

TraceRecord make_record(long step, const VectorXd& v, const VectorXd& Xv, const VectorXd& G,
                        double reg_grad_norm, const LinearProblem& p, bool with_components) {
  TraceRecord rec;
  rec.step = step;
  rec.train_err = (Xv - p.y).norm() / safe_norm(p.y);
  rec.rec_err = (v - p.target).norm() / safe_norm(p.target);
  fill_norms(rec, v, p.rows, p.cols);
  rec.grad_g_norm = G.norm();
  rec.reg_grad_norm = reg_grad_norm;
  if (with_components) rec.extras = components(v, p);
  return rec;
}

Trace run_linear(const LinearProblem& p, const Regularizer& reg, const RunConfig& cfg) {
  check_config(cfg, reg);
  require(reg.kind != RegKind::nuclear || p.is_matrix(), "nuclear regularizer needs a matrix problem");
  Trace trace;
  if (cfg.record_components) trace.extra_names = component_names(p);
  trace.large_beta_warning = large_beta(p.X, reg, p.rows, p.cols);

  const double beta = reg.strength();
  const double alpha = cfg.alpha;
  VectorXd v = initial_iterate(p.dim(), cfg.init_scale, cfg.seed);
  VectorXd Xv, resid, G, H;
  std::optional<AffineProjector> proj;
  if (cfg.method == Method::projected_subgradient) proj.emplace(p.X, p.y);

  Recorder recorder(cfg, trace);
  for (long step = 0;; ++step) {
    kernels::matvec_t(p.Xt, v, Xv);
    resid = Xv - p.y;
    kernels::matvec_t(p.X, resid, G);
    const bool need_h = cfg.method != Method::proximal || recorder.due(step);
    if (need_h) H = reg_subgradient(reg, v, p);

    if (recorder.due(step)) {
      if (cfg.observer) cfg.observer(step, v);
      if (!recorder.push(make_record(step, v, Xv, G, beta * H.norm(), p, cfg.record_components)))
        break;
    }
    if (step == cfg.max_steps) break;

    switch (cfg.method) {
      case Method::subgradient:
        v -= alpha * (G + beta * H);
        break;
      case Method::proximal:
        v = reg_prox(reg, v - alpha * G, alpha * beta, p);
        break;
      case Method::projected_subgradient:
        v = (*proj)(v - (alpha * beta) * H);
        break;
    }
  }
  return trace;
}

}  // namespace

Trace run_flat(const SparseRecoveryInstance& inst, const Regularizer& reg, const RunConfig& cfg) {
  LinearProblem p(inst.X, inst.y_star, inst.a_star, inst.n, 1);
  return run_linear(p, reg, cfg);
}

Trace run_flat(const LowRankInstance& inst, const Regularizer& reg, const RunConfig& cfg) {
  LinearProblem p(inst.X, inst.y_star, vec(inst.A_star), inst.n1, inst.n2);
  return run_linear(p, reg, cfg);
}

Trace run_deep_hadamard(const SparseRecoveryInstance& inst, const Regularizer& reg,
                        const RunConfig& cfg) {
  check_config(cfg, reg);
  require(reg.kind == RegKind::none || reg.kind == RegKind::l2,
          "run_deep_hadamard: regularizer must be l2 or none");
  require(cfg.method == Method::subgradient, "run_deep_hadamard: only plain gradient steps");
  LinearProblem p(inst.X, inst.y_star, inst.a_star, inst.n, 1);
  const long n = inst.n;
  const int L = cfg.depth;
  const double alpha = cfg.alpha;
  const double beta = reg.strength();

  // Factors are drawn one after another from the init stream, so L=1 matches run_flat.
  std::vector<VectorXd> F(static_cast<std::size_t>(L), VectorXd::Zero(n));
  if (cfg.init_scale != 0.0) {
    Rng rng(cfg.seed, Stream::init);
    const double sd = cfg.init_scale / std::sqrt(static_cast<double>(n));
    for (auto& f : F)
      for (long i = 0; i < n; ++i) f(i) = sd * rng.normal();
  }

  Trace trace;
  if (cfg.record_components) trace.extra_names = component_names(p);
  Recorder recorder(cfg, trace);
  VectorXd a, Xa, resid, G;
  std::vector<VectorXd> prefix(static_cast<std::size_t>(L)), suffix(static_cast<std::size_t>(L));
  for (long step = 0;; ++step) {
    a = grad::hadamard_product(F);
    kernels::matvec_t(p.Xt, a, Xa);
    resid = Xa - p.y;
    kernels::matvec_t(p.X, resid, G);

    if (recorder.due(step)) {
      double fsq = 0.0;
      for (const auto& f : F) fsq += f.squaredNorm();
      if (cfg.observer) cfg.observer(step, a);
      if (!recorder.push(make_record(step, a, Xa, G, beta * std::sqrt(fsq), p, cfg.record_components)))
        break;
    }
    if (step == cfg.max_steps) break;

    prefix[0] = VectorXd::Ones(n);
    for (int k = 1; k < L; ++k) prefix[k] = prefix[k - 1].cwiseProduct(F[k - 1]);
    suffix[L - 1] = VectorXd::Ones(n);
    for (int k = L - 2; k >= 0; --k) suffix[k] = suffix[k + 1].cwiseProduct(F[k + 1]);
    for (int k = 0; k < L; ++k) {
      VectorXd gk = prefix[k].cwiseProduct(suffix[k]).cwiseProduct(G);
      F[k] -= alpha * (gk + beta * F[k]);
    }
  }
  return trace;
}

Trace run_deep_factorized(const LowRankInstance& inst, const RunConfig& cfg, const Regularizer& reg) {
  check_config(cfg, reg);
  require(reg.kind == RegKind::none || reg.kind == RegKind::l2,
          "run_deep_factorized: regularizer must be l2 or none");
  require(cfg.depth >= 2, "run_deep_factorized: depth must be >= 2");
  const long d = cfg.inner_dim > 0 ? cfg.inner_dim : std::min(inst.n1, inst.n2);
  require(d >= 1, "run_deep_factorized: inner_dim must be >= 1");
  require(d >= inst.r, "run_deep_factorized: inner_dim must be >= rank");

  LinearProblem p(inst.X, inst.y_star, vec(inst.A_star), inst.n1, inst.n2);
  const int L = cfg.depth;
  const double alpha = cfg.alpha;
  const double beta = reg.strength();

  std::vector<MatrixXd> F(static_cast<std::size_t>(L));
  {
    Rng rng(cfg.seed, Stream::init);
    const double sd = cfg.init_scale / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < L; ++k) {
      const long rows = k == 0 ? inst.n1 : d;
      const long cols = k == L - 1 ? inst.n2 : d;
      F[k].resize(rows, cols);
      for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i) F[k](i, j) = cfg.init_scale == 0.0 ? 0.0 : sd * rng.normal();
    }
  }

  Trace trace;
  if (cfg.record_components) trace.extra_names = component_names(p);
  Recorder recorder(cfg, trace);
  VectorXd v, Xv, resid, G;
  for (long step = 0;; ++step) {
    v = vec(grad::chain_product(F));
    kernels::matvec_t(p.Xt, v, Xv);
    resid = Xv - p.y;
    kernels::matvec_t(p.X, resid, G);

    if (recorder.due(step)) {
      double fsq = 0.0;
      for (const auto& f : F) fsq += f.squaredNorm();
      if (cfg.observer) cfg.observer(step, v);
      if (!recorder.push(make_record(step, v, Xv, G, beta * std::sqrt(fsq), p, cfg.record_components)))
        break;
    }
    if (step == cfg.max_steps) break;

    MatrixXd Gm = unvec(G, inst.n1, inst.n2);
    std::vector<MatrixXd> prefix(static_cast<std::size_t>(L)), suffix(static_cast<std::size_t>(L));
    prefix[0] = MatrixXd::Identity(inst.n1, inst.n1);
    for (int k = 1; k < L; ++k) prefix[k] = prefix[k - 1] * F[k - 1];
    suffix[L - 1] = MatrixXd::Identity(inst.n2, inst.n2);
    for (int k = L - 2; k >= 0; --k) suffix[k] = F[k + 1] * suffix[k + 1];
    for (int k = 0; k < L; ++k) {
      MatrixXd gk = prefix[k].transpose() * Gm * suffix[k].transpose();
      F[k] -= alpha * (gk + beta * F[k]);
    }
  }
  return trace;
}

namespace grad {

double loss(const MatrixXd& X, const VectorXd& y, const VectorXd& a) {
  return 0.5 * (X * a - y).squaredNorm();
}

VectorXd flat(const MatrixXd& X, const VectorXd& y, const VectorXd& a) {
  return X.transpose() * (X * a - y);
}

VectorXd hadamard_product(const std::vector<VectorXd>& factors) {
  require(!factors.empty(), "hadamard_product: no factors");
  VectorXd a = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) a = a.cwiseProduct(factors[k]);
  return a;
}

std::vector<VectorXd> hadamard(const MatrixXd& X, const VectorXd& y,
                               const std::vector<VectorXd>& factors) {
  VectorXd G = flat(X, y, hadamard_product(factors));
  std::vector<VectorXd> out;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    VectorXd others = VectorXd::Ones(G.size());
    for (std::size_t j = 0; j < factors.size(); ++j)
      if (j != k) others = others.cwiseProduct(factors[j]);
    out.push_back(others.cwiseProduct(G));
  }
  return out;
}

MatrixXd chain_product(const std::vector<MatrixXd>& factors) {
  require(!factors.empty(), "chain_product: no factors");
  MatrixXd P = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) P = P * factors[k];
  return P;
}

std::vector<MatrixXd> factorized(const MatrixXd& X, const VectorXd& y,
                                 const std::vector<MatrixXd>& factors) {
  MatrixXd P = chain_product(factors);
  MatrixXd G = unvec(flat(X, y, vec(P)), P.rows(), P.cols());
  std::vector<MatrixXd> out;
  const std::size_t L = factors.size();
  for (std::size_t k = 0; k < L; ++k) {
    MatrixXd left = MatrixXd::Identity(P.rows(), P.rows());
    for (std::size_t j = 0; j < k; ++j) left = left * factors[j];
    MatrixXd right = MatrixXd::Identity(P.cols(), P.cols());
    for (std::size_t j = L; j-- > k + 1;) right = factors[j] * right;
    out.push_back(left.transpose() * G * right.transpose());
  }
  return out;
}

}  // namespace grad

}  // namespace grok
