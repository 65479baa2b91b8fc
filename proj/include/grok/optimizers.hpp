#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grok/instances.hpp"
#include "grok/phases.hpp"
#include "grok/trace.hpp"

namespace grok {

enum class RegKind { none, l1, l2, nuclear };
enum class Method { subgradient, projected_subgradient, proximal };

std::string to_string(RegKind k);
std::string to_string(Method m);
RegKind parse_reg_kind(const std::string& s);
Method parse_method(const std::string& s);

// l2 is h = 0.5 |x|^2, so its gradient is the parameter itself.
struct Regularizer {
  RegKind kind = RegKind::none;
  double beta = 0.0;

  double strength() const { return kind == RegKind::none ? 0.0 : beta; }
};

struct RunConfig {
  Method method = Method::subgradient;
  double alpha = 0.1;
  long max_steps = 1000;
  double init_scale = 0.0;
  int depth = 1;
  long inner_dim = 0;
  long eval_every = 0;  // 0 selects max(1, max_steps / 5000)
  bool record_components = false;
  std::uint64_t seed = 0;
  double train_tol = kDefaultTol;
  double rec_tol = kDefaultTol;
  bool early_exit = true;
  // Called with the flat (or vectorized) iterate at every recorded step.
  std::function<void(long step, const Eigen::VectorXd& iterate)> observer;

  long resolved_eval_every() const;
};

// Plain, proximal or projected (sub)gradient descent on the flat parameter.
// Records are taken at step 0, every eval_every steps and at the final step.
// A run stops early once rec_err <= rec_tol/10 for 100 consecutive records.
Trace run_flat(const SparseRecoveryInstance& inst, const Regularizer& reg, const RunConfig& cfg);
Trace run_flat(const LowRankInstance& inst, const Regularizer& reg, const RunConfig& cfg);

// a = A_1 * ... * A_L (elementwise), all factors updated from the same iterate.
Trace run_deep_hadamard(const SparseRecoveryInstance& inst, const Regularizer& reg,
                        const RunConfig& cfg);

// A = F_1 F_2 ... F_L with F_1: n1 x d, F_L: d x n2, inner factors d x d.
Trace run_deep_factorized(const LowRankInstance& inst, const RunConfig& cfg,
                          const Regularizer& reg = {});

// Initial flat iterate: i.i.d. N(0, init_scale^2 / n) per coordinate.
Eigen::VectorXd initial_iterate(long n, double init_scale, std::uint64_t seed);

}  // namespace grok

namespace grok::grad {

// g(a) = 0.5 |X a - y|^2 and its gradient.
double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& a);
Eigen::VectorXd flat(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& a);

Eigen::VectorXd hadamard_product(const std::vector<Eigen::VectorXd>& factors);
// Gradient of g(A_1 * ... * A_L) with respect to each factor.
std::vector<Eigen::VectorXd> hadamard(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const std::vector<Eigen::VectorXd>& factors);

Eigen::MatrixXd chain_product(const std::vector<Eigen::MatrixXd>& factors);
// Gradient of g(vec(F_1 ... F_L)) with respect to each factor.
std::vector<Eigen::MatrixXd> factorized(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const std::vector<Eigen::MatrixXd>& factors);

}  // namespace grok::grad
