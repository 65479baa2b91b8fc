#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grok/optimizers.hpp"
#include "grok/trace.hpp"

namespace grok::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Combine { sum, hadamard };

// Modular-addition head: logits = b2 + W2 relu(b1 + W1 (E[x1] op E[x2])).
// Teacher-student mode uses only A and B: y = B relu(A x).
struct MlpParams {
  MatrixXd E;   // p x d1
  MatrixXd W1;  // d2 x d1
  VectorXd b1;  // d2
  MatrixXd W2;  // p x d2
  VectorXd b2;  // p
  MatrixXd A;   // r x d
  MatrixXd B;   // c x r

  bool is_mod_add() const { return E.size() > 0; }
  MlpParams zeros_like() const;
  bool all_finite() const;

  // Visits every tensor as a flat span; `is_matrix` is false for biases.
  void for_each(const std::function<void(const char* name, double* data, long size, bool is_matrix)>& f);
  void for_each(const std::function<void(const char* name, const double* data, long size, bool is_matrix)>& f) const;
};

struct ModAddDataset {
  long p = 0;
  double r_train = 0.0;
  std::vector<int> x1, x2, labels;  // all p^2 pairs, row-major in (x1, x2)
  std::vector<char> train_mask;
  std::vector<long> train_idx, val_idx;

  long size() const { return p * p; }
};

ModAddDataset gen_mod_add(long p, double r_train, std::uint64_t seed);

// Inputs for one forward/backward pass. Mod-add batches fill x1/x2/labels;
// teacher-student batches fill inputs (d x B) and targets (c x B).
struct Batch {
  std::vector<int> x1, x2, labels;
  MatrixXd inputs;
  MatrixXd targets;
  long size() const;
};

Batch mod_add_batch(const ModAddDataset& data, const std::vector<long>& idx);

struct Teacher {
  MatrixXd A;  // r x d
  MatrixXd B;  // c x r
  MatrixXd outputs(const MatrixXd& inputs) const;
  // Input Jacobian B diag(relu'(A x)) A at one input.
  MatrixXd jacobian(const VectorXd& x) const;
};

// Entries of x, A and r*B drawn i.i.d. N(0, 1).
Teacher make_teacher(long d, long r, long c, std::uint64_t seed);

// Logits (p x B) for mod-add, outputs (c x B) for teacher-student.
MatrixXd mlp_forward(const MlpParams& params, const Batch& batch, Combine combine = Combine::sum);

enum class LossKind { cross_entropy, square };

struct LossAndGrads {
  double loss = 0.0;       // data loss + beta h + sobolev penalty
  double data_loss = 0.0;
  double reg_value = 0.0;  // h(theta), unscaled
  double sobolev = 0.0;    // penalty, unscaled
  MlpParams grads;
  MlpParams data_grads;    // data-loss part only
};

// h: l1 and l2 (0.5 |.|^2) cover every tensor; nuclear covers matrices only.
LossAndGrads loss_and_grads(const MlpParams& params, const Batch& batch, LossKind loss,
                            const Regularizer& reg, double sobolev_beta = 0.0,
                            const Teacher* teacher = nullptr, Combine combine = Combine::sum);

double regularizer_value(const MlpParams& params, RegKind kind);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpParams m;
  MlpParams v;
  long step = 0;
  static AdamState for_params(const MlpParams& params);
};

// Bias-corrected Adam step, in place.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double alpha,
               const AdamHyper& hyper = {});

enum class Task { mod_add, teacher_student };

struct NeuralArch {
  // modular addition
  long p = 97;
  long d1 = 64;
  long d2 = 64;
  double r_train = 0.4;
  Combine combine = Combine::sum;
  // teacher-student
  long d = 100;
  long r = 500;
  long c = 2;
  long n_train = 100;
  long n_test = 1000;
};

// Normal initialization: every tensor with leading dimension n1 gets N(0, 1/n1).
MlpParams init_params(Task task, const NeuralArch& arch, std::uint64_t seed);

// Full-batch Adam. Records carry 1 - accuracy (mod-add) or relative output
// error (teacher-student) in train_err/rec_err, plus loss/accuracy extras.
Trace train_neural(Task task, const Regularizer& reg, const RunConfig& cfg,
                   const NeuralArch& arch, double sobolev_beta = 0.0);

}  // namespace grok::nn
