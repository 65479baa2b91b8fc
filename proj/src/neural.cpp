#include "grok/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grok/error.hpp"
#include "grok/kernels.hpp"
#include "grok/linalg.hpp"
#include "grok/rng.hpp"

namespace grok::nn {

namespace {

template <class P, class F>
void visit(P& p, F&& f) {
  f("E", p.E.data(), p.E.size(), true);
  f("W1", p.W1.data(), p.W1.size(), true);
  f("b1", p.b1.data(), p.b1.size(), false);
  f("W2", p.W2.data(), p.W2.size(), true);
  f("b2", p.b2.data(), p.b2.size(), false);
  f("A", p.A.data(), p.A.size(), true);
  f("B", p.B.data(), p.B.size(), true);
}

template <class P, class F>
void visit_matrices(P& p, F&& f) {
  for (auto* m : {&p.E, &p.W1, &p.W2, &p.A, &p.B})
    if (m->size() > 0) f(*m);
}

bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

void fill_normal(Rng& rng, double* data, long size, double sd) {
  for (long i = 0; i < size; ++i) data[i] = sd * rng.normal();
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

// Forward intermediates for the mod-add head.
struct ModAddCache {
  MatrixXd Z;     // d1 x B combined embeddings (hadamard only)
  MatrixXd pre1;  // d2 x B
  MatrixXd H;     // d2 x B
  MatrixXd logits;
};

void check_tokens(const Batch& batch, long p) {
  require(batch.x1.size() == batch.x2.size(), "mlp_forward: x1 and x2 lengths differ");
  for (std::size_t i = 0; i < batch.x1.size(); ++i)
    if (batch.x1[i] < 0 || batch.x1[i] >= p || batch.x2[i] < 0 || batch.x2[i] >= p)
      throw InputError("mlp_forward: token index out of range");
}

ModAddCache forward_mod_add(const MlpParams& w, const Batch& batch, Combine combine) {
  const long p = w.E.rows();
  check_tokens(batch, p);
  const long n = static_cast<long>(batch.x1.size());
  const long d2 = w.W1.rows();
  ModAddCache c;
  if (combine == Combine::sum) {
    // W1 (E[x1] + E[x2]) = P[:, x1] + P[:, x2] with P = W1 E^T.
    MatrixXd P;
    kernels::matmul_nt(w.W1, w.E, P);
    c.pre1.resize(d2, n);
    for (long j = 0; j < n; ++j)
      c.pre1.col(j) = w.b1 + P.col(batch.x1[j]) + P.col(batch.x2[j]);
  } else {
    const long d1 = w.E.cols();
    c.Z.resize(d1, n);
    for (long j = 0; j < n; ++j)
      c.Z.col(j) = (w.E.row(batch.x1[j]).array() * w.E.row(batch.x2[j]).array()).transpose();
    kernels::matmul(w.W1, c.Z, c.pre1);
    c.pre1.colwise() += w.b1;
  }
  c.H = c.pre1.unaryExpr(&relu);
  kernels::matmul(w.W2, c.H, c.logits);
  c.logits.colwise() += w.b2;
  return c;
}

struct StudentCache {
  MatrixXd pre;  // r x B
  MatrixXd H;
  MatrixXd out;  // c x B
};

StudentCache forward_student(const MlpParams& w, const MatrixXd& inputs) {
  require(inputs.rows() == w.A.cols(), "mlp_forward: input dimension mismatch");
  StudentCache c;
  kernels::matmul(w.A, inputs, c.pre);
  c.H = c.pre.unaryExpr(&relu);
  kernels::matmul(w.B, c.H, c.out);
  return c;
}

// Mean cross-entropy; overwrites logits with d loss / d logits.
double softmax_xent(MatrixXd& logits, const std::vector<int>& labels) {
  const long n = logits.cols();
  double loss = 0.0;
  for (long j = 0; j < n; ++j) {
    auto col = logits.col(j);
    const double mx = col.maxCoeff();
    col.array() = (col.array() - mx).exp();
    const double z = col.sum();
    loss += std::log(z) - std::log(col(labels[j]));
    col /= z;
    col(labels[j]) -= 1.0;
  }
  logits /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

void mod_add_backward(const MlpParams& w, const Batch& batch, Combine combine,
                      ModAddCache& c, MlpParams& g) {
  const long n = c.H.cols();
  MatrixXd& dlogits = c.logits;
  kernels::matmul_nt(dlogits, c.H, g.W2);
  g.b2 = dlogits.rowwise().sum();
  MatrixXd W2t = w.W2.transpose();
  MatrixXd dpre;
  kernels::matmul(W2t, dlogits, dpre);
  for (long i = 0; i < dpre.size(); ++i)
    if (!(c.pre1.data()[i] > 0.0)) dpre.data()[i] = 0.0;
  g.b1 = dpre.rowwise().sum();
  g.E.setZero(w.E.rows(), w.E.cols());
  if (combine == Combine::sum) {
    MatrixXd dP = MatrixXd::Zero(w.W1.rows(), w.E.rows());
    for (long j = 0; j < n; ++j) {
      dP.col(batch.x1[j]) += dpre.col(j);
      dP.col(batch.x2[j]) += dpre.col(j);
    }
    kernels::matmul(dP, w.E, g.W1);
    MatrixXd dPt = dP.transpose();
    kernels::matmul(dPt, w.W1, g.E);
  } else {
    kernels::matmul_nt(dpre, c.Z, g.W1);
    MatrixXd W1t = w.W1.transpose();
    MatrixXd dZ;
    kernels::matmul(W1t, dpre, dZ);
    for (long j = 0; j < n; ++j) {
      const int a = batch.x1[j], b = batch.x2[j];
      g.E.row(a) += (dZ.col(j).array() * w.E.row(b).transpose().array()).matrix().transpose();
      g.E.row(b) += (dZ.col(j).array() * w.E.row(a).transpose().array()).matrix().transpose();
    }
  }
}

// Adds the regularizer gradient scaled by beta into g and returns h(theta).
double add_reg(const MlpParams& w, const Regularizer& reg, MlpParams& g) {
  const double beta = reg.strength();
  double h = 0.0;
  if (reg.kind == RegKind::l1 || reg.kind == RegKind::l2) {
    std::vector<std::pair<const double*, long>> src;
    visit(w, [&](const char*, const double* d, long n, bool) { src.emplace_back(d, n); });
    std::size_t k = 0;
    visit(g, [&](const char*, double* d, long n, bool) {
      const double* s = src[k++].first;
      for (long i = 0; i < n; ++i) {
        if (reg.kind == RegKind::l1) {
          h += std::abs(s[i]);
          d[i] += beta * ((s[i] > 0.0) - (s[i] < 0.0));
        } else {
          h += 0.5 * s[i] * s[i];
          d[i] += beta * s[i];
        }
      }
    });
  } else if (reg.kind == RegKind::nuclear) {
    std::vector<const MatrixXd*> src;
    visit_matrices(w, [&](const MatrixXd& m) { src.push_back(&m); });
    std::size_t k = 0;
    visit_matrices(g, [&](MatrixXd& m) {
      const MatrixXd& s = *src[k++];
      h += norm(s, NormKind::nuclear);
      m += beta * nuclear_subgradient(s);
    });
  }
  return h;
}

}  // namespace

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.E = MatrixXd::Zero(E.rows(), E.cols());
  z.W1 = MatrixXd::Zero(W1.rows(), W1.cols());
  z.b1 = VectorXd::Zero(b1.size());
  z.W2 = MatrixXd::Zero(W2.rows(), W2.cols());
  z.b2 = VectorXd::Zero(b2.size());
  z.A = MatrixXd::Zero(A.rows(), A.cols());
  z.B = MatrixXd::Zero(B.rows(), B.cols());
  return z;
}

bool MlpParams::all_finite() const {
  bool ok = true;
  visit(*this, [&](const char*, const double* d, long n, bool) {
    for (long i = 0; i < n && ok; ++i) ok = std::isfinite(d[i]);
  });
  return ok;
}

void MlpParams::for_each(const std::function<void(const char*, double*, long, bool)>& f) {
  visit(*this, f);
}

void MlpParams::for_each(const std::function<void(const char*, const double*, long, bool)>& f) const {
  visit(*this, f);
}

ModAddDataset gen_mod_add(long p, double r_train, std::uint64_t seed) {
  require(is_prime(p), "gen_mod_add: p must be a prime >= 2");
  require(r_train > 0.0 && r_train < 1.0, "gen_mod_add: r_train must lie in (0, 1)");
  const long total = p * p;
  const long n_train = std::lround(r_train * static_cast<double>(total));
  require(n_train > 0 && n_train < total, "gen_mod_add: degenerate train/validation split");

  ModAddDataset d;
  d.p = p;
  d.r_train = r_train;
  d.x1.resize(total);
  d.x2.resize(total);
  d.labels.resize(total);
  for (long a = 0; a < p; ++a)
    for (long b = 0; b < p; ++b) {
      const long i = a * p + b;
      d.x1[i] = static_cast<int>(a);
      d.x2[i] = static_cast<int>(b);
      d.labels[i] = static_cast<int>((a + b) % p);
    }
  d.train_mask.assign(total, 0);
  Rng rng(seed, Stream::split);
  for (long i : rng.sample_without_replacement(total, n_train)) d.train_mask[i] = 1;
  for (long i = 0; i < total; ++i) (d.train_mask[i] ? d.train_idx : d.val_idx).push_back(i);
  return d;
}

long Batch::size() const {
  return x1.empty() ? inputs.cols() : static_cast<long>(x1.size());
}

Batch mod_add_batch(const ModAddDataset& data, const std::vector<long>& idx) {
  Batch b;
  for (long i : idx) {
    require(i >= 0 && i < data.size(), "mod_add_batch: index out of range");
    b.x1.push_back(data.x1[i]);
    b.x2.push_back(data.x2[i]);
    b.labels.push_back(data.labels[i]);
  }
  return b;
}

MatrixXd Teacher::outputs(const MatrixXd& inputs) const {
  return B * (A * inputs).unaryExpr(&relu);
}

MatrixXd Teacher::jacobian(const VectorXd& x) const {
  const VectorXd mask = (A * x).unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; });
  return B * (mask.asDiagonal() * A);
}

Teacher make_teacher(long d, long r, long c, std::uint64_t seed) {
  require(d >= 1 && r >= 1 && c >= 1, "make_teacher: dimensions must be >= 1");
  Rng rng(seed, Stream::teacher);
  Teacher t;
  t.A.resize(r, d);
  t.B.resize(c, r);
  fill_normal(rng, t.A.data(), t.A.size(), 1.0);
  fill_normal(rng, t.B.data(), t.B.size(), 1.0 / static_cast<double>(r));
  return t;
}

MatrixXd mlp_forward(const MlpParams& params, const Batch& batch, Combine combine) {
  if (params.is_mod_add()) return forward_mod_add(params, batch, combine).logits;
  require(params.A.size() > 0, "mlp_forward: parameters are empty");
  return forward_student(params, batch.inputs).out;
}

double regularizer_value(const MlpParams& params, RegKind kind) {
  double h = 0.0;
  switch (kind) {
    case RegKind::none:
      break;
    case RegKind::l1:
      visit(params, [&](const char*, const double* d, long n, bool) {
        for (long i = 0; i < n; ++i) h += std::abs(d[i]);
      });
      break;
    case RegKind::l2:
      visit(params, [&](const char*, const double* d, long n, bool) {
        for (long i = 0; i < n; ++i) h += 0.5 * d[i] * d[i];
      });
      break;
    case RegKind::nuclear:
      visit_matrices(params, [&](const MatrixXd& m) { h += norm(m, NormKind::nuclear); });
      break;
  }
  return h;
}

LossAndGrads loss_and_grads(const MlpParams& params, const Batch& batch, LossKind loss,
                            const Regularizer& reg, double sobolev_beta, const Teacher* teacher,
                            Combine combine) {
  require(sobolev_beta >= 0.0, "loss_and_grads: sobolev_beta must be >= 0");
  if (sobolev_beta > 0.0)
    require(loss == LossKind::square && teacher != nullptr,
            "loss_and_grads: the Sobolev penalty needs square loss and a teacher");
  LossAndGrads out;
  out.grads = params.zeros_like();

  if (params.is_mod_add()) {
    require(loss == LossKind::cross_entropy, "loss_and_grads: mod-add uses cross-entropy");
    require(batch.labels.size() == batch.x1.size(), "loss_and_grads: labels missing");
    require(!batch.x1.empty(), "loss_and_grads: empty batch");
    ModAddCache c = forward_mod_add(params, batch, combine);
    for (int l : batch.labels) require(l >= 0 && l < params.E.rows(), "loss_and_grads: label out of range");
    out.data_loss = softmax_xent(c.logits, batch.labels);
    mod_add_backward(params, batch, combine, c, out.grads);
  } else {
    require(loss == LossKind::square, "loss_and_grads: teacher-student uses square loss");
    require(params.A.size() > 0, "loss_and_grads: parameters are empty");
    const MatrixXd& X = batch.inputs;
    require(X.cols() > 0, "loss_and_grads: empty batch");
    MatrixXd targets = batch.targets;
    if (targets.size() == 0) {
      require(teacher != nullptr, "loss_and_grads: targets or a teacher are required");
      targets = teacher->outputs(X);
    }
    require(targets.rows() == params.B.rows() && targets.cols() == X.cols(),
            "loss_and_grads: target shape mismatch");
    const double n = static_cast<double>(X.cols());
    StudentCache c = forward_student(params, X);
    MatrixXd dout = (c.out - targets) / n;
    out.data_loss = 0.5 * (c.out - targets).squaredNorm() / n;
    kernels::matmul_nt(dout, c.H, out.grads.B);
    MatrixXd Bt = params.B.transpose();
    MatrixXd dpre;
    kernels::matmul(Bt, dout, dpre);
    for (long i = 0; i < dpre.size(); ++i)
      if (!(c.pre.data()[i] > 0.0)) dpre.data()[i] = 0.0;
    kernels::matmul_nt(dpre, X, out.grads.A);

    if (teacher != nullptr && sobolev_beta > 0.0) {
      // (1/N) sum |B D_i A - J*(x_i)|_F^2, D_i = diag(relu'(A x_i)).
      MatrixXd gA = MatrixXd::Zero(params.A.rows(), params.A.cols());
      MatrixXd gB = MatrixXd::Zero(params.B.rows(), params.B.cols());
      double pen = 0.0;
      for (long i = 0; i < X.cols(); ++i) {
        MatrixXd Am = params.A;
        for (long k = 0; k < Am.rows(); ++k)
          if (!(c.pre(k, i) > 0.0)) Am.row(k).setZero();
        const MatrixXd D = params.B * Am - teacher->jacobian(X.col(i));
        pen += D.squaredNorm();
        gB.noalias() += D * Am.transpose();
        MatrixXd BtD = params.B.transpose() * D;
        for (long k = 0; k < BtD.rows(); ++k)
          if (!(c.pre(k, i) > 0.0)) BtD.row(k).setZero();
        gA += BtD;
      }
      out.sobolev = pen / n;
      out.grads.A += (2.0 * sobolev_beta / n) * gA;
      out.grads.B += (2.0 * sobolev_beta / n) * gB;
    }
  }

  out.data_grads = out.grads;
  out.reg_value = add_reg(params, reg, out.grads);
  out.loss = out.data_loss + reg.strength() * out.reg_value + sobolev_beta * out.sobolev;
  return out;
}

AdamState AdamState::for_params(const MlpParams& params) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double alpha,
               const AdamHyper& hyper) {
  std::vector<std::pair<const double*, long>> g;
  grads.for_each([&](const char*, const double* d, long n, bool) { g.emplace_back(d, n); });
  std::vector<double*> m, v;
  state.m.for_each([&](const char*, double* d, long, bool) { m.push_back(d); });
  state.v.for_each([&](const char*, double* d, long, bool) { v.push_back(d); });
  std::size_t k = 0;
  bool shapes_ok = true;
  params.for_each([&](const char*, double*, long n, bool) { shapes_ok = shapes_ok && g[k++].second == n; });
  require(shapes_ok && g.size() == m.size(), "adam_step: gradient shapes do not match parameters");

  state.step += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  k = 0;
  params.for_each([&](const char*, double* w, long n, bool) {
    const double* gk = g[k].first;
    double* mk = m[k];
    double* vk = v[k];
    for (long i = 0; i < n; ++i) {
      mk[i] = hyper.beta1 * mk[i] + (1.0 - hyper.beta1) * gk[i];
      vk[i] = hyper.beta2 * vk[i] + (1.0 - hyper.beta2) * gk[i] * gk[i];
      const double mhat = mk[i] / c1;
      const double vhat = vk[i] / c2;
      w[i] -= alpha * mhat / (std::sqrt(vhat) + hyper.eps);
    }
    ++k;
  });
}

MlpParams init_params(Task task, const NeuralArch& arch, std::uint64_t seed) {
  Rng rng(seed, Stream::init);
  MlpParams w;
  auto draw = [&](auto& t, long rows, long cols) {
    t.resize(rows, cols);
    fill_normal(rng, t.data(), t.size(), 1.0 / std::sqrt(static_cast<double>(rows)));
  };
  if (task == Task::mod_add) {
    require(arch.p >= 2 && arch.d1 >= 1 && arch.d2 >= 1, "init_params: invalid mod-add dimensions");
    draw(w.E, arch.p, arch.d1);
    draw(w.W1, arch.d2, arch.d1);
    w.b1.resize(arch.d2);
    fill_normal(rng, w.b1.data(), arch.d2, 1.0 / std::sqrt(static_cast<double>(arch.d2)));
    draw(w.W2, arch.p, arch.d2);
    w.b2.resize(arch.p);
    fill_normal(rng, w.b2.data(), arch.p, 1.0 / std::sqrt(static_cast<double>(arch.p)));
  } else {
    require(arch.d >= 1 && arch.r >= 1 && arch.c >= 1, "init_params: invalid teacher-student dimensions");
    draw(w.A, arch.r, arch.d);
    draw(w.B, arch.c, arch.r);
  }
  return w;
}

namespace {

double flat_norm(const MlpParams& p) {
  double s = 0.0;
  p.for_each([&](const char*, const double* d, long n, bool) {
    for (long i = 0; i < n; ++i) s += d[i] * d[i];
  });
  return std::sqrt(s);
}

double accuracy(const MatrixXd& logits, const std::vector<int>& labels) {
  long hits = 0;
  for (long j = 0; j < logits.cols(); ++j) {
    Eigen::Index arg = 0;
    logits.col(j).maxCoeff(&arg);
    hits += arg == labels[j];
  }
  return static_cast<double>(hits) / static_cast<double>(logits.cols());
}

double mean_xent(MatrixXd logits, const std::vector<int>& labels) {
  return softmax_xent(logits, labels);
}

}  // namespace

Trace train_neural(Task task, const Regularizer& reg, const RunConfig& cfg, const NeuralArch& arch,
                   double sobolev_beta) {
  require(cfg.alpha > 0.0, "train_neural: alpha must be > 0");
  require(cfg.max_steps >= 0, "train_neural: max_steps must be >= 0");
  require(task == Task::teacher_student || sobolev_beta == 0.0,
          "train_neural: the Sobolev penalty applies to teacher-student only");

  const bool mod_add = task == Task::mod_add;
  MlpParams params = init_params(task, arch, cfg.seed);
  AdamState adam = AdamState::for_params(params);

  Batch train, test;
  Teacher teacher;
  if (mod_add) {
    ModAddDataset data = gen_mod_add(arch.p, arch.r_train, cfg.seed);
    train = mod_add_batch(data, data.train_idx);
    test = mod_add_batch(data, data.val_idx);
  } else {
    require(arch.n_train >= 1 && arch.n_test >= 1, "train_neural: sample counts must be >= 1");
    teacher = make_teacher(arch.d, arch.r, arch.c, cfg.seed);
    Rng rng(cfg.seed, Stream::teacher);
    // Skip the teacher weights so inputs come from a fresh part of the stream.
    for (long i = 0; i < teacher.A.size() + teacher.B.size(); ++i) rng.normal();
    train.inputs.resize(arch.d, arch.n_train);
    test.inputs.resize(arch.d, arch.n_test);
    fill_normal(rng, train.inputs.data(), train.inputs.size(), 1.0);
    fill_normal(rng, test.inputs.data(), test.inputs.size(), 1.0);
    train.targets = teacher.outputs(train.inputs);
    test.targets = teacher.outputs(test.inputs);
  }
  const LossKind kind = mod_add ? LossKind::cross_entropy : LossKind::square;
  const Teacher* tp = mod_add ? nullptr : &teacher;

  Trace trace;
  trace.extra_names = mod_add ? std::vector<std::string>{"train_loss", "test_loss", "train_acc", "test_acc"}
                              : std::vector<std::string>{"train_loss", "test_loss", "sobolev"};
  const long every = cfg.resolved_eval_every();
  long streak = 0;

  for (long step = 0;; ++step) {
    LossAndGrads lg = loss_and_grads(params, train, kind, reg, sobolev_beta, tp, arch.combine);
    if (!std::isfinite(lg.loss) || !params.all_finite()) {
      trace.diverged = true;
      break;
    }
    if (step % every == 0 || step == cfg.max_steps) {
      TraceRecord rec;
      rec.step = step;
      const MatrixXd test_out = mlp_forward(params, test, arch.combine);
      if (mod_add) {
        const MatrixXd train_out = mlp_forward(params, train, arch.combine);
        const double train_acc = accuracy(train_out, train.labels);
        const double test_acc = accuracy(test_out, test.labels);
        rec.train_err = 1.0 - train_acc;
        rec.rec_err = 1.0 - test_acc;
        rec.extras = {lg.data_loss, mean_xent(test_out, test.labels), train_acc, test_acc};
      } else {
        const MatrixXd train_out = mlp_forward(params, train);
        rec.train_err = (train_out - train.targets).norm() / train.targets.norm();
        rec.rec_err = (test_out - test.targets).norm() / test.targets.norm();
        const double test_loss = 0.5 * (test_out - test.targets).squaredNorm() / static_cast<double>(test.size());
        rec.extras = {lg.data_loss, test_loss, lg.sobolev};
      }
      rec.norm_l1 = regularizer_value(params, RegKind::l1);
      rec.norm_l2 = flat_norm(params);
      rec.norm_nuc = regularizer_value(params, RegKind::nuclear);
      rec.grad_g_norm = flat_norm(lg.data_grads);
      MlpParams reg_part = lg.grads;
      {
        std::vector<const double*> dg;
        lg.data_grads.for_each([&](const char*, const double* d, long, bool) { dg.push_back(d); });
        std::size_t k = 0;
        reg_part.for_each([&](const char*, double* d, long n, bool) {
          for (long i = 0; i < n; ++i) d[i] -= dg[k][i];
          ++k;
        });
      }
      rec.reg_grad_norm = flat_norm(reg_part);
      trace.steps_run = step;
      const double rec_err = rec.rec_err;
      trace.records.push_back(std::move(rec));
      if (cfg.early_exit) {
        streak = rec_err <= cfg.rec_tol / 10.0 ? streak + 1 : 0;
        if (streak >= 100 && step < cfg.max_steps) {
          trace.early_exit = true;
          break;
        }
      }
    }
    if (step == cfg.max_steps) break;
    adam_step(params, lg.grads, adam, cfg.alpha);
  }
  return trace;
}

}  // namespace grok::nn
