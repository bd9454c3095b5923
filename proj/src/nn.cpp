#include "earda/nn.hpp"

#include <cmath>
#include <thread>

#include "earda/errors.hpp"
#include "earda/rng.hpp"

namespace earda::nn {

namespace {

void fill_uniform(Eigen::Block<Matrix> block, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < block.cols(); ++c) block(r, c) = rng.uniform(-bound, bound);
}

double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

LstmCell init_cell(int input_dim, int hidden, Rng& rng) {
  LstmCell cell;
  cell.w_input = Matrix::Zero(4 * hidden, input_dim);
  cell.w_hidden = Matrix::Zero(4 * hidden, hidden);
  cell.bias = Vector::Zero(4 * hidden);
  for (int g = 0; g < 4; ++g) {
    fill_uniform(cell.w_input.middleRows(g * hidden, hidden), glorot_bound(input_dim, hidden), rng);
    fill_uniform(cell.w_hidden.middleRows(g * hidden, hidden), glorot_bound(hidden, hidden), rng);
  }
  cell.bias.segment(static_cast<int>(Gate::Forget) * hidden, hidden).setOnes();
  return cell;
}

HeadParams init_head(int input_dim, int width, int outputs, Rng& rng) {
  HeadParams h;
  const int last_in = width > 0 ? width : input_dim;
  if (width > 0) {
    h.w_hidden = Matrix::Zero(width, input_dim);
    h.b_hidden = Vector::Zero(width);
    fill_uniform(h.w_hidden.middleRows(0, width), glorot_bound(input_dim, width), rng);
  } else {
    h.w_hidden.resize(0, 0);
    h.b_hidden.resize(0);
  }
  h.w_out = Matrix::Zero(outputs, last_in);
  h.b_out = Vector::Zero(outputs);
  fill_uniform(h.w_out.middleRows(0, outputs), glorot_bound(last_in, outputs), rng);
  return h;
}

void run_direction(const LstmCell& cell, const Matrix& x, bool reverse, DirectionTrace& tr) {
  const Eigen::Index h = cell.hidden();
  const Eigen::Index steps = x.cols();
  tr.gates.noalias() = cell.w_input * x;
  tr.gates.colwise() += cell.bias;
  tr.cell.resize(h, steps);
  tr.cell_tanh.resize(h, steps);
  tr.hidden.resize(h, steps);

  Vector hid = Vector::Zero(h);
  Vector c = Vector::Zero(h);
  Vector z(4 * h);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    z = tr.gates.col(t);
    z.noalias() += cell.w_hidden * hid;
    auto gates = tr.gates.col(t);
    // Input and forget gates are adjacent; both use the logistic function.
    gates.segment(0, 2 * h).array() = (1.0 + (-z.segment(0, 2 * h).array()).exp()).inverse();
    gates.segment(2 * h, h).array() = z.segment(2 * h, h).array().tanh();
    gates.segment(3 * h, h).array() = (1.0 + (-z.segment(3 * h, h).array()).exp()).inverse();
    c.array() = gates.segment(h, h).array() * c.array() +
                gates.segment(0, h).array() * gates.segment(2 * h, h).array();
    tr.cell.col(t) = c;
    tr.cell_tanh.col(t).array() = c.array().tanh();
    hid.array() = gates.segment(3 * h, h).array() * tr.cell_tanh.col(t).array();
    tr.hidden.col(t) = hid;
  }
}

// d_hidden holds dLoss/dh_t from outside the recurrence (upper layer or the
// pooled feature). Accumulates cell gradients and, when d_x is given, adds
// dLoss/dx into it.
void backprop_direction(const LstmCell& cell, const Matrix& x, bool reverse,
                        const DirectionTrace& tr, const Matrix& d_hidden, LstmCell& grad,
                        Matrix* d_x) {
  const Eigen::Index h = cell.hidden();
  const Eigen::Index steps = x.cols();
  Matrix dz(4 * h, steps);
  Matrix h_prev = Matrix::Zero(h, steps);
  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  Vector dh(h), dc(h);
  for (Eigen::Index s = steps - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;
    const auto gates = tr.gates.col(t);
    const auto i = gates.segment(0, h).array();
    const auto f = gates.segment(h, h).array();
    const auto g = gates.segment(2 * h, h).array();
    const auto o = gates.segment(3 * h, h).array();
    const auto tc = tr.cell_tanh.col(t).array();

    dh = d_hidden.col(t) + dh_next;
    dc = (dh.array() * o * (1.0 - tc.square()) + dc_next.array()).matrix();
    auto dzt = dz.col(t);
    if (s > 0) {
      dzt.segment(h, h) = (dc.array() * tr.cell.col(tp).array() * f * (1.0 - f)).matrix();
      h_prev.col(t) = tr.hidden.col(tp);
    } else {
      dzt.segment(h, h).setZero();
    }
    dzt.segment(0, h) = (dc.array() * g * i * (1.0 - i)).matrix();
    dzt.segment(2 * h, h) = (dc.array() * i * (1.0 - g.square())).matrix();
    dzt.segment(3 * h, h) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = cell.w_hidden.transpose() * dzt;
  }
  grad.w_input.noalias() += dz * x.transpose();
  grad.w_hidden.noalias() += dz * h_prev.transpose();
  grad.bias += dz.rowwise().sum();
  if (d_x) d_x->noalias() += cell.w_input.transpose() * dz;
}

void add_into(ModelParams& acc, const ModelParams& g) {
  for_each_tensor([](const std::string&, auto& a, const auto& b) { a += b; }, acc, g);
}

struct SampleWork {
  FeatureTrace feature;
  HeadTrace label;
  HeadTrace domain;
};

struct SampleLoss {
  double label = 0.0;
  double domain = 0.0;
  bool has_gradient = false;
};

SampleLoss sample_backprop(const Sample& s, const ModelParams& p, const BackpropOptions& opt,
                           std::size_t labeled, std::size_t count, ModelParams& grad,
                           SampleWork& work) {
  SampleLoss out;
  const Vector feature = feature_forward(s.window.get(), p.feature, &work.feature);
  Vector d_feature = Vector::Zero(feature.size());
  if (s.use_label_loss) {
    const auto ce = softmax_ce(head_forward(feature, p.label, &work.label), s.label);
    out.label = ce.loss;
    const Vector d_logits = ce.grad / static_cast<double>(labeled);
    d_feature += head_backward(d_logits, p.label, work.label, grad.label);
  }
  if (opt.domain_pathway) {
    const auto ce = softmax_ce(head_forward(grl_forward(feature), p.domain, &work.domain), s.domain);
    out.domain = ce.loss;
    const Vector d_logits = ce.grad / static_cast<double>(count);
    const Vector d_reversed = head_backward(d_logits, p.domain, work.domain, grad.domain);
    d_feature += grl_backward(d_reversed, opt.lambda);
  }
  if ((d_feature.array() != 0.0).any()) {
    feature_backward(d_feature, p.feature, work.feature, grad.feature);
  }
  out.has_gradient = true;
  return out;
}

void zero(ModelParams& p) {
  for_each_tensor([](const std::string&, auto& t) { t.setZero(); }, p);
}

}  // namespace

void Architecture::validate() const {
  if (input_dim < 1 || hidden < 1 || layers < 1 || head_width < 0 || label_classes < 2 ||
      domain_classes < 2)
    throw ArgumentError("invalid network architecture");
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  ModelParams p;
  for (int l = 0; l < arch.layers; ++l) {
    const int in = l == 0 ? arch.input_dim : 2 * arch.hidden;
    std::array<LstmCell, 2> dirs;
    for (int d = 0; d < 2; ++d) dirs[static_cast<std::size_t>(d)] = init_cell(in, arch.hidden, rng);
    p.feature.layers.push_back(std::move(dirs));
  }
  p.label = init_head(arch.feature_dim(), arch.head_width, arch.label_classes, rng);
  p.domain = init_head(arch.feature_dim(), arch.head_width, arch.domain_classes, rng);
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  zero(z);
  return z;
}

Architecture architecture_of(const ModelParams& p) {
  Architecture a;
  a.input_dim = p.feature.input_dim();
  a.hidden = p.feature.hidden();
  a.layers = static_cast<int>(p.feature.layers.size());
  a.head_width = p.label.has_hidden_layer() ? static_cast<int>(p.label.w_hidden.rows()) : 0;
  a.label_classes = p.label.output_dim();
  a.domain_classes = p.domain.output_dim();
  return a;
}

std::size_t parameter_count(const ModelParams& p) {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); },
                  p);
  return n;
}

Vector feature_forward(const Matrix& window, const RecurrentParams& params, FeatureTrace* trace) {
  if (params.layers.empty()) throw ShapeError("recurrent network has no layers");
  if (window.cols() != params.input_dim() || window.rows() < 1)
    throw ShapeError("window must be T x " + std::to_string(params.input_dim()) + ", got " +
                     std::to_string(window.rows()) + "x" + std::to_string(window.cols()));
  FeatureTrace local;
  FeatureTrace& tr = trace ? *trace : local;
  const std::size_t n_layers = params.layers.size();
  tr.inputs.resize(n_layers);
  tr.dirs.resize(n_layers);
  const Eigen::Index h = params.hidden();
  const Eigen::Index steps = window.rows();

  tr.inputs[0] = window.transpose();
  for (std::size_t l = 0; l < n_layers; ++l) {
    run_direction(params.layers[l][kForward], tr.inputs[l], false, tr.dirs[l][kForward]);
    run_direction(params.layers[l][kBackward], tr.inputs[l], true, tr.dirs[l][kBackward]);
    if (l + 1 < n_layers) {
      auto& next = tr.inputs[l + 1];
      next.resize(2 * h, steps);
      next.topRows(h) = tr.dirs[l][kForward].hidden;
      next.bottomRows(h) = tr.dirs[l][kBackward].hidden;
    }
  }
  const auto& top = tr.dirs.back();
  Vector feature(2 * h);
  feature.head(h) = top[kForward].hidden.col(steps - 1);
  feature.tail(h) = top[kBackward].hidden.col(0);
  return feature;
}

void feature_backward(const Vector& d_feature, const RecurrentParams& params,
                      const FeatureTrace& trace, RecurrentParams& grads) {
  const Eigen::Index h = params.hidden();
  const Eigen::Index steps = trace.inputs.front().cols();
  if (d_feature.size() != 2 * h) throw ShapeError("feature gradient has the wrong length");
  Matrix d_fwd = Matrix::Zero(h, steps);
  Matrix d_bwd = Matrix::Zero(h, steps);
  d_fwd.col(steps - 1) = d_feature.head(h);
  d_bwd.col(0) = d_feature.tail(h);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const Matrix& x = trace.inputs[l];
    Matrix d_x;
    Matrix* d_input = nullptr;
    if (l > 0) {
      d_x = Matrix::Zero(x.rows(), steps);
      d_input = &d_x;
    }
    backprop_direction(params.layers[l][kForward], x, false, trace.dirs[l][kForward], d_fwd,
                       grads.layers[l][kForward], d_input);
    backprop_direction(params.layers[l][kBackward], x, true, trace.dirs[l][kBackward], d_bwd,
                       grads.layers[l][kBackward], d_input);
    if (l > 0) {
      d_fwd = d_x.topRows(h);
      d_bwd = d_x.bottomRows(h);
    }
  }
}

Vector head_forward(const Vector& feature, const HeadParams& params, HeadTrace* trace) {
  if (feature.size() != params.input_dim())
    throw ShapeError("head expects " + std::to_string(params.input_dim()) + " inputs, got " +
                     std::to_string(feature.size()));
  if (!params.has_hidden_layer()) {
    if (trace) trace->input = feature;
    return params.w_out * feature + params.b_out;
  }
  Vector pre = params.w_hidden * feature + params.b_hidden;
  Vector act = pre.cwiseMax(0.0);
  Vector logits = params.w_out * act + params.b_out;
  if (trace) {
    trace->input = feature;
    trace->pre_activation = std::move(pre);
    trace->activation = std::move(act);
  }
  return logits;
}

Vector head_backward(const Vector& d_logits, const HeadParams& params, const HeadTrace& trace,
                     HeadParams& grads) {
  grads.b_out += d_logits;
  if (!params.has_hidden_layer()) {
    grads.w_out.noalias() += d_logits * trace.input.transpose();
    return params.w_out.transpose() * d_logits;
  }
  grads.w_out.noalias() += d_logits * trace.activation.transpose();
  Vector d_pre = params.w_out.transpose() * d_logits;
  d_pre = (trace.pre_activation.array() > 0.0).select(d_pre, 0.0);
  grads.b_hidden += d_pre;
  grads.w_hidden.noalias() += d_pre * trace.input.transpose();
  return params.w_hidden.transpose() * d_pre;
}

Vector softmax(const Vector& logits) {
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

CrossEntropy softmax_ce(const Vector& logits, int truth) {
  if (truth < 0 || truth >= logits.size())
    throw IndexError("class index " + std::to_string(truth) + " outside [0, " +
                     std::to_string(logits.size()) + ")");
  const double m = logits.maxCoeff();
  const Vector shifted = logits.array() - m;
  const double log_sum = std::log(shifted.array().exp().sum());
  CrossEntropy ce;
  ce.loss = log_sum - shifted(truth);
  ce.grad = (shifted.array() - log_sum).exp().matrix();
  ce.grad(truth) -= 1.0;
  return ce;
}

BatchGradients backprop_batch(std::span<const Sample> batch, const ModelParams& params,
                              const BackpropOptions& options) {
  if (batch.empty()) throw ArgumentError("backprop_batch needs a non-empty batch");
  std::size_t labeled = 0;
  for (const auto& s : batch) labeled += s.use_label_loss ? 1 : 0;
  const std::size_t count = batch.size();

  BatchGradients out;
  out.grads = zeros_like(params);
  std::vector<SampleLoss> losses(count);

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, count));
  if (threads == 1) {
    ModelParams scratch = zeros_like(params);
    SampleWork work;
    for (std::size_t i = 0; i < count; ++i) {
      losses[i] = sample_backprop(batch[i], params, options, labeled, count, scratch, work);
      add_into(out.grads, scratch);
      zero(scratch);
    }
  } else {
    std::vector<ModelParams> per_sample(count, zeros_like(params));
    {
      std::vector<std::jthread> pool;
      for (unsigned k = 0; k < threads; ++k) {
        pool.emplace_back([&, k] {
          SampleWork work;
          for (std::size_t i = k; i < count; i += threads)
            losses[i] = sample_backprop(batch[i], params, options, labeled, count, per_sample[i], work);
        });
      }
    }
    for (std::size_t i = 0; i < count; ++i) add_into(out.grads, per_sample[i]);
  }

  double label_sum = 0.0;
  double domain_sum = 0.0;
  for (const auto& l : losses) {
    label_sum += l.label;
    domain_sum += l.domain;
  }
  out.loss.labeled = labeled;
  out.loss.count = count;
  out.loss.label = labeled ? label_sum / static_cast<double>(labeled) : 0.0;
  out.loss.domain = options.domain_pathway ? domain_sum / static_cast<double>(count) : 0.0;
  out.loss.total = options.domain_pathway ? out.loss.label - options.lambda * out.loss.domain
                                          : out.loss.label;
  return out;
}

LossComponents batch_loss(std::span<const Sample> batch, const ModelParams& params, double lambda,
                          bool domain_pathway) {
  if (batch.empty()) throw ArgumentError("batch_loss needs a non-empty batch");
  LossComponents loss;
  double label_sum = 0.0;
  double domain_sum = 0.0;
  for (const auto& s : batch) {
    const Vector feature = feature_forward(s.window.get(), params.feature);
    if (s.use_label_loss) {
      label_sum += softmax_ce(head_forward(feature, params.label), s.label).loss;
      ++loss.labeled;
    }
    if (domain_pathway) domain_sum += softmax_ce(head_forward(feature, params.domain), s.domain).loss;
  }
  loss.count = batch.size();
  loss.label = loss.labeled ? label_sum / static_cast<double>(loss.labeled) : 0.0;
  loss.domain = domain_pathway ? domain_sum / static_cast<double>(loss.count) : 0.0;
  loss.total = domain_pathway ? loss.label - lambda * loss.domain : loss.label;
  return loss;
}

}  // namespace earda::nn
