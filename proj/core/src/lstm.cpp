#include "lstm.hpp"

#include "ionet/error.hpp"
#include "ionet/rng.hpp"

namespace ionet::detail {

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

void run_direction(const LstmCellParams& p, const Matrix& input, int steps, int batch,
                   bool reverse, DirectionCache& cache) {
  const int h = static_cast<int>(p.w_recurrent.cols());
  const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
  cache.gates.resize(4 * h, cols);
  cache.cell.resize(h, cols);
  cache.cell_tanh.resize(h, cols);
  cache.hidden.resize(h, cols);

  // Input contributions for all steps at once.
  Matrix pre = p.w_input * input;
  pre.colwise() += p.bias;

  Matrix h_prev = Matrix::Zero(h, batch);
  Matrix c_prev = Matrix::Zero(h, batch);
  Matrix z(4 * h, batch);
  for (int s = 0; s < steps; ++s) {
    const int t = reverse ? steps - 1 - s : s;
    const Eigen::Index col = static_cast<Eigen::Index>(t) * batch;
    z.noalias() = pre.middleCols(col, batch);
    z.noalias() += p.w_recurrent * h_prev;

    auto gates = cache.gates.middleCols(col, batch);
    gates.topRows(2 * h) = sigmoid(z.topRows(2 * h).array()).matrix();
    gates.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
    gates.bottomRows(h) = sigmoid(z.bottomRows(h).array()).matrix();

    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();

    auto c = cache.cell.middleCols(col, batch);
    c = (f * c_prev.array() + i * g).matrix();
    auto ct = cache.cell_tanh.middleCols(col, batch);
    ct = c.array().tanh().matrix();
    auto hid = cache.hidden.middleCols(col, batch);
    hid = (o * ct.array()).matrix();

    h_prev = hid;
    c_prev = c;
  }
}

/// Returns dLoss/dInput for this direction and accumulates weight gradients.
Matrix backprop_direction(const LstmCellParams& p, const DirectionCache& cache,
                          const Matrix& input, const Matrix& d_hidden, int steps, int batch,
                          bool reverse, LstmCellParams& g) {
  const int h = static_cast<int>(p.w_recurrent.cols());
  const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
  Matrix d_pre(4 * h, cols);
  Matrix dh_next = Matrix::Zero(h, batch);
  Matrix dc_next = Matrix::Zero(h, batch);
  Matrix dc(h, batch);

  for (int s = steps - 1; s >= 0; --s) {
    const int t = reverse ? steps - 1 - s : s;
    const int t_prev = reverse ? t + 1 : t - 1;  // previous in processing order
    const bool has_prev = s > 0;
    const Eigen::Index col = static_cast<Eigen::Index>(t) * batch;
    const Eigen::Index col_prev = static_cast<Eigen::Index>(t_prev) * batch;

    const auto gates = cache.gates.middleCols(col, batch);
    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto gg = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();
    const auto ct = cache.cell_tanh.middleCols(col, batch).array();

    const Eigen::ArrayXXd dh = d_hidden.middleCols(col, batch).array() + dh_next.array();
    dc = (dc_next.array() + dh * o * (1.0 - ct.square())).matrix();

    auto dz = d_pre.middleCols(col, batch);
    dz.topRows(h) = (dc.array() * gg * i * (1.0 - i)).matrix();
    if (has_prev) {
      dz.middleRows(h, h) =
          (dc.array() * cache.cell.middleCols(col_prev, batch).array() * f * (1.0 - f)).matrix();
    } else {
      dz.middleRows(h, h).setZero();
    }
    dz.middleRows(2 * h, h) = (dc.array() * i * (1.0 - gg.square())).matrix();
    dz.bottomRows(h) = (dh * ct * o * (1.0 - o)).matrix();

    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = p.w_recurrent.transpose() * dz;
    if (has_prev) {
      g.w_recurrent.noalias() += dz * cache.hidden.middleCols(col_prev, batch).transpose();
    }
  }
  g.w_input.noalias() += d_pre * input.transpose();
  g.bias += d_pre.rowwise().sum();
  return p.w_input.transpose() * d_pre;
}

}  // namespace

Matrix pack_inputs(const Normalization& norm, std::span<const Window> windows, int steps) {
  const int batch = static_cast<int>(windows.size());
  Matrix x(kImuChannels, static_cast<Eigen::Index>(steps) * batch);
  for (int b = 0; b < batch; ++b) {
    const Window& w = windows[static_cast<std::size_t>(b)];
    if (static_cast<int>(w.size()) != steps) {
      throw Error(ErrorKind::kModelContract, "window length " + std::to_string(w.size()) +
                                                 " does not match model window " + std::to_string(steps));
    }
    for (int t = 0; t < steps; ++t) {
      const ImuSample& s = w.samples[static_cast<std::size_t>(t)];
      const Eigen::Index col = static_cast<Eigen::Index>(t) * batch + b;
      for (int c = 0; c < 3; ++c) {
        x(c, col) = (s.a[c] - norm.mean[c]) / norm.scale[c];
        x(c + 3, col) = (s.w[c] - norm.mean[c + 3]) / norm.scale[c + 3];
      }
    }
  }
  return x;
}

void forward(const ModelParams& params, Matrix input, int steps, int batch,
             const Dropout& dropout, ForwardCache& cache) {
  const int h = params.shape.hidden;
  cache.steps = steps;
  cache.batch = batch;
  cache.layers.resize(params.layers.size());
  Rng rng(dropout.seed);
  const double keep = 1.0 - dropout.rate;

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerCache& lc = cache.layers[l];
    lc.input = std::move(input);
    run_direction(params.layers[l].forward, lc.input, steps, batch, false, lc.forward);
    run_direction(params.layers[l].backward, lc.input, steps, batch, true, lc.backward);
    lc.output.resize(2 * h, lc.input.cols());
    lc.output.topRows(h) = lc.forward.hidden;
    lc.output.bottomRows(h) = lc.backward.hidden;
    if (dropout.enabled()) {
      lc.mask.resize(lc.output.rows(), lc.output.cols());
      for (Eigen::Index c = 0; c < lc.mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < lc.mask.rows(); ++r) {
          lc.mask(r, c) = rng.uniform() < dropout.rate ? 0.0 : 1.0 / keep;
        }
      }
      lc.output.array() *= lc.mask.array();
    } else {
      lc.mask.resize(0, 0);
    }
    input = lc.output;
  }

  // Head input: forward direction's last step and backward direction's
  // last processed step (t = 0) of the top layer.
  const LayerCache& top = cache.layers.back();
  const Eigen::Index last = static_cast<Eigen::Index>(steps - 1) * batch;
  cache.features.resize(2 * h, batch);
  cache.features.topRows(h) = top.output.block(0, last, h, batch);
  cache.features.bottomRows(h) = top.output.block(h, 0, h, batch);
  cache.output = params.head_weight * cache.features;
  cache.output.colwise() += params.head_bias;
}

void backward(const ModelParams& params, const ForwardCache& cache, const Matrix& d_output,
              ModelParams& grads) {
  const int h = params.shape.hidden;
  const int steps = cache.steps;
  const int batch = cache.batch;

  grads.head_weight.noalias() += d_output * cache.features.transpose();
  grads.head_bias += d_output.rowwise().sum();
  const Matrix d_features = params.head_weight.transpose() * d_output;

  const Eigen::Index last = static_cast<Eigen::Index>(steps - 1) * batch;
  Matrix d_out = Matrix::Zero(2 * h, static_cast<Eigen::Index>(steps) * batch);
  d_out.block(0, last, h, batch) = d_features.topRows(h);
  d_out.block(h, 0, h, batch) = d_features.bottomRows(h);

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerCache& lc = cache.layers[l];
    if (lc.mask.size() > 0) d_out.array() *= lc.mask.array();
    const Matrix fwd_hidden = d_out.topRows(h);
    const Matrix bwd_hidden = d_out.bottomRows(h);
    Matrix d_input = backprop_direction(params.layers[l].forward, lc.forward, lc.input, fwd_hidden,
                                        steps, batch, false, grads.layers[l].forward);
    if (l == 0) {
      backprop_direction(params.layers[l].backward, lc.backward, lc.input, bwd_hidden, steps,
                         batch, true, grads.layers[l].backward);
      break;
    }
    d_input += backprop_direction(params.layers[l].backward, lc.backward, lc.input, bwd_hidden,
                                  steps, batch, true, grads.layers[l].backward);
    d_out = std::move(d_input);
  }
}

}  // namespace ionet::detail
