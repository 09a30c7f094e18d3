#include "ionet/neural_odometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ionet/error.hpp"
#include "ionet/rng.hpp"
#include "ionet/so3.hpp"
#include "lstm.hpp"

namespace ionet {

namespace {

constexpr int kOutputs = 2;

int layer_input(const ModelShape& shape, int layer) {
  return layer == 0 ? shape.input : 2 * shape.hidden;
}

void check_shape(const ModelShape& s) {
  if (s.input != kImuChannels || s.hidden < 1 || s.layers < 1 || s.window < 2) {
    throw Error(ErrorKind::kModelContract, "invalid model shape");
  }
}

LstmCellParams zero_cell(int input, int hidden) {
  return {RowMatrix::Zero(4 * hidden, input), RowMatrix::Zero(4 * hidden, hidden),
          Eigen::VectorXd::Zero(4 * hidden)};
}

void fill_uniform(std::span<double> data, double bound, Rng& rng) {
  for (double& x : data) x = rng.uniform(-bound, bound);
}

std::span<double> span_of(RowMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

// --- ModelParams --------------------------------------------------------------

ModelParams ModelParams::zeros(const ModelShape& shape) {
  check_shape(shape);
  ModelParams p;
  p.shape = shape;
  for (int l = 0; l < shape.layers; ++l) {
    const int in = layer_input(shape, l);
    p.layers.push_back({zero_cell(in, shape.hidden), zero_cell(in, shape.hidden)});
  }
  p.head_weight = RowMatrix::Zero(kOutputs, 2 * shape.hidden);
  p.head_bias = Eigen::VectorXd::Zero(kOutputs);
  return p;
}

ModelParams ModelParams::initialize(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p = zeros(shape);
  Rng rng(seed);
  const int h = shape.hidden;
  for (LstmLayerParams& layer : p.layers) {
    for (LstmCellParams* cell : {&layer.forward, &layer.backward}) {
      fill_uniform(span_of(cell->w_input), 1.0 / std::sqrt(static_cast<double>(cell->w_input.cols())), rng);
      fill_uniform(span_of(cell->w_recurrent), 1.0 / std::sqrt(static_cast<double>(h)), rng);
      cell->bias.setZero();
      cell->bias.segment(h, h).setConstant(1.0);
    }
  }
  fill_uniform(span_of(p.head_weight), 1.0 / std::sqrt(static_cast<double>(2 * h)), rng);
  p.head_bias.setZero();
  return p;
}

std::vector<TensorView> ModelParams::tensors() {
  std::vector<TensorView> out;
  auto add = [&out](std::string name, auto& m) {
    out.push_back({std::move(name), static_cast<int>(m.rows()), static_cast<int>(m.cols()), span_of(m)});
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l + 1) + ".";
    for (auto [dir, cell] : {std::pair<const char*, LstmCellParams*>{"forward", &layers[l].forward},
                             std::pair<const char*, LstmCellParams*>{"backward", &layers[l].backward}}) {
      add(prefix + dir + ".w_input", cell->w_input);
      add(prefix + dir + ".w_recurrent", cell->w_recurrent);
      add(prefix + dir + ".bias", cell->bias);
    }
  }
  add("head.weight", head_weight);
  add("head.bias", head_bias);
  return out;
}

std::vector<ConstTensorView> ModelParams::tensors() const {
  std::vector<ConstTensorView> out;
  for (const TensorView& t : const_cast<ModelParams*>(this)->tensors()) {
    out.push_back({t.name, t.rows, t.cols, {t.data.data(), t.data.size()}});
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const ConstTensorView& t : tensors()) n += t.data.size();
  return n;
}

void ModelParams::check() const {
  check_shape(shape);
  if (static_cast<int>(layers.size()) != shape.layers) {
    throw Error(ErrorKind::kModelContract, "layer count does not match model shape");
  }
  const ModelParams reference = zeros(shape);
  const auto expected = reference.tensors();
  const auto actual = tensors();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (actual[i].rows != expected[i].rows || actual[i].cols != expected[i].cols) {
      std::ostringstream msg;
      msg << "tensor " << actual[i].name << " has shape " << actual[i].rows << "x" << actual[i].cols
          << ", expected " << expected[i].rows << "x" << expected[i].cols;
      throw Error(ErrorKind::kModelContract, msg.str());
    }
    for (double x : actual[i].data) {
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::kModelContract, "tensor " + actual[i].name + " has non-finite values");
      }
    }
  }
}

// --- Normalization ------------------------------------------------------------

Normalization fit_normalization(std::span<const Window> windows) {
  Normalization norm;
  std::array<double, kImuChannels> sum{};
  std::array<double, kImuChannels> sum_sq{};
  double count = 0.0;
  for (const Window& w : windows) {
    for (const ImuSample& s : w.samples) {
      for (int c = 0; c < 3; ++c) {
        sum[c] += s.a[c];
        sum_sq[c] += s.a[c] * s.a[c];
        sum[c + 3] += s.w[c];
        sum_sq[c + 3] += s.w[c] * s.w[c];
      }
      count += 1.0;
    }
  }
  if (count == 0.0) return norm;
  for (int c = 0; c < kImuChannels; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(sum_sq[c] / count - mean * mean, 0.0);
    norm.mean[c] = mean;
    norm.scale[c] = std::sqrt(var) > 1e-6 ? std::sqrt(var) : 1.0;
  }
  return norm;
}

// --- Inference ----------------------------------------------------------------

std::vector<PolarDelta> model_forward(const Model& model, std::span<const Window> windows,
                                      const Dropout& dropout) {
  model.params.check();
  std::vector<PolarDelta> out;
  if (windows.empty()) return out;
  const int steps = model.params.shape.window;
  const int batch = static_cast<int>(windows.size());
  detail::ForwardCache cache;
  detail::forward(model.params, detail::pack_inputs(model.norm, windows, steps), steps, batch,
                  dropout, cache);
  out.reserve(windows.size());
  for (int b = 0; b < batch; ++b) {
    out.push_back({std::max(0.0, cache.output(0, b)), so3::wrap_angle(cache.output(1, b))});
  }
  return out;
}

PolarDelta model_forward(const Model& model, const Window& window, const Dropout& dropout) {
  return model_forward(model, std::span<const Window>(&window, 1), dropout).front();
}

double loss(const PolarDelta& pred, const PolarDelta& target, double kappa) {
  const double dl = pred.dl - target.dl;
  const double dpsi = so3::wrap_angle(pred.dpsi - target.dpsi);
  return dl * dl + kappa * dpsi * dpsi;
}

// --- Training -----------------------------------------------------------------

void TrainingConfig::validate() const {
  check_shape(shape);
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kInvalidInput, "learning_rate must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "dropout_rate must lie in [0, 1)");
  }
  if (!(kappa >= 0.0)) throw Error(ErrorKind::kInvalidInput, "kappa must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "Adam hyperparameters out of range");
  }
  if (epochs < 0 || batch_size < 1) throw Error(ErrorKind::kInvalidInput, "epochs/batch_size out of range");
}

void LabeledDataset::add_track(std::vector<ImuSample> samples, std::span<const TruthPose> truth,
                               std::size_t n, std::size_t stride) {
  auto stream = std::make_shared<const std::vector<ImuSample>>(std::move(samples));
  std::vector<Window> ws = segment(*stream, n, stride);
  std::vector<PolarDelta> ls = label_windows(truth, ws);
  streams.push_back(std::move(stream));
  windows.insert(windows.end(), ws.begin(), ws.end());
  labels.insert(labels.end(), ls.begin(), ls.end());
}

GradientResult gradients(const Model& model, std::span<const Window> windows,
                         std::span<const PolarDelta> targets, double kappa,
                         const Dropout& dropout) {
  if (windows.empty()) throw Error(ErrorKind::kEmptyInput, "gradients: empty batch");
  if (windows.size() != targets.size()) {
    throw Error(ErrorKind::kInvalidInput, "gradients: windows and targets differ in length");
  }
  const ModelParams& params = model.params;
  const int steps = params.shape.window;
  const int batch = static_cast<int>(windows.size());

  detail::ForwardCache cache;
  detail::forward(params, detail::pack_inputs(model.norm, windows, steps), steps, batch, dropout, cache);

  detail::Matrix d_output(2, batch);
  double total = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (int b = 0; b < batch; ++b) {
    const double r_l = cache.output(0, b) - targets[static_cast<std::size_t>(b)].dl;
    const double r_psi = so3::wrap_angle(cache.output(1, b) - targets[static_cast<std::size_t>(b)].dpsi);
    total += r_l * r_l + kappa * r_psi * r_psi;
    d_output(0, b) = 2.0 * r_l * inv_batch;
    d_output(1, b) = 2.0 * kappa * r_psi * inv_batch;
  }

  GradientResult result{ModelParams::zeros(params.shape), total * inv_batch};
  detail::backward(params, cache, d_output, result.grads);
  for (const ConstTensorView& t : std::as_const(result.grads).tensors()) {
    for (double x : t.data) {
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::kNumericOverflow, "non-finite gradient in parameter " + t.name);
      }
    }
  }
  return result;
}

double evaluate_loss(const Model& model, std::span<const Window> windows,
                     std::span<const PolarDelta> targets, double kappa, std::size_t batch_size) {
  if (windows.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, windows.size() - start);
    // Raw head outputs, so the loss matches what training minimizes.
    detail::ForwardCache cache;
    const int steps = model.params.shape.window;
    detail::forward(model.params,
                    detail::pack_inputs(model.norm, windows.subspan(start, count), steps), steps,
                    static_cast<int>(count), Dropout::off(), cache);
    for (std::size_t b = 0; b < count; ++b) {
      const PolarDelta raw{cache.output(0, static_cast<Eigen::Index>(b)),
                           cache.output(1, static_cast<Eigen::Index>(b))};
      total += loss(raw, targets[start + b], kappa);
    }
  }
  return total / static_cast<double>(windows.size());
}

AdamMoments AdamMoments::zeros(const ModelShape& shape) {
  return {ModelParams::zeros(shape), ModelParams::zeros(shape)};
}

void adam_update(ModelParams& params, const ModelParams& grads, AdamMoments& moments,
                 const TrainingConfig& config, int step) {
  if (step < 1) throw Error(ErrorKind::kInvalidInput, "adam_update: step must be >= 1");
  const double correction1 = 1.0 - std::pow(config.beta1, step);
  const double correction2 = 1.0 - std::pow(config.beta2, step);
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = moments.first.tensors();
  auto v = moments.second.tensors();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw Error(ErrorKind::kModelContract, "adam_update: parameter structures differ");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t].data.size() != g[t].data.size()) {
      throw Error(ErrorKind::kModelContract, "adam_update: tensor size mismatch in " + p[t].name);
    }
    for (std::size_t i = 0; i < p[t].data.size(); ++i) {
      const double gi = g[t].data[i];
      double& mi = m[t].data[i];
      double& vi = v[t].data[i];
      mi = config.beta1 * mi + (1.0 - config.beta1) * gi;
      vi = config.beta2 * vi + (1.0 - config.beta2) * gi * gi;
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      p[t].data[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainingResult train(const LabeledDataset& train_set, const LabeledDataset& validation_set,
                     const TrainingConfig& config, const Model* resume) {
  config.validate();
  if (train_set.size() == 0) throw Error(ErrorKind::kEmptyInput, "train: empty training set");

  Model model;
  if (resume != nullptr) {
    model = *resume;
    if (!(model.params.shape == config.shape)) {
      throw Error(ErrorKind::kModelContract, "train: resumed model shape differs from config");
    }
  } else {
    model.params = ModelParams::initialize(config.shape, derive_seed(config.rng_seed, 0));
    model.norm = fit_normalization(train_set.windows);
  }

  const bool has_validation = validation_set.size() > 0;
  auto validation_loss = [&](const Model& m) {
    return has_validation ? evaluate_loss(m, validation_set.windows, validation_set.labels, config.kappa)
                          : evaluate_loss(m, train_set.windows, train_set.labels, config.kappa);
  };

  TrainingResult result;
  const int first_epoch = model.epochs_trained;
  const double initial_train = evaluate_loss(model, train_set.windows, train_set.labels, config.kappa);
  const double initial_val = has_validation ? validation_loss(model) : initial_train;
  result.history.push_back({first_epoch, initial_train, initial_val});
  if (config.on_epoch) config.on_epoch(first_epoch, initial_train, initial_val);
  result.model = model;
  result.best_epoch = first_epoch;
  double best = initial_val;

  AdamMoments moments = AdamMoments::zeros(config.shape);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(config.rng_seed, 1));
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<Window> batch_windows;
  std::vector<PolarDelta> batch_labels;
  int step = 0;

  for (int e = 1; e <= config.epochs; ++e) {
    const int epoch = first_epoch + e;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      batch_windows.clear();
      batch_labels.clear();
      for (std::size_t k = 0; k < count; ++k) {
        batch_windows.push_back(train_set.windows[order[start + k]]);
        batch_labels.push_back(train_set.labels[order[start + k]]);
      }
      ++step;
      const Dropout dropout{config.dropout_rate,
                            derive_seed(config.rng_seed, 1000 + static_cast<std::uint64_t>(step))};
      GradientResult g;
      try {
        g = gradients(model, batch_windows, batch_labels, config.kappa, dropout);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kNumericOverflow) throw;
        throw TrainingDiverged(epoch, "training diverged in epoch " + std::to_string(epoch) + ": " + err.what());
      }
      if (!std::isfinite(g.loss)) {
        throw TrainingDiverged(epoch, "training loss became non-finite in epoch " + std::to_string(epoch));
      }
      epoch_loss += g.loss * static_cast<double>(count);
      adam_update(model.params, g.grads, moments, config, step);
    }
    model.epochs_trained = epoch;
    const double train_loss = epoch_loss / static_cast<double>(order.size());
    const double val_loss = has_validation ? validation_loss(model) : train_loss;
    if (!std::isfinite(val_loss)) {
      throw TrainingDiverged(epoch, "validation loss became non-finite in epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, train_loss, val_loss});
    if (config.on_epoch) config.on_epoch(epoch, train_loss, val_loss);
    if (val_loss < best) {
      best = val_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  // Record the full run length even when an earlier epoch was best.
  result.model.epochs_trained = model.epochs_trained;
  return result;
}

// --- Tracking -----------------------------------------------------------------

std::vector<TrackPoint> predict_track(const Model& model, std::span<const ImuSample> stream,
                                      const Pose2D& start, ChainMode mode, std::size_t dense_stride) {
  const std::size_t n = static_cast<std::size_t>(model.params.shape.window);
  const std::size_t stride = mode == ChainMode::kNonOverlapping ? n : dense_stride;
  if (stride == 0 || stride > n) throw Error(ErrorKind::kInvalidInput, "predict_track: bad stride");
  const std::vector<Window> windows = segment(stream, n, stride);
  const double dt = windows.front().dt;

  std::vector<PolarDelta> deltas;
  deltas.reserve(windows.size());
  constexpr std::size_t kBatch = 64;
  for (std::size_t i = 0; i < windows.size(); i += kBatch) {
    const auto part = std::span<const Window>(windows).subspan(i, std::min(kBatch, windows.size() - i));
    const auto pred = model_forward(model, part);
    deltas.insert(deltas.end(), pred.begin(), pred.end());
  }

  const double t0 = stream.front().t - dt;
  std::vector<TrackPoint> track;
  if (mode == ChainMode::kNonOverlapping) {
    const auto poses = chain(start, deltas);
    for (std::size_t k = 0; k < poses.size(); ++k) {
      track.push_back({stream[(k + 1) * n - 1].t, poses[k]});
    }
    return track;
  }

  // Dense: pad with copies of the first/last delta to cover the half-window
  // before the first window centre and after the last one.
  const std::size_t lead = (n / 2) / stride;
  const std::size_t trail = lead > 0 ? lead - 1 : 0;
  std::vector<PolarDelta> padded;
  padded.reserve(deltas.size() + lead + trail);
  padded.insert(padded.end(), lead, deltas.front());
  padded.insert(padded.end(), deltas.begin(), deltas.end());
  padded.insert(padded.end(), trail, deltas.back());
  const auto poses = chain_dense(start, padded, stride, n);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    track.push_back({t0 + static_cast<double>((k + 1) * stride) * dt, poses[k]});
  }
  return track;
}

}  // namespace ionet
