#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"
#include "ionet/window_model.hpp"

namespace ionet {

inline constexpr int kImuChannels = 6;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Architecture of the stacked bidirectional LSTM regressor.
struct ModelShape {
  int input = kImuChannels;
  int hidden = 96;
  int layers = 2;
  int window = static_cast<int>(kDefaultWindow);

  bool operator==(const ModelShape&) const = default;
};

/// Weights of one LSTM direction. Gate blocks are stacked in the order
/// input, forget, cell, output: w_input is 4H×I, w_recurrent 4H×H, bias 4H.
struct LstmCellParams {
  RowMatrix w_input;
  RowMatrix w_recurrent;
  Eigen::VectorXd bias;
};

struct LstmLayerParams {
  LstmCellParams forward;
  LstmCellParams backward;
};

/// Named view of one parameter tensor (row-major data).
struct TensorView {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::span<double> data;
};

struct ConstTensorView {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::span<const double> data;
};

/// All trainable weights: per layer and direction the LSTM gates, then a
/// linear head mapping the two final hidden states (2H) to (Δl, Δψ).
struct ModelParams {
  ModelShape shape;
  std::vector<LstmLayerParams> layers;
  RowMatrix head_weight;        // 2 × 2H
  Eigen::VectorXd head_bias;    // 2

  static ModelParams zeros(const ModelShape& shape);

  /// Uniform in ±1/√fan_in per matrix, forget-gate bias +1.
  static ModelParams initialize(const ModelShape& shape, std::uint64_t seed);

  /// Tensors in canonical order (layer, direction, w_input, w_recurrent,
  /// bias; then head weight and bias).
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;

  std::size_t parameter_count() const;

  /// Throws kModelContract if any tensor disagrees with `shape` or is not finite.
  void check() const;
};

/// Per-channel affine input normalization, x̃ = (x − mean) / scale.
struct Normalization {
  std::array<double, kImuChannels> mean{0, 0, 0, 0, 0, 0};
  std::array<double, kImuChannels> scale{1, 1, 1, 1, 1, 1};
};

Normalization fit_normalization(std::span<const Window> windows);

/// A trained regressor together with its input statistics.
struct Model {
  ModelParams params;
  Normalization norm;
  int epochs_trained = 0;
  std::string profile = "walk";
};

/// Inverted dropout on each LSTM layer's per-step output. Off when rate is 0.
struct Dropout {
  double rate = 0.0;
  std::uint64_t seed = 0;

  static Dropout off() { return {}; }
  bool enabled() const { return rate > 0.0; }
};

/// Polar delta predicted for one window. Δψ is wrapped and Δl is clamped at
/// zero. Throws kModelContract if the window length differs from the model.
PolarDelta model_forward(const Model& model, const Window& window,
                         const Dropout& dropout = Dropout::off());

/// Batched variant; one prediction per window, in order.
std::vector<PolarDelta> model_forward(const Model& model, std::span<const Window> windows,
                                      const Dropout& dropout = Dropout::off());

/// (Δl̃ − Δl)² + κ·wrap(Δψ̃ − Δψ)².
double loss(const PolarDelta& pred, const PolarDelta& target, double kappa);

struct TrainingConfig {
  ModelShape shape;
  double learning_rate = 0.0015;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double kappa = 1.0;
  double dropout_rate = 0.25;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t rng_seed = 0;

  /// Called after every epoch with (epoch, train loss, validation loss).
  std::function<void(int, double, double)> on_epoch;

  /// Throws kInvalidInput for out-of-range hyperparameters.
  void validate() const;
};

/// Windows paired with labels. The windows view the streams held in
/// `streams`, so copies of a dataset stay valid.
struct LabeledDataset {
  std::vector<std::shared_ptr<const std::vector<ImuSample>>> streams;
  std::vector<Window> windows;
  std::vector<PolarDelta> labels;

  std::size_t size() const { return windows.size(); }

  /// Segments `samples` with window n and `stride` and labels the windows
  /// from `truth` (truth.size() == samples.size() + 1).
  void add_track(std::vector<ImuSample> samples, std::span<const TruthPose> truth, std::size_t n,
                 std::size_t stride);
};

struct GradientResult {
  ModelParams grads;
  double loss = 0.0;  // mean batch loss at the evaluated parameters
};

/// Exact BPTT gradient of the mean batch loss. Dropout masks are drawn from
/// `dropout.seed`. Throws kNumericOverflow, naming the parameter, if any
/// gradient is not finite.
GradientResult gradients(const Model& model, std::span<const Window> windows,
                         std::span<const PolarDelta> targets, double kappa,
                         const Dropout& dropout = Dropout::off());

/// Mean loss over a set of windows with dropout off.
double evaluate_loss(const Model& model, std::span<const Window> windows,
                     std::span<const PolarDelta> targets, double kappa,
                     std::size_t batch_size = 64);

struct AdamMoments {
  ModelParams first;
  ModelParams second;

  static AdamMoments zeros(const ModelShape& shape);
};

/// Bias-corrected Adam step (step >= 1).
void adam_update(ModelParams& params, const ModelParams& grads, AdamMoments& moments,
                 const TrainingConfig& config, int step);

struct EpochLoss {
  int epoch = 0;
  double train = 0.0;
  double validation = 0.0;
};

struct TrainingResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochLoss> history;
  int best_epoch = 0;
};

/// Adam training with shuffled mini-batches. Epoch 0 of the history records
/// the losses at initialization. Deterministic given config.rng_seed. When
/// `resume` is given training continues from it (Adam moments restart) and
/// its normalization is kept; otherwise normalization is fitted on `train`.
/// Throws TrainingDiverged on a non-finite loss.
TrainingResult train(const LabeledDataset& train_set, const LabeledDataset& validation_set,
                     const TrainingConfig& config, const Model* resume = nullptr);

/// Segments a stream, predicts one polar delta per window and chains them.
/// Non-overlapping mode emits one pose per n samples, stamped with the last
/// sample of each window. Dense mode emits one pose every `dense_stride`
/// samples: deltas are scaled by stride/n, each attributed to the centre of
/// its window, with the first and last windows extended over the uncovered
/// half-window at either end.
std::vector<TrackPoint> predict_track(const Model& model, std::span<const ImuSample> stream,
                                      const Pose2D& start, ChainMode mode,
                                      std::size_t dense_stride = kDefaultStride);

inline constexpr int kWeightFormatVersion = 1;

/// Self-describing JSON weight document with normalization statistics.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
std::string serialize_model(const Model& model);
Model deserialize_model(std::string_view text);

}  // namespace ionet
