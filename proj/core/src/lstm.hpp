#pragma once

// Batched bidirectional LSTM forward/backward passes. Sequences are laid out
// as feature-major matrices whose column t·B + b holds time step t of batch
// item b.

#include <Eigen/Core>

#include "ionet/neural_odometry.hpp"

namespace ionet::detail {

using Matrix = Eigen::MatrixXd;

/// Activations of one direction kept for the backward pass.
struct DirectionCache {
  Matrix gates;   // 4H × nB, activated (i, f, g, o)
  Matrix cell;    // H × nB
  Matrix cell_tanh;
  Matrix hidden;  // H × nB
};

struct LayerCache {
  Matrix input;   // I × nB
  DirectionCache forward;
  DirectionCache backward;
  Matrix mask;    // 2H × nB dropout scale (empty when dropout is off)
  Matrix output;  // 2H × nB after dropout
};

struct ForwardCache {
  int steps = 0;
  int batch = 0;
  std::vector<LayerCache> layers;
  Matrix features;  // 2H × B head input
  Matrix output;    // 2 × B raw head output
};

/// Builds the normalized I × nB input matrix for a batch of windows.
Matrix pack_inputs(const Normalization& norm, std::span<const Window> windows, int steps);

/// Runs the network. `cache` keeps everything the backward pass needs.
void forward(const ModelParams& params, Matrix input, int steps, int batch,
             const Dropout& dropout, ForwardCache& cache);

/// Accumulates parameter gradients given dLoss/dOutput (2 × B).
void backward(const ModelParams& params, const ForwardCache& cache, const Matrix& d_output,
              ModelParams& grads);

}  // namespace ionet::detail
