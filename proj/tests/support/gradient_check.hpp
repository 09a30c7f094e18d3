#pragma once

// Central-difference check of the BPTT gradients, shared by the unit and
// acceptance tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ionet/neural_odometry.hpp"
#include "ionet/rng.hpp"

namespace ionet::testing {

struct Batch {
  std::vector<std::vector<ImuSample>> streams;
  std::vector<Window> windows;
  std::vector<PolarDelta> targets;
};

/// Random IMU windows of length n around 1 g with random polar targets.
inline Batch random_batch(std::size_t count, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  b.streams.resize(count);
  for (auto& s : b.streams) {
    s.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k].t = 0.01 * static_cast<double>(k + 1);
      s[k].a = Vec3(2 * rng.normal(), 2 * rng.normal(), 9.8 + 2 * rng.normal());
      s[k].w = Vec3(rng.normal(), rng.normal(), rng.normal());
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    b.windows.push_back(Window{b.streams[i], 0.01, 0});
    b.targets.push_back({rng.uniform(0.5, 2.5), rng.uniform(-0.8, 0.8)});
  }
  return b;
}

inline Model random_model(const ModelShape& shape, std::uint64_t seed, const Batch& batch) {
  Model m;
  m.params = ModelParams::initialize(shape, seed);
  m.norm = fit_normalization(batch.windows);
  return m;
}

struct GradCheck {
  double max_rel = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

/// Relative error |a − b| / max(|a|, |b|, 1e-6) of every checked entry,
/// h = 1e-5·max(1, |p|). `stride` > 1 samples every stride-th entry of each
/// tensor.
inline GradCheck check_gradients(Model model, const Batch& batch, const Dropout& dropout,
                                 std::size_t stride) {
  const GradientResult analytic = gradients(model, batch.windows, batch.targets, 1.0, dropout);
  auto params = model.params.tensors();
  const auto grads = analytic.grads.tensors();
  GradCheck out;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const std::size_t size = params[t].data.size();
    for (std::size_t i = (t * 7) % std::min(stride, size); i < size; i += stride) {
      double& p = params[t].data[i];
      const double saved = p;
      const double h = 1e-5 * std::max(1.0, std::abs(saved));
      p = saved + h;
      const double up = gradients(model, batch.windows, batch.targets, 1.0, dropout).loss;
      p = saved - h;
      const double down = gradients(model, batch.windows, batch.targets, 1.0, dropout).loss;
      p = saved;
      const double numeric = (up - down) / (2 * h);
      const double exact = grads[t].data[i];
      const double rel =
          std::abs(numeric - exact) / std::max({std::abs(numeric), std::abs(exact), 1e-6});
      if (rel > out.max_rel) {
        out.max_rel = rel;
        out.worst = params[t].name + "[" + std::to_string(i) + "] bptt=" + std::to_string(exact) +
                    " fd=" + std::to_string(numeric);
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace ionet::testing
