// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "molbridge/nn/encoder.hpp"
#include "molbridge/nn/tape.hpp"

// AdamW with decoupled weight decay. Moments are kept per named tensor and
// sized lazily on the first step. A zero learning rate leaves every
// parameter bit-identical, moments still accumulate.

namespace molbridge::nn {

struct AdamWConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  const AdamWConfig& config() const { return cfg_; }
  std::int64_t steps() const { return step_; }

  void step(ParamStore& params, const std::map<std::string, Mat>& grads) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    for (auto& [name, theta] : params) {
      auto git = grads.find(name);
      if (git == grads.end()) continue;
      const Mat& g = git->second;
      if (g.rows != theta.rows || g.cols != theta.cols)
        throw GradError("adamw: gradient shape mismatch for " + name);
      Mat& m = slot(m_, name, theta);
      Mat& v = slot(v_, name, theta);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g.data[i];
        v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g.data[i] * g.data[i];
        if (cfg_.lr == 0.0) continue;
        double mhat = m.data[i] / bc1;
        double vhat = v.data[i] / bc2;
        theta.data[i] -=
            cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * theta.data[i]);
      }
    }
  }

private:
  static Mat& slot(std::map<std::string, Mat>& store, const std::string& name,
                   const Mat& like) {
    auto it = store.find(name);
    if (it == store.end()) it = store.emplace(name, Mat(like.rows, like.cols)).first;
    return it->second;
  }

  AdamWConfig cfg_;
  std::map<std::string, Mat> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace molbridge::nn
