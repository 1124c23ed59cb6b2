#pragma once

#include "smoge/measure.hpp"

namespace smoge {

// Built-in ground-truth measures used by the experiment harnesses and the
// CLI fixtures. Both satisfy the pairwise-distinctness requirements and are
// gating-normalized (last component's gating pair is zero).

// Two mildly separated linear experts on [-1,1]^2.
inline MixingMeasure reference_linear_truth() {
  MixingMeasure g;
  g.family = ExpertFamily::linear;
  g.input_dim = 2;
  g.components = {
      {0.4, {1.0, -0.8}, {1.5, 1.0, 0.6}, 0.5},
      {0.0, {0.0, 0.0}, {-1.2, -0.8, 0.4}, 0.8},
  };
  return g;
}

// Two logistic-mean experts on [-1,1]^2.
inline MixingMeasure reference_sigmoid_truth() {
  MixingMeasure g;
  g.family = ExpertFamily::sigmoid;
  g.input_dim = 2;
  g.components = {
      {0.3, {0.8, -0.5}, {1.2, -0.7}, 0.6},
      {0.0, {0.0, 0.0}, {-0.9, 0.6}, 1.1},
  };
  return g;
}

}  // namespace smoge
