// latkit/tdnn.h
// Factorized TDNN acoustic model: sub-sampled temporal splicing, ReLU and
// dropout, linear bottleneck factorization with a semi-orthogonal constraint,
// concatenating skip connections; exact backward and SGD update.

// Copyright 2026  The latkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LATKIT_TDNN_H_
#define LATKIT_TDNN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "latkit/types.h"

namespace latkit {
namespace am {

struct LayerConfig {
  std::vector<int> offsets;  // sorted splice offsets relative to this layer's time
  int hidden = 64;
  int bottleneck = 16;
  int skip_from = -1;  // 0-based earlier layer whose output is concatenated, -1 = none
};

struct ModelConfig {
  int input_dim = 140;  // 40 acoustic + 100 appended speaker vector
  std::vector<LayerConfig> layers;
  int output_dim = 2;
  double dropout = 0.0;
  int subsample = 3;  // output frame rate divisor

  void validate() const;
  // Spliced input width of layer l (previous width x offsets + skip width).
  int layer_input_dim(std::size_t l) const;
};

// `linear` is the semi-orthogonally constrained factor (bottleneck x spliced
// input); `affine` maps the bottleneck up to the hidden dim.
struct LayerTensors {
  Matrix affine;
  Matrix linear;
  Vector bias;
};

struct Tensors {
  std::vector<LayerTensors> layers;
  Matrix out_weight;
  Vector out_bias;
};
using Gradients = Tensors;

struct AcousticModel {
  ModelConfig config;
  Tensors params;
};

enum class Mode { kTrain, kEval };

struct FrameOutputs {
  // scores(pdf, j): unnormalized log-score of pdf at output frame j.
  Matrix scores;
  int first_input_frame = 0;  // input time of output frame 0
  int subsample = 1;          // output frame j <-> input time first + j * subsample
  int num_frames() const { return static_cast<int>(scores.cols()); }
};

// Deterministic init: scaled-uniform entries (scale 1/sqrt(fan-in)), biases
// zero, every linear factor projected onto the semi-orthogonal manifold
// until ||MM^T - I||_F <= 1e-3.
AcousticModel init_model(const ModelConfig& config, std::uint64_t seed);

// Required context; forward needs at least min_input_frames() columns.
int left_context(const ModelConfig& config);
int right_context(const ModelConfig& config);
int min_input_frames(const ModelConfig& config);
int num_output_frames(const ModelConfig& config, int num_input_frames);

// features: input_dim x T, columns are frames.  Train mode applies inverted
// dropout with masks drawn deterministically from `seed`; eval ignores it.
FrameOutputs forward(const AcousticModel& model, const Matrix& features, Mode mode,
                     std::uint64_t seed);

// Exact gradients of sum(scores .* grad_at_outputs) for every parameter;
// (mode, seed) must match the forward pass being differentiated.
Gradients backward(const AcousticModel& model, const Matrix& features,
                   const Matrix& grad_at_outputs, Mode mode, std::uint64_t seed);

// One step of the iterative constraint: m - nu (m m^T - I) m.  The step size
// nu = 1/2 is the full gradient step of the source method (quadratically
// convergent Newton-Schulz orthogonalization); requires rows <= cols.
Matrix semi_orthogonal_step(const Matrix& m);
double semi_orthogonal_error(const Matrix& m);  // ||m m^T - I||_F

// params <- params - lr * grads; optionally applies one semi-orthogonal step
// to every linear factor.  Non-finite gradients raise DivergenceError.
AcousticModel sgd_step(const AcousticModel& model, const Gradients& grads, double lr,
                       bool apply_constraint);

std::int64_t num_params(const AcousticModel& model);
Gradients zero_gradients(const ModelConfig& config);

// Binary container: plain-text key=value header, then row-major 64-bit-float
// tensors in declaration order (per layer affine, linear, bias; then the
// output affine).
std::string write_model(const AcousticModel& model);
void write_model_file(const AcousticModel& model, const std::string& path);
AcousticModel read_model(const std::string& bytes);
AcousticModel read_model_file(const std::string& path);

}  // namespace am
}  // namespace latkit

#endif  // LATKIT_TDNN_H_
