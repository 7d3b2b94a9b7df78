// latkit/tdnn.cc

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

#include "latkit/tdnn.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <sstream>

#include "latkit/common.h"

namespace latkit {
namespace am {

namespace {

constexpr double kOrthoNu = 0.5;
constexpr double kInitOrthoTol = 1e-3;

void fill_scaled_uniform(Matrix& m, int fan_in, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  // Row-major fill order keeps init reproducible independent of storage.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng) * scale;
}

struct LayerWindow {
  int lo = 0;  // first valid output time (absolute input frame index)
  int hi = 0;  // one past the last valid output time
};

// Valid time windows per layer given T input frames.
std::vector<LayerWindow> layer_windows(const ModelConfig& cfg, int num_frames) {
  std::vector<LayerWindow> win;
  int lo = 0, hi = num_frames;
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& off = cfg.layers[l].offsets;
    int nlo = std::max(0, lo - off.front());
    int nhi = std::min(num_frames, hi - off.back());
    if (cfg.layers[l].skip_from >= 0) {
      const auto& s = win[static_cast<std::size_t>(cfg.layers[l].skip_from)];
      nlo = std::max(nlo, s.lo);
      nhi = std::min(nhi, s.hi);
    }
    win.push_back(LayerWindow{nlo, nhi});
    lo = nlo;
    hi = nhi;
  }
  return win;
}

struct Trace {
  // All time-indexed matrices span the full input timeline; only columns in
  // the layer's window hold data.
  std::vector<Matrix> spliced;  // layer input (spliced dim x T), offset by window lo
  std::vector<Matrix> bottled;  // linear * spliced
  std::vector<Matrix> pre;      // affine * bottled + bias
  std::vector<Matrix> act;      // post ReLU + dropout, hidden x T (full width)
  std::vector<Matrix> mask;     // dropout masks (0 or 1/(1-p)); empty in eval
  std::vector<LayerWindow> win;
  std::vector<int> sample_times;
};

FrameOutputs run_forward(const AcousticModel& model, const Matrix& features, Mode mode,
                         std::uint64_t seed, Trace* trace) {
  const ModelConfig& cfg = model.config;
  cfg.validate();
  if (features.rows() != cfg.input_dim)
    throw ContractError("forward: features have " + std::to_string(features.rows()) +
                        " rows, model wants " + std::to_string(cfg.input_dim));
  const int T = static_cast<int>(features.cols());
  if (T < min_input_frames(cfg))
    throw ContractError("forward: " + std::to_string(T) + " frames is too short; model "
                        "context requires at least " + std::to_string(min_input_frames(cfg)));
  auto win = layer_windows(cfg, T);

  const bool use_dropout = mode == Mode::kTrain && cfg.dropout > 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  if (trace) {
    trace->win = win;
    trace->spliced.resize(cfg.layers.size());
    trace->bottled.resize(cfg.layers.size());
    trace->pre.resize(cfg.layers.size());
    trace->act.resize(cfg.layers.size());
    trace->mask.resize(cfg.layers.size());
  }

  std::vector<Matrix> acts;  // per layer, hidden x T full width
  const Matrix* prev = &features;
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& lc = cfg.layers[l];
    const int lo = win[l].lo, hi = win[l].hi;
    const int n = hi - lo;
    const int d_prev = static_cast<int>(prev->rows());
    const int n_off = static_cast<int>(lc.offsets.size());
    const int skip_dim = lc.skip_from >= 0
        ? static_cast<int>(acts[static_cast<std::size_t>(lc.skip_from)].rows())
        : 0;

    Matrix spliced(n_off * d_prev + skip_dim, n);
    for (int k = 0; k < n_off; ++k)
      spliced.middleRows(k * d_prev, d_prev) = prev->middleCols(lo + lc.offsets[static_cast<std::size_t>(k)], n);
    if (skip_dim > 0)
      spliced.bottomRows(skip_dim) =
          acts[static_cast<std::size_t>(lc.skip_from)].middleCols(lo, n);

    const auto& p = model.params.layers[l];
    Matrix bottled = p.linear * spliced;
    Matrix pre = (p.affine * bottled).colwise() + p.bias;
    Matrix act_win = pre.cwiseMax(0.0);
    Matrix mask;
    if (use_dropout) {
      mask.resize(act_win.rows(), act_win.cols());
      const double keep = 1.0 - cfg.dropout;
      for (Eigen::Index c = 0; c < mask.cols(); ++c)
        for (Eigen::Index r = 0; r < mask.rows(); ++r)
          mask(r, c) = u01(rng) < keep ? 1.0 / keep : 0.0;
      act_win.array() *= mask.array();
    }
    Matrix full = Matrix::Zero(act_win.rows(), T);
    full.middleCols(lo, n) = act_win;
    if (trace) {
      trace->spliced[l] = std::move(spliced);
      trace->bottled[l] = std::move(bottled);
      trace->pre[l] = std::move(pre);
      trace->mask[l] = std::move(mask);
      trace->act[l] = full;
    }
    acts.push_back(std::move(full));
    prev = &acts.back();
  }

  const auto& last = win.back();
  FrameOutputs out;
  out.first_input_frame = last.lo;
  out.subsample = cfg.subsample;
  const int t_out = (last.hi - last.lo + cfg.subsample - 1) / cfg.subsample;
  out.scores.resize(cfg.output_dim, t_out);
  std::vector<int> samples;
  for (int j = 0; j < t_out; ++j) samples.push_back(last.lo + j * cfg.subsample);
  Matrix gathered(acts.back().rows(), t_out);
  for (int j = 0; j < t_out; ++j) gathered.col(j) = acts.back().col(samples[static_cast<std::size_t>(j)]);
  out.scores = (model.params.out_weight * gathered).colwise() + model.params.out_bias;
  if (trace) trace->sample_times = std::move(samples);
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (layers.empty()) throw ConfigError("model config: at least one layer required");
  if (input_dim < 1) throw ConfigError("model config: input_dim must be positive");
  if (output_dim < 2) throw ConfigError("model config: output_dim must be >= 2");
  if (subsample < 1) throw ConfigError("model config: subsample must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model config: dropout in [0, 1)");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& lc = layers[l];
    if (lc.offsets.empty()) throw ConfigError("model config: layer needs splice offsets");
    if (!std::is_sorted(lc.offsets.begin(), lc.offsets.end()))
      throw ConfigError("model config: splice offsets must be sorted");
    if (l == 0 && std::find(lc.offsets.begin(), lc.offsets.end(), 0) == lc.offsets.end())
      throw ConfigError("model config: layer 1 offsets must include 0");
    if (lc.hidden < 1 || lc.bottleneck < 1)
      throw ConfigError("model config: layer dims must be positive");
    if (lc.skip_from >= static_cast<int>(l))
      throw ConfigError("model config: skip connections must come from earlier layers");
    int in_dim = layer_input_dim(l);
    if (lc.bottleneck > in_dim)
      throw ConfigError("model config: bottleneck exceeds spliced input dim");
  }
}

int ModelConfig::layer_input_dim(std::size_t l) const {
  int d_prev = l == 0 ? input_dim : layers[l - 1].hidden;
  int dim = static_cast<int>(layers[l].offsets.size()) * d_prev;
  if (layers[l].skip_from >= 0)
    dim += layers[static_cast<std::size_t>(layers[l].skip_from)].hidden;
  return dim;
}

AcousticModel init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  AcousticModel model;
  model.config = config;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    const auto& lc = config.layers[l];
    LayerTensors t;
    t.affine.resize(lc.hidden, lc.bottleneck);
    fill_scaled_uniform(t.affine, lc.bottleneck, rng);
    t.linear.resize(lc.bottleneck, config.layer_input_dim(l));
    fill_scaled_uniform(t.linear, config.layer_input_dim(l), rng);
    for (int iter = 0; iter < 200 && semi_orthogonal_error(t.linear) > kInitOrthoTol; ++iter)
      t.linear = semi_orthogonal_step(t.linear);
    if (semi_orthogonal_error(t.linear) > kInitOrthoTol)
      throw DivergenceError("init_model: semi-orthogonal projection did not converge");
    t.bias = Vector::Zero(lc.hidden);
    model.params.layers.push_back(std::move(t));
  }
  const int last_hidden = config.layers.back().hidden;
  model.params.out_weight.resize(config.output_dim, last_hidden);
  fill_scaled_uniform(model.params.out_weight, last_hidden, rng);
  model.params.out_bias = Vector::Zero(config.output_dim);
  return model;
}

int left_context(const ModelConfig& config) {
  auto win = layer_windows(config, 1 << 20);
  return win.back().lo;
}

int right_context(const ModelConfig& config) {
  const int big = 1 << 20;
  auto win = layer_windows(config, big);
  return big - win.back().hi;
}

int min_input_frames(const ModelConfig& config) {
  return left_context(config) + right_context(config) + 1;
}

int num_output_frames(const ModelConfig& config, int num_input_frames) {
  int usable = num_input_frames - left_context(config) - right_context(config);
  if (usable < 1) return 0;
  return (usable + config.subsample - 1) / config.subsample;
}

FrameOutputs forward(const AcousticModel& model, const Matrix& features, Mode mode,
                     std::uint64_t seed) {
  return run_forward(model, features, mode, seed, nullptr);
}

Gradients backward(const AcousticModel& model, const Matrix& features,
                   const Matrix& grad_at_outputs, Mode mode, std::uint64_t seed) {
  Trace trace;
  FrameOutputs out = run_forward(model, features, mode, seed, &trace);
  if (grad_at_outputs.rows() != out.scores.rows() ||
      grad_at_outputs.cols() != out.scores.cols())
    throw ContractError("backward: output gradient shape mismatch");

  const ModelConfig& cfg = model.config;
  const int T = static_cast<int>(features.cols());
  Gradients g = zero_gradients(cfg);

  const Matrix& h_last = trace.act.back();
  Matrix gathered(h_last.rows(), out.scores.cols());
  for (Eigen::Index j = 0; j < out.scores.cols(); ++j)
    gathered.col(j) = h_last.col(trace.sample_times[static_cast<std::size_t>(j)]);
  g.out_weight = grad_at_outputs * gathered.transpose();
  g.out_bias = grad_at_outputs.rowwise().sum();

  // d objective / d layer activation, full timeline per layer.
  std::vector<Matrix> d_act(cfg.layers.size());
  for (std::size_t l = 0; l < cfg.layers.size(); ++l)
    d_act[l] = Matrix::Zero(cfg.layers[l].hidden, T);
  Matrix back = model.params.out_weight.transpose() * grad_at_outputs;
  for (Eigen::Index j = 0; j < out.scores.cols(); ++j)
    d_act.back().col(trace.sample_times[static_cast<std::size_t>(j)]) += back.col(j);

  for (std::size_t li = cfg.layers.size(); li-- > 0;) {
    const auto& lc = cfg.layers[li];
    const auto& p = model.params.layers[li];
    const int lo = trace.win[li].lo, hi = trace.win[li].hi;
    const int n = hi - lo;
    Matrix d_out = d_act[li].middleCols(lo, n);
    if (trace.mask[li].size() > 0) d_out.array() *= trace.mask[li].array();
    Matrix d_pre =
        ((trace.pre[li].array() > 0.0).cast<double>() * d_out.array()).matrix();

    g.layers[li].affine = d_pre * trace.bottled[li].transpose();
    g.layers[li].bias = d_pre.rowwise().sum();
    Matrix d_bottled = p.affine.transpose() * d_pre;
    g.layers[li].linear = d_bottled * trace.spliced[li].transpose();
    Matrix d_spliced = p.linear.transpose() * d_bottled;

    const int d_prev = li == 0 ? cfg.input_dim : cfg.layers[li - 1].hidden;
    const int n_off = static_cast<int>(lc.offsets.size());
    if (li > 0) {
      for (int k = 0; k < n_off; ++k)
        d_act[li - 1].middleCols(lo + lc.offsets[static_cast<std::size_t>(k)], n) +=
            d_spliced.middleRows(k * d_prev, d_prev);
    }
    if (lc.skip_from >= 0)
      d_act[static_cast<std::size_t>(lc.skip_from)].middleCols(lo, n) +=
          d_spliced.bottomRows(cfg.layers[static_cast<std::size_t>(lc.skip_from)].hidden);
  }
  return g;
}

Matrix semi_orthogonal_step(const Matrix& m) {
  if (m.rows() > m.cols())
    throw ContractError("semi_orthogonal_step: rows must not exceed columns");
  Matrix p = m * m.transpose();
  p.diagonal().array() -= 1.0;
  return m - kOrthoNu * p * m;
}

double semi_orthogonal_error(const Matrix& m) {
  Matrix p = m * m.transpose();
  p.diagonal().array() -= 1.0;
  return p.norm();
}

namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw DivergenceError(std::string("sgd_step: non-finite gradient in ") + what);
}

}  // namespace

AcousticModel sgd_step(const AcousticModel& model, const Gradients& grads, double lr,
                       bool apply_constraint) {
  if (lr < 0.0) throw ConfigError("sgd_step: learning rate must be non-negative");
  AcousticModel next = model;
  for (std::size_t l = 0; l < next.params.layers.size(); ++l) {
    check_finite(grads.layers[l].affine, "affine");
    check_finite(grads.layers[l].linear, "linear");
    check_finite(grads.layers[l].bias, "bias");
    next.params.layers[l].affine -= lr * grads.layers[l].affine;
    next.params.layers[l].linear -= lr * grads.layers[l].linear;
    next.params.layers[l].bias -= lr * grads.layers[l].bias;
    if (apply_constraint)
      next.params.layers[l].linear = semi_orthogonal_step(next.params.layers[l].linear);
  }
  check_finite(grads.out_weight, "output weight");
  check_finite(grads.out_bias, "output bias");
  next.params.out_weight -= lr * grads.out_weight;
  next.params.out_bias -= lr * grads.out_bias;
  return next;
}

std::int64_t num_params(const AcousticModel& model) {
  std::int64_t n = 0;
  for (const auto& l : model.params.layers)
    n += l.affine.size() + l.linear.size() + l.bias.size();
  n += model.params.out_weight.size() + model.params.out_bias.size();
  return n;
}

Gradients zero_gradients(const ModelConfig& config) {
  Gradients g;
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    LayerTensors t;
    t.affine = Matrix::Zero(config.layers[l].hidden, config.layers[l].bottleneck);
    t.linear = Matrix::Zero(config.layers[l].bottleneck, config.layer_input_dim(l));
    t.bias = Vector::Zero(config.layers[l].hidden);
    g.layers.push_back(std::move(t));
  }
  g.out_weight = Matrix::Zero(config.output_dim, config.layers.back().hidden);
  g.out_bias = Vector::Zero(config.output_dim);
  return g;
}

namespace {

void append_tensor(std::string& out, const Matrix& m) {
  // Row-major on disk.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      char buf[sizeof(double)];
      std::memcpy(buf, &v, sizeof(double));
      out.append(buf, sizeof(double));
    }
}

void read_tensor(const std::string& bytes, std::size_t* pos, Matrix* m) {
  std::size_t need = static_cast<std::size_t>(m->size()) * sizeof(double);
  if (*pos + need > bytes.size()) throw ParseError("model file: truncated tensor data");
  for (Eigen::Index r = 0; r < m->rows(); ++r)
    for (Eigen::Index c = 0; c < m->cols(); ++c) {
      double v;
      std::memcpy(&v, bytes.data() + *pos, sizeof(double));
      *pos += sizeof(double);
      (*m)(r, c) = v;
    }
}

}  // namespace

std::string write_model(const AcousticModel& model) {
  const ModelConfig& cfg = model.config;
  std::ostringstream hdr;
  hdr << "latkit-am-1\n";
  hdr << "input_dim=" << cfg.input_dim << "\n";
  hdr << "output_dim=" << cfg.output_dim << "\n";
  hdr << "dropout=" << format_g9(cfg.dropout) << "\n";
  hdr << "subsample=" << cfg.subsample << "\n";
  hdr << "num_layers=" << cfg.layers.size() << "\n";
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& lc = cfg.layers[l];
    hdr << "layer" << l << ".offsets=";
    for (std::size_t i = 0; i < lc.offsets.size(); ++i)
      hdr << (i ? "," : "") << lc.offsets[i];
    hdr << "\n";
    hdr << "layer" << l << ".hidden=" << lc.hidden << "\n";
    hdr << "layer" << l << ".bottleneck=" << lc.bottleneck << "\n";
    hdr << "layer" << l << ".skip=" << lc.skip_from << "\n";
  }
  hdr << "end-header\n";
  std::string out = hdr.str();
  for (const auto& l : model.params.layers) {
    append_tensor(out, l.affine);
    append_tensor(out, l.linear);
    append_tensor(out, l.bias);
  }
  append_tensor(out, model.params.out_weight);
  append_tensor(out, model.params.out_bias);
  return out;
}

void write_model_file(const AcousticModel& model, const std::string& path) {
  write_file(path, write_model(model));
}

AcousticModel read_model(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw ParseError("model file: truncated header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != "latkit-am-1") throw ParseError("model file: bad magic");
  std::map<std::string, std::string> kv;
  for (;;) {
    std::string line = next_line();
    if (line == "end-header") break;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("model file: bad header line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError("model file: missing header key " + k);
    return it->second;
  };
  ModelConfig cfg;
  cfg.input_dim = std::stoi(get("input_dim"));
  cfg.output_dim = std::stoi(get("output_dim"));
  cfg.dropout = std::stod(get("dropout"));
  cfg.subsample = std::stoi(get("subsample"));
  std::size_t nl = std::stoul(get("num_layers"));
  for (std::size_t l = 0; l < nl; ++l) {
    LayerConfig lc;
    std::string key = "layer" + std::to_string(l);
    std::istringstream offs(get(key + ".offsets"));
    std::string tok;
    while (std::getline(offs, tok, ',')) lc.offsets.push_back(std::stoi(tok));
    lc.hidden = std::stoi(get(key + ".hidden"));
    lc.bottleneck = std::stoi(get(key + ".bottleneck"));
    lc.skip_from = std::stoi(get(key + ".skip"));
    cfg.layers.push_back(std::move(lc));
  }
  cfg.validate();

  AcousticModel model;
  model.config = cfg;
  for (std::size_t l = 0; l < nl; ++l) {
    LayerTensors t;
    t.affine.resize(cfg.layers[l].hidden, cfg.layers[l].bottleneck);
    t.linear.resize(cfg.layers[l].bottleneck, cfg.layer_input_dim(l));
    Matrix bias(cfg.layers[l].hidden, 1);
    read_tensor(bytes, &pos, &t.affine);
    read_tensor(bytes, &pos, &t.linear);
    read_tensor(bytes, &pos, &bias);
    t.bias = bias.col(0);
    model.params.layers.push_back(std::move(t));
  }
  model.params.out_weight.resize(cfg.output_dim, cfg.layers.back().hidden);
  read_tensor(bytes, &pos, &model.params.out_weight);
  Matrix ob(cfg.output_dim, 1);
  read_tensor(bytes, &pos, &ob);
  model.params.out_bias = ob.col(0);
  if (pos != bytes.size()) throw ParseError("model file: trailing bytes");
  return model;
}

AcousticModel read_model_file(const std::string& path) {
  return read_model(read_file(path));
}

}  // namespace am
}  // namespace latkit
