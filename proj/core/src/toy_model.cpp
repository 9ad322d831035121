// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/toy_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "specedit/containers.hpp"
#include "specedit/error.hpp"

namespace specedit {
namespace {

using nlohmann::json;

constexpr std::uint32_t kModelVersion = 1;
constexpr double kNormEps = 1e-5;

MatrixF gaussian(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, static_cast<float>(stddev));
  MatrixF m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// Column-wise layer norm without learned gain or bias.
Matrix layer_norm(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index t = 0; t < x.cols(); ++t) {
    const double mean = x.col(t).mean();
    const Vector centered = x.col(t).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(x.rows());
    out.col(t) = centered / std::sqrt(var + kNormEps);
  }
  return out;
}

double gelu(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

bool same(const MatrixF& a, const MatrixF& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

// Every tensor of the model in serialization order.
template <typename Weights, typename Fn>
void for_each_tensor(Weights& w, Fn&& fn) {
  fn(std::string("token_embedding"), w.token_embedding);
  fn(std::string("position_embedding"), w.position_embedding);
  for (std::size_t l = 0; l < w.blocks.size(); ++l) {
    auto& b = w.blocks[l];
    const std::string p = "blocks." + std::to_string(l) + ".";
    fn(p + "wq", b.wq);
    fn(p + "wk", b.wk);
    fn(p + "wv", b.wv);
    fn(p + "wo", b.wo);
    fn(p + "w_in", b.w_in);
    fn(p + "b_in", b.b_in);
    fn(p + "w_out", b.w_out);
    fn(p + "b_out", b.b_out);
  }
  fn(std::string("unembedding"), w.unembedding);
}

ToyModelWeights shaped_weights(const ToyModelConfig& c) {
  const Index d = c.width;
  ToyModelWeights w;
  w.token_embedding.resize(d, c.vocab);
  w.position_embedding.resize(d, c.context);
  w.blocks.resize(static_cast<std::size_t>(c.layers));
  for (auto& b : w.blocks) {
    b.wq.resize(d, d);
    b.wk.resize(d, d);
    b.wv.resize(d, d);
    b.wo.resize(d, d);
    b.w_in.resize(4 * d, d);
    b.b_in.resize(4 * d, 1);
    b.w_out.resize(d, 4 * d);
    b.b_out.resize(d, 1);
  }
  w.unembedding.resize(c.vocab, d);
  return w;
}

ToyModelWeights random_weights(const ToyModelConfig& c) {
  std::mt19937_64 rng(c.seed);
  const Index d = c.width;
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  ToyModelWeights w;
  w.token_embedding = gaussian(d, c.vocab, 1.0, rng);
  w.position_embedding = gaussian(d, c.context, 0.5, rng);
  for (int l = 0; l < c.layers; ++l) {
    ToyBlockWeights b;
    b.wq = gaussian(d, d, s, rng);
    b.wk = gaussian(d, d, s, rng);
    b.wv = gaussian(d, d, s, rng);
    b.wo = gaussian(d, d, s, rng);
    b.w_in = gaussian(4 * d, d, s, rng);
    b.b_in = gaussian(4 * d, 1, 0.1, rng);
    b.w_out = gaussian(d, 4 * d, 0.5 * s, rng);
    b.b_out = gaussian(d, 1, 0.1, rng);
    w.blocks.push_back(std::move(b));
  }
  w.unembedding = gaussian(c.vocab, d, s, rng);
  return w;
}

json config_to_json(const ToyModelConfig& c) {
  return json{{"layers", c.layers}, {"width", c.width}, {"vocab", c.vocab},
              {"context", c.context}, {"seed", c.seed}};
}

}  // namespace

void ToyModelConfig::validate() const {
  if (layers < 1 || width < 1 || vocab < 1 || context < 1) {
    throw ValidationError("toy model dimensions must be positive");
  }
}

bool operator==(const ToyModelWeights& a, const ToyModelWeights& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  bool equal = true;
  std::vector<const MatrixF*> lhs;
  for_each_tensor(a, [&](const std::string&, const MatrixF& m) { lhs.push_back(&m); });
  std::size_t i = 0;
  for_each_tensor(b, [&](const std::string&, const MatrixF& m) {
    equal = equal && same(*lhs[i++], m);
  });
  return equal;
}

ToyModel::ToyModel(const ToyModelConfig& config) : config_(config) {
  config_.validate();
  weights_ = random_weights(config_);
  prepare();
}

ToyModel::ToyModel(const ToyModelConfig& config, ToyModelWeights weights)
    : config_(config), weights_(std::move(weights)) {
  config_.validate();
  const ToyModelWeights expected = shaped_weights(config_);
  if (weights_.blocks.size() != expected.blocks.size()) {
    throw ValidationError("toy model weights have the wrong number of blocks");
  }
  std::vector<std::pair<Index, Index>> shapes;
  for_each_tensor(expected, [&](const std::string&, const MatrixF& m) {
    shapes.emplace_back(m.rows(), m.cols());
  });
  std::size_t i = 0;
  for_each_tensor(weights_, [&](const std::string& name, const MatrixF& m) {
    if (m.rows() != shapes[i].first || m.cols() != shapes[i].second) {
      throw ValidationError("toy model tensor '" + name + "' has the wrong shape");
    }
    if (!m.allFinite()) throw ValidationError("toy model tensor '" + name + "' is not finite");
    ++i;
  });
  prepare();
}

void ToyModel::prepare() {
  token_embedding_ = weights_.token_embedding.cast<double>();
  position_embedding_ = weights_.position_embedding.cast<double>();
  unembedding_ = weights_.unembedding.cast<double>();
  blocks_.clear();
  for (const auto& b : weights_.blocks) {
    blocks_.push_back(BlockD{b.wq.cast<double>(), b.wk.cast<double>(), b.wv.cast<double>(),
                             b.wo.cast<double>(), b.w_in.cast<double>(), b.w_out.cast<double>(),
                             b.b_in.col(0).cast<double>(), b.b_out.col(0).cast<double>()});
  }
}

ForwardResult ToyModel::forward(std::span<const int> tokens, const ActivationHook& hook) const {
  const auto length = static_cast<Index>(tokens.size());
  if (length == 0) throw ValidationError("toy model input is empty");
  if (length > config_.context) {
    throw ValidationError("input length " + std::to_string(length) + " exceeds context " +
                          std::to_string(config_.context));
  }
  const Index d = config_.width;
  Matrix x(d, length);
  for (Index t = 0; t < length; ++t) {
    const int id = tokens[static_cast<std::size_t>(t)];
    if (id < 0 || id >= config_.vocab) {
      throw ValidationError("token id " + std::to_string(id) + " outside vocabulary");
    }
    x.col(t) = token_embedding_.col(id) + position_embedding_.col(t);
  }

  ForwardResult result;
  result.mlp_outputs.reserve(blocks_.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const BlockD& b = blocks_[l];

    const Matrix h = layer_norm(x);
    const Matrix q = b.wq * h;
    const Matrix k = b.wk * h;
    const Matrix v = b.wv * h;
    Matrix attended(d, length);
    for (Index t = 0; t < length; ++t) {
      Vector scores = (k.leftCols(t + 1).transpose() * q.col(t)) * scale;
      scores = (scores.array() - scores.maxCoeff()).exp();
      scores /= scores.sum();
      attended.col(t) = v.leftCols(t + 1) * scores;
    }
    x += b.wo * attended;

    Matrix hidden = b.w_in * layer_norm(x);
    hidden.colwise() += b.b_in;
    hidden = hidden.unaryExpr([](double u) { return gelu(u); });
    Matrix mlp = b.w_out * hidden;
    mlp.colwise() += b.b_out;

    for (Index t = 0; t < length; ++t) {
      if (hook) {
        const Vector replacement = hook(static_cast<int>(l), static_cast<int>(t), mlp.col(t));
        if (replacement.size() != d || !replacement.allFinite()) {
          throw ValidationError("activation hook returned an invalid vector");
        }
        x.col(t) += replacement;
      } else {
        x.col(t) += mlp.col(t);
      }
    }
    result.mlp_outputs.push_back(std::move(mlp));
  }
  result.logits = unembedding_ * layer_norm(x);
  return result;
}

std::vector<Vector> ToyModel::last_token_activations(std::span<const int> tokens) const {
  const ForwardResult r = forward(tokens);
  std::vector<Vector> out;
  out.reserve(r.mlp_outputs.size());
  for (const Matrix& m : r.mlp_outputs) out.push_back(m.col(m.cols() - 1));
  return out;
}

std::uint64_t write_toy_model(const ToyModel& model, std::ostream& sink) {
  json tensors = json::array();
  for_each_tensor(model.weights(), [&](const std::string& name, const MatrixF& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  const json header{{"config", config_to_json(model.config())},
                    {"dtype", "f32le"},
                    {"layout", "column-major"},
                    {"tensors", tensors}};
  detail::ByteWriter w(sink);
  detail::write_preamble(w, kModelMagic, kModelVersion, header);
  for_each_tensor(model.weights(), [&](const std::string&, const MatrixF& m) { w.matrix(m); });
  sink.flush();
  if (!sink) throw Error("write failed: sink rejected data");
  return w.written();
}

ToyModel read_toy_model(std::istream& source) {
  detail::ByteReader r(source);
  const auto pre = detail::read_preamble(r, kModelMagic, kModelVersion);
  const json& h = pre.header;
  ToyModelConfig config;
  try {
    const json& c = h.at("config");
    config.layers = c.at("layers").get<int>();
    config.width = c.at("width").get<int>();
    config.vocab = c.at("vocab").get<int>();
    config.context = c.at("context").get<int>();
    config.seed = c.at("seed").get<std::uint64_t>();
    if (h.at("dtype") != "f32le" || h.at("layout") != "column-major") {
      throw FormatError("unsupported tensor encoding");
    }
    config.validate();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }

  ToyModelWeights weights = shaped_weights(config);
  const json& listed = h.at("tensors");
  std::size_t i = 0;
  for_each_tensor(weights, [&](const std::string& name, MatrixF& m) {
    if (i >= listed.size() || listed[i].value("name", "") != name ||
        listed[i].value("rows", -1) != m.rows() || listed[i].value("cols", -1) != m.cols()) {
      throw FormatError("tensor table does not match the configuration at '" + name + "'");
    }
    m = r.matrix(m.rows(), m.cols());
    ++i;
  });
  if (i != listed.size()) throw FormatError("tensor table lists extra tensors");
  if (source.peek() != std::char_traits<char>::eof()) {
    throw FormatError("payload length mismatch: trailing bytes after payload");
  }
  return ToyModel(config, std::move(weights));
}

void save_toy_model(const ToyModel& model, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_toy_model(model, out); });
}

ToyModel load_toy_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_toy_model(in);
}

}  // namespace specedit
