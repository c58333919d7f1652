// Copyright 2026 The Sparse Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sparse_forge/encoder.hpp"

#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "sparse_forge/error.hpp"
#include "sparse_forge/random.hpp"

namespace sparse_forge {
namespace {

constexpr double kRmsEps = 1e-6;
constexpr char kCheckpointMagic[4] = {'S', 'P', 'F', 'G'};
constexpr std::uint32_t kCheckpointVersion = 1;

// Row-wise x / sqrt(mean(x^2) + eps); returns the normalized rows and the
// per-row inverse rms.
void RmsNormalize(const Matrix& x, Matrix& normed, Vector& inv_rms) {
  const auto n = x.rows();
  const double dim = static_cast<double>(x.cols());
  inv_rms.resize(n);
  normed.resize(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_rms(i) = 1.0 / std::sqrt(x.row(i).squaredNorm() / dim + kRmsEps);
    normed.row(i) = x.row(i) * inv_rms(i);
  }
}

// Gradient w.r.t. x given gradient w.r.t. x * inv_rms(x).
Matrix RmsNormalizeBackward(const Matrix& x, const Vector& inv_rms, const Matrix& d_normed) {
  const double dim = static_cast<double>(x.cols());
  Matrix dx(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s = inv_rms(i);
    const double proj = d_normed.row(i).dot(x.row(i));
    dx.row(i) = s * d_normed.row(i) - (s * s * s / dim) * proj * x.row(i);
  }
  return dx;
}

void FillUniform(Rng& rng, Matrix& m, double scale) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = scale == 0.0 ? 0.0 : rng.Uniform(-scale, scale);
  }
}

}  // namespace

void EncoderConfig::Validate() const {
  if (vocab_size <= 1) throw ContractError("encoder config: vocab_size must be > 1");
  if (embed_dim == 0) throw ContractError("encoder config: embed_dim must be > 0");
  if (max_len < 2) throw ContractError("encoder config: max_len must be >= 2");
  if (ffn_dim == 0) throw ContractError("encoder config: ffn_dim must be > 0");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ContractError("encoder config: init_scale must be finite and >= 0");
  }
}

EncoderWeights EncoderWeights::Zeros(const EncoderConfig& c) {
  const auto v = static_cast<Eigen::Index>(c.vocab_size);
  const auto d = static_cast<Eigen::Index>(c.embed_dim);
  const auto l = static_cast<Eigen::Index>(c.max_len);
  const auto f = static_cast<Eigen::Index>(c.ffn_dim);
  EncoderWeights w;
  w.embedding = Matrix::Zero(v, d);
  w.position = Matrix::Zero(2 * l, d);
  w.wq = Matrix::Zero(d, d);
  w.wk = Matrix::Zero(d, d);
  w.wv = Matrix::Zero(d, d);
  w.wo = Matrix::Zero(d, d);
  w.norm1 = Vector::Zero(d);
  w.norm2 = Vector::Zero(d);
  w.ffn_in = Matrix::Zero(d, f);
  w.ffn_out = Matrix::Zero(f, d);
  w.out_bias = Vector::Zero(v);
  return w;
}

bool EncoderWeights::SameShape(const EncoderWeights& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  };
  return same(embedding, o.embedding) && same(position, o.position) && same(wq, o.wq) &&
         same(wk, o.wk) && same(wv, o.wv) && same(wo, o.wo) && same(norm1, o.norm1) &&
         same(norm2, o.norm2) && same(ffn_in, o.ffn_in) && same(ffn_out, o.ffn_out) &&
         same(out_bias, o.out_bias);
}

std::size_t EncoderWeights::ParameterCount() const {
  std::size_t total = 0;
  ForEach([&](const char*, const double*, std::size_t n) { total += n; });
  return total;
}

EncoderParams InitParams(const EncoderConfig& config) {
  config.Validate();
  EncoderParams p{config, EncoderWeights::Zeros(config)};
  Rng rng(config.seed);
  const double s = config.init_scale;
  auto& w = p.weights;
  for (Matrix* m : {&w.embedding, &w.position, &w.wq, &w.wk, &w.wv, &w.wo, &w.ffn_in,
                    &w.ffn_out}) {
    FillUniform(rng, *m, s);
  }
  w.norm1.setOnes();
  w.norm2.setOnes();
  return p;
}

ForwardCache ForwardWithCache(const EncoderParams& params, std::span<const TokenId> tokens,
                              bool echo) {
  const auto& cfg = params.config;
  const auto& w = params.weights;
  if (tokens.empty()) throw ContractError("forward: empty token sequence");
  if (tokens.size() > cfg.max_len) {
    throw ContractError("forward: sequence of " + std::to_string(tokens.size()) +
                        " tokens exceeds max_len " + std::to_string(cfg.max_len));
  }
  ForwardCache c;
  c.tokens.assign(tokens.begin(), tokens.end());
  if (echo) c.tokens.insert(c.tokens.end(), tokens.begin(), tokens.end());
  const auto n = static_cast<Eigen::Index>(c.tokens.size());
  const auto dim = static_cast<Eigen::Index>(cfg.embed_dim);

  c.x.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TokenId t = c.tokens[static_cast<std::size_t>(i)];
    if (t >= cfg.vocab_size) {
      throw ContractError("forward: token id " + std::to_string(t) + " out of range");
    }
    c.x.row(i) = w.embedding.row(t) + w.position.row(i);
  }

  RmsNormalize(c.x, c.x_normed, c.inv_rms1);
  c.u = c.x_normed * w.norm1.asDiagonal();
  c.q = c.u * w.wq;
  c.k = c.u * w.wk;
  c.v = c.u * w.wv;

  // Causal softmax: position i attends to j <= i.
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  c.attn = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double max_s = -INFINITY;
    for (Eigen::Index j = 0; j <= i; ++j) {
      c.attn(i, j) = c.q.row(i).dot(c.k.row(j)) * scale;
      max_s = std::max(max_s, c.attn(i, j));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      c.attn(i, j) = std::exp(c.attn(i, j) - max_s);
      total += c.attn(i, j);
    }
    for (Eigen::Index j = 0; j <= i; ++j) c.attn(i, j) /= total;
  }
  c.attn_out = c.attn * c.v;
  c.h = c.x + c.attn_out * w.wo;

  RmsNormalize(c.h, c.h_normed, c.inv_rms2);
  c.r = c.h_normed * w.norm2.asDiagonal();
  c.ffn_pre = c.r * w.ffn_in;
  c.ffn_act = c.ffn_pre.cwiseMax(0.0);
  c.z = c.h + c.ffn_act * w.ffn_out;

  c.logits = c.z * w.embedding.transpose();
  c.logits.rowwise() += w.out_bias.transpose();
  if (!c.logits.allFinite()) throw NumericError("forward: non-finite logits");
  return c;
}

LogitMatrix Forward(const EncoderParams& params, std::span<const TokenId> tokens, bool echo) {
  return ForwardWithCache(params, tokens, echo).logits;
}

std::vector<std::size_t> PooledRows(std::size_t token_count, bool echo) {
  std::vector<std::size_t> rows(token_count);
  const std::size_t offset = echo ? token_count : 0;
  for (std::size_t i = 0; i < token_count; ++i) rows[i] = offset + i;
  return rows;
}

SparseVector EncodeTokens(const EncoderParams& params, std::span<const TokenId> tokens,
                          bool echo) {
  const LogitMatrix logits = Forward(params, tokens, echo);
  return SaturatePool(logits, PooledRows(tokens.size(), echo));
}

SparseVector Encode(const EncoderParams& params, const Vocabulary& vocab, std::string_view text,
                    bool echo) {
  const auto tokens = Tokenize(text, vocab, params.config.max_len);
  return EncodeTokens(params, tokens, echo);
}

SequenceGrad Backward(const EncoderParams& params, const ForwardCache& c,
                      std::vector<LogitGrad> logit_grads) {
  const auto& w = params.weights;
  const auto n = c.x.rows();
  const auto dim = c.x.cols();
  SequenceGrad g;

  // Tied projection: logits = z * E^T + b.
  Matrix dz = Matrix::Zero(n, dim);
  for (const auto& lg : logit_grads) {
    dz.row(static_cast<Eigen::Index>(lg.row)) += lg.grad * w.embedding.row(lg.col);
  }
  g.logit_grads = std::move(logit_grads);

  // z = h + relu(r * W1) * W2
  Matrix dh = dz;
  g.ffn_out = c.ffn_act.transpose() * dz;
  Matrix d_pre = (dz * w.ffn_out.transpose()).cwiseProduct(
      (c.ffn_pre.array() > 0.0).cast<double>().matrix());
  g.ffn_in = c.r.transpose() * d_pre;
  const Matrix dr = d_pre * w.ffn_in.transpose();
  g.norm2 = dr.cwiseProduct(c.h_normed).colwise().sum().transpose();
  dh += RmsNormalizeBackward(c.h, c.inv_rms2, dr * w.norm2.asDiagonal());

  // h = x + (attn * v) * Wo
  Matrix dx = dh;
  g.wo = c.attn_out.transpose() * dh;
  const Matrix d_attn_out = dh * w.wo.transpose();
  Matrix d_attn = d_attn_out * c.v.transpose();
  const Matrix dv = c.attn.transpose() * d_attn_out;

  // Softmax backward row by row over the causal prefix.
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Matrix d_scores = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double inner = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) inner += c.attn(i, j) * d_attn(i, j);
    for (Eigen::Index j = 0; j <= i; ++j) {
      d_scores(i, j) = c.attn(i, j) * (d_attn(i, j) - inner) * scale;
    }
  }
  const Matrix dq = d_scores * c.k;
  const Matrix dk = d_scores.transpose() * c.q;

  g.wq = c.u.transpose() * dq;
  g.wk = c.u.transpose() * dk;
  g.wv = c.u.transpose() * dv;
  const Matrix du = dq * w.wq.transpose() + dk * w.wk.transpose() + dv * w.wv.transpose();
  g.norm1 = du.cwiseProduct(c.x_normed).colwise().sum().transpose();
  dx += RmsNormalizeBackward(c.x, c.inv_rms1, du * w.norm1.asDiagonal());

  g.d_input = std::move(dx);
  return g;
}

void Accumulate(Gradients& grads, const ForwardCache& c, const SequenceGrad& s) {
  auto& g = grads.weights;
  for (Eigen::Index i = 0; i < s.d_input.rows(); ++i) {
    g.position.row(i) += s.d_input.row(i);
    g.embedding.row(c.tokens[static_cast<std::size_t>(i)]) += s.d_input.row(i);
  }
  for (const auto& lg : s.logit_grads) {
    g.embedding.row(lg.col) += lg.grad * c.z.row(static_cast<Eigen::Index>(lg.row));
    g.out_bias(lg.col) += lg.grad;
  }
  g.wq += s.wq;
  g.wk += s.wk;
  g.wv += s.wv;
  g.wo += s.wo;
  g.norm1 += s.norm1;
  g.norm2 += s.norm2;
  g.ffn_in += s.ffn_in;
  g.ffn_out += s.ffn_out;
}

std::vector<std::uint8_t> SerializeCheckpoint(const EncoderParams& params) {
  detail::ByteWriter out;
  out.PutBytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  out.Put<std::uint32_t>(kCheckpointVersion);
  const auto& c = params.config;
  for (std::size_t v : {c.vocab_size, c.embed_dim, c.max_len, c.ffn_dim}) {
    out.Put<std::uint64_t>(v);
  }
  params.weights.ForEach([&](const char*, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out.Put<double>(data[i]);
  });
  return std::move(out.bytes());
}

EncoderParams DeserializeCheckpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "checkpoint");
  auto magic = in.GetBytes(4);
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic)) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = in.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  EncoderConfig cfg;
  cfg.vocab_size = in.Get<std::uint64_t>();
  cfg.embed_dim = in.Get<std::uint64_t>();
  cfg.max_len = in.Get<std::uint64_t>();
  cfg.ffn_dim = in.Get<std::uint64_t>();
  try {
    cfg.Validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }

  // Expected payload, computed with overflow checks before allocating.
  const std::uint64_t limit = in.remaining() / sizeof(double);
  auto mul = [&](std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > limit / a) throw FormatError("checkpoint: tensor sizes exceed file size");
    return a * b;
  };
  const std::uint64_t v = cfg.vocab_size, d = cfg.embed_dim, l = cfg.max_len, f = cfg.ffn_dim;
  std::uint64_t total = 0;
  for (std::uint64_t part : {mul(v, d), mul(mul(2, l), d), mul(4, mul(d, d)), mul(2, d),
                             mul(2, mul(d, f)), v}) {
    if (part > limit - total) throw FormatError("checkpoint: tensor sizes exceed file size");
    total += part;
  }
  if (total != limit || in.remaining() % sizeof(double) != 0) {
    throw FormatError("checkpoint: payload size does not match header");
  }

  EncoderParams p{cfg, EncoderWeights::Zeros(cfg)};
  p.weights.ForEach([&](const char* name, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = in.Get<double>();
      if (!std::isfinite(data[i])) {
        throw FormatError(std::string("checkpoint: non-finite value in ") + name);
      }
    }
  });
  return p;
}

void SaveCheckpoint(const EncoderParams& params, const std::filesystem::path& path) {
  detail::WriteFileBytes(path.string(), SerializeCheckpoint(params));
}

EncoderParams LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(detail::ReadFileBytes(path.string()));
}

}  // namespace sparse_forge
