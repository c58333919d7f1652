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

#include "sparse_forge/trainer.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sparse_forge/error.hpp"
#include "sparse_forge/objective.hpp"
#include "sparse_forge/optimizer.hpp"

namespace sparse_forge {
namespace {

nlohmann::json ParseObject(const std::string& text, const std::set<std::string>& allowed,
                           const char* what) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw FormatError(std::string(what) + ": unknown key \"" + key + "\"");
    }
  }
  return j;
}

template <typename T>
void Read(const nlohmann::json& j, const char* key, T& out, const char* what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": bad value for \"" + key + "\": " + e.what());
  }
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void TrainConfig::Validate() const {
  if (total_steps < 0) throw ContractError("train config: total_steps must be >= 0");
  if (batch_size < 2) throw ContractError("train config: batch_size must be >= 2");
  if (!(temperature > 0.0)) throw ContractError("train config: temperature must be > 0");
  if (!(lambda_q_max >= 0.0) || !(lambda_d_max >= 0.0)) {
    throw ContractError("train config: lambda maxima must be >= 0");
  }
  if (ramp_steps() < 0 || ramp_steps() > total_steps) {
    throw ContractError("train config: lambda_ramp_steps must be in [0, total_steps]");
  }
  if (warmup_steps() < 0 || warmup_steps() > total_steps) {
    throw ContractError("train config: lr_warmup_steps must be in [0, total_steps]");
  }
  if (!(lr_max >= 0.0) || !std::isfinite(lr_max)) {
    throw ContractError("train config: lr_max must be finite and >= 0");
  }
}

TrainResult Train(const EncoderConfig& encoder_config, const TrainConfig& cfg,
                  const DatasetMix& mix, const Vocabulary& vocab, std::size_t threads,
                  const ProgressFn& progress) {
  cfg.Validate();
  if (encoder_config.vocab_size != vocab.size()) {
    throw ContractError("train: encoder vocab_size " + std::to_string(encoder_config.vocab_size) +
                        " does not match vocabulary size " + std::to_string(vocab.size()));
  }
  TrainResult result{InitParams(encoder_config), {}};
  OptimizerState state = OptimizerState::ZerosLike(result.params);
  Rng rng(cfg.seed);
  result.metrics.reserve(static_cast<std::size_t>(cfg.total_steps));

  for (std::int64_t step = 0; step < cfg.total_steps; ++step) {
    const TrainingBatch batch = SampleBatch(mix, rng, cfg.batch_size);
    const TokenizedBatch tokens = TokenizeBatch(batch, vocab, encoder_config.max_len);

    StepMetrics m;
    m.step = step;
    m.lambda_q = LambdaAt(step, cfg.ramp_steps(), cfg.lambda_q_max);
    m.lambda_d = LambdaAt(step, cfg.ramp_steps(), cfg.lambda_d_max);
    m.lr = LrAt(step, cfg.warmup_steps(), cfg.lr_max, cfg.total_steps);

    const ObjectiveSettings settings{m.lambda_q, m.lambda_d, cfg.temperature, cfg.echo_query,
                                     cfg.echo_doc};
    LossOutput out = LossAndGrad(result.params, tokens, settings, threads);
    m.loss = out.loss;
    m.infonce = out.infonce;
    m.flops_q = out.flops_q;
    m.flops_d = out.flops_d;
    m.nnz_q = out.nnz_q;
    m.nnz_d = out.nnz_d;
    if (!std::isfinite(out.loss)) {
      throw NumericError("train: non-finite loss at step " + std::to_string(step) +
                         " (infonce=" + std::to_string(out.infonce) +
                         ", flops_q=" + std::to_string(out.flops_q) +
                         ", flops_d=" + std::to_string(out.flops_d) + ")");
    }
    AdamStep(result.params, out.grads, state, m.lr);
    result.metrics.push_back(m);
    if (progress) progress(m);
  }
  return result;
}

std::string FormatMetricsLine(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["loss"] = m.loss;
  j["infonce"] = m.infonce;
  j["flops_q"] = m.flops_q;
  j["flops_d"] = m.flops_d;
  j["lambda_q"] = m.lambda_q;
  j["lambda_d"] = m.lambda_d;
  j["lr"] = m.lr;
  j["nnz_q"] = m.nnz_q;
  j["nnz_d"] = m.nnz_d;
  return j.dump();
}

void WriteMetrics(const std::filesystem::path& path, const std::vector<StepMetrics>& metrics) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& m : metrics) out << FormatMetricsLine(m) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

EncoderConfig ParseEncoderConfig(const std::string& text) {
  const char* what = "encoder config";
  auto j = ParseObject(
      text, {"vocab_size", "embed_dim", "max_len", "ffn_dim", "seed", "init_scale"}, what);
  EncoderConfig c;
  Read(j, "vocab_size", c.vocab_size, what);
  Read(j, "embed_dim", c.embed_dim, what);
  Read(j, "max_len", c.max_len, what);
  Read(j, "ffn_dim", c.ffn_dim, what);
  Read(j, "seed", c.seed, what);
  Read(j, "init_scale", c.init_scale, what);
  return c;
}

TrainConfig ParseTrainConfig(const std::string& text) {
  const char* what = "train config";
  auto j = ParseObject(text,
                       {"lambda_q_max", "lambda_d_max", "lambda_ramp_steps", "total_steps",
                        "batch_size", "lr_max", "lr_warmup_steps", "temperature", "seed",
                        "echo_query", "echo_doc"},
                       what);
  TrainConfig c;
  Read(j, "lambda_q_max", c.lambda_q_max, what);
  Read(j, "lambda_d_max", c.lambda_d_max, what);
  Read(j, "total_steps", c.total_steps, what);
  Read(j, "batch_size", c.batch_size, what);
  Read(j, "lr_max", c.lr_max, what);
  Read(j, "temperature", c.temperature, what);
  Read(j, "seed", c.seed, what);
  Read(j, "echo_query", c.echo_query, what);
  Read(j, "echo_doc", c.echo_doc, what);
  if (j.contains("lambda_ramp_steps")) {
    std::int64_t v = 0;
    Read(j, "lambda_ramp_steps", v, what);
    c.lambda_ramp_steps = v;
  }
  if (j.contains("lr_warmup_steps")) {
    std::int64_t v = 0;
    Read(j, "lr_warmup_steps", v, what);
    c.lr_warmup_steps = v;
  }
  return c;
}

EncoderConfig LoadEncoderConfig(const std::filesystem::path& path) {
  return ParseEncoderConfig(ReadText(path));
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  return ParseTrainConfig(ReadText(path));
}

std::string EncoderConfigToJson(const EncoderConfig& c) {
  nlohmann::ordered_json j;
  j["vocab_size"] = c.vocab_size;
  j["embed_dim"] = c.embed_dim;
  j["max_len"] = c.max_len;
  j["ffn_dim"] = c.ffn_dim;
  j["seed"] = c.seed;
  j["init_scale"] = c.init_scale;
  return j.dump();
}

std::string TrainConfigToJson(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["lambda_q_max"] = c.lambda_q_max;
  j["lambda_d_max"] = c.lambda_d_max;
  j["lambda_ramp_steps"] = c.ramp_steps();
  j["total_steps"] = c.total_steps;
  j["batch_size"] = c.batch_size;
  j["lr_max"] = c.lr_max;
  j["lr_warmup_steps"] = c.warmup_steps();
  j["temperature"] = c.temperature;
  j["seed"] = c.seed;
  j["echo_query"] = c.echo_query;
  j["echo_doc"] = c.echo_doc;
  return j.dump();
}

}  // namespace sparse_forge
