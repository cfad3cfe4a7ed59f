#include "e2eslu/acoustic/acoustic.hpp"

#include <cmath>

#include "e2eslu/errors.hpp"
#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

void ACConfig::validate() const {
  if (feature_dim == 0 || conv_channels == 0 || model_dim == 0 || ff_dim == 0) {
    throw ConfigError("acoustic dimensions must be positive");
  }
  if (conv_layers == 0 || encoder_layers == 0 || decoder_layers == 0) {
    throw ConfigError("acoustic layer counts must be at least 1");
  }
  if (kernel == 0 || stride == 0) throw ConfigError("conv kernel and stride must be positive");
  if (heads == 0 || model_dim % heads != 0) {
    throw ConfigError("acoustic model dim " + std::to_string(model_dim) +
                      " not divisible by heads " + std::to_string(heads));
  }
  if (vocab_size <= static_cast<std::size_t>(kSpecialCount)) throw ConfigError("acoustic vocab size too small");
  if (max_decode == 0) throw ConfigError("max decode length must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must lie in [0, 1)");
}

std::size_t ACConfig::receptive_field() const {
  std::size_t t = 1;
  for (std::size_t i = 0; i < conv_layers; ++i) t = (t - 1) * stride + kernel;
  return t;
}

std::size_t ACConfig::output_length(std::size_t frames) const {
  std::size_t t = frames;
  for (std::size_t i = 0; i < conv_layers; ++i) {
    if (t < kernel) return 0;
    t = conv_output_length(t, kernel, stride);
  }
  return t;
}

AcousticModel::AcousticModel(ParameterStore& store, const ACConfig& cfg, Rng& rng,
                             const std::string& prefix, bool with_decoder)
    : cfg_(cfg), with_decoder_(with_decoder) {
  cfg_.validate();
  const std::string conv_group = prefix + ".conv";
  std::size_t in = cfg_.feature_dim;
  for (std::size_t i = 0; i < cfg_.conv_layers; ++i) {
    const std::string name = prefix + ".conv" + std::to_string(i);
    const std::size_t out = cfg_.conv_channels;
    conv_kernels_.push_back(&store.add(name + ".weight", Shape{cfg_.kernel, in, out},
                                       Init::kXavierUniform, rng, conv_group, cfg_.kernel * in,
                                       cfg_.kernel * out));
    conv_biases_.push_back(&store.add(name + ".bias", Shape{out}, Init::kZeros, rng, conv_group));
    in = out;
  }
  if (in != cfg_.model_dim) {
    conv_projection_ = Linear::create(store, prefix + ".conv_proj", in, cfg_.model_dim, rng,
                                      conv_group);
    has_projection_ = true;
  }
  const std::string enc_group = prefix + ".encoder";
  for (std::size_t i = 0; i < cfg_.encoder_layers; ++i) {
    encoder_.push_back(EncoderLayer::create(store, prefix + ".encoder" + std::to_string(i),
                                            cfg_.model_dim, cfg_.heads, cfg_.ff_dim, rng,
                                            enc_group));
  }
  encoder_norm_ = LayerNorm::create(store, prefix + ".encoder_norm", cfg_.model_dim, rng, enc_group);
  if (!with_decoder_) return;
  const std::string dec_group = prefix + ".decoder";
  token_embedding_ = &store.add(prefix + ".token_embedding", Shape{cfg_.vocab_size, cfg_.model_dim},
                                Init::kEmbeddingNormal, rng, dec_group);
  for (std::size_t i = 0; i < cfg_.decoder_layers; ++i) {
    decoder_.push_back(DecoderLayer::create(store, prefix + ".decoder" + std::to_string(i),
                                            cfg_.model_dim, cfg_.heads, cfg_.ff_dim, rng,
                                            dec_group));
  }
  decoder_norm_ = LayerNorm::create(store, prefix + ".decoder_norm", cfg_.model_dim, rng, dec_group);
  output_ = Linear::create(store, prefix + ".output", cfg_.model_dim, cfg_.vocab_size, rng, dec_group);
}

Var AcousticModel::conv_embed(const ForwardContext& ctx, Var features) const {
  Graph& g = ctx.graph;
  const Shape& s = features.shape();
  if (s.size() != 3 || s[2] != cfg_.feature_dim) {
    throw DimensionError("conv_embed expects [B, T, " + std::to_string(cfg_.feature_dim) +
                         "], got " + shape_string(s));
  }
  if (s[1] < cfg_.receptive_field()) {
    throw LengthError("input of " + std::to_string(s[1]) + " frames is shorter than the minimum of " +
                      std::to_string(cfg_.receptive_field()));
  }
  Var x = features;
  for (std::size_t i = 0; i < conv_kernels_.size(); ++i) {
    x = conv1d(x, g.parameter(*conv_kernels_[i]), cfg_.stride);
    x = relu(add(x, g.parameter(*conv_biases_[i])));
  }
  if (has_projection_) x = conv_projection_(g, x);
  return x;
}

Var AcousticModel::encode(const ForwardContext& ctx, Var embedded,
                          std::span<const std::uint8_t> mask) const {
  Var x = ctx.drop(add_positions(ctx.graph, embedded, Real(1)));
  for (const auto& layer : encoder_) x = layer(ctx, x, mask);
  return encoder_norm_(ctx.graph, x);
}

Var AcousticModel::decode_hidden(const ForwardContext& ctx, Var memory,
                                 std::span<const std::uint8_t> memory_mask,
                                 std::span<const int> inputs, std::size_t length,
                                 std::span<const std::uint8_t> input_mask) const {
  if (!with_decoder_) throw ContractError("acoustic model was built without a decoder");
  Graph& g = ctx.graph;
  const std::size_t batch = memory.shape()[0];
  if (length == 0 || inputs.size() != batch * length) {
    throw ContractError("decoder inputs do not match batch " + std::to_string(batch) +
                        " x length " + std::to_string(length));
  }
  Var emb = embedding_rows(g.parameter(*token_embedding_), inputs);
  Var x = ctx.drop(add_positions(g, reshape(emb, Shape{batch, length, cfg_.model_dim})));
  for (const auto& layer : decoder_) x = layer(ctx, x, input_mask, memory, memory_mask);
  return decoder_norm_(g, x);
}

Var AcousticModel::project(Graph& g, Var hidden) const { return output_(g, hidden); }

Var AcousticModel::decode_teacher_forced(const ForwardContext& ctx, Var memory,
                                         std::span<const std::uint8_t> memory_mask,
                                         std::span<const int> inputs, std::size_t length,
                                         std::span<const std::uint8_t> input_mask) const {
  return project(ctx.graph,
                 decode_hidden(ctx, memory, memory_mask, inputs, length, input_mask));
}

GreedyResult AcousticModel::decode_greedy(const ForwardContext& ctx, Var memory,
                                          std::span<const std::uint8_t> memory_mask) const {
  const std::size_t batch = memory.shape()[0];
  const std::size_t vocab = cfg_.vocab_size;
  GreedyResult r;
  r.pieces.resize(batch);
  r.truncated.assign(batch, false);
  std::vector<std::vector<Real>> rows(batch);
  std::vector<bool> done(batch, false);
  std::vector<std::vector<int>> prefix(batch, std::vector<int>{kBosId});
  std::size_t active = batch;
  for (std::size_t step = 0; step < cfg_.max_decode && active > 0; ++step) {
    const std::size_t len = step + 1;
    std::vector<int> inputs;
    inputs.reserve(batch * len);
    for (const auto& p : prefix) inputs.insert(inputs.end(), p.begin(), p.end());
    Var hidden = decode_hidden(ctx, memory, memory_mask, inputs, len, {});
    Var last = slice(hidden, 1, step, step + 1);
    const Tensor& logits = project(ctx.graph, last).value();
    const std::vector<int> best = argmax_rows(logits);
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) {
        prefix[b].push_back(kPadId);
        continue;
      }
      const Real* row = logits.data() + b * vocab;
      rows[b].insert(rows[b].end(), row, row + vocab);
      prefix[b].push_back(best[b]);
      if (best[b] == kEosId) {
        done[b] = true;
        --active;
      } else {
        r.pieces[b].push_back(best[b]);
      }
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (!done[b]) r.truncated[b] = true;
    const std::size_t steps = rows[b].size() / vocab;
    r.posteriors.emplace_back(Shape{steps, vocab}, std::move(rows[b]));
  }
  return r;
}

Var asr_loss(Var logits, std::span<const int> targets) {
  const Shape& s = logits.shape();
  if (s.size() < 2 || numel(s) / s.back() != targets.size()) {
    throw ContractError("ASR loss: " + std::to_string(targets.size()) + " targets for logits " +
                        shape_string(s));
  }
  return cross_entropy(logits, targets, -1);
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
