#include "e2eslu/harness/config.hpp"

#include <cmath>
#include <fstream>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (steps == 0) throw ConfigError("step count must be positive");
  if (!(lr >= 1e-5 && lr <= 1e-2)) throw ConfigError("learning rate outside [1e-5, 1e-2]");
  if (!(cut_fraction > 0 && cut_fraction < 1)) throw ConfigError("cut_fraction must lie in (0, 1)");
  if (!(lr_ratio >= 1)) throw ConfigError("lr_ratio must be at least 1");
  if (clip_norm < 0) throw ConfigError("clip_norm must be non-negative");
  if (max_seconds < 0) throw ConfigError("max_seconds must be non-negative");
}

double TrainConfig::lr_at(std::size_t step) const {
  if (schedule == LrSchedule::kConstant) return lr;
  const double cut = std::max(1.0, std::floor(static_cast<double>(steps) * cut_fraction));
  const double t = static_cast<double>(step);
  const double p = t < cut ? t / cut : 1.0 - (t - cut) / (cut * (1.0 / cut_fraction - 1.0));
  return lr * (1.0 + std::max(0.0, p) * (lr_ratio - 1.0)) / lr_ratio;
}

void fit_to_inventory(ModelConfig& m, std::size_t vocab_size, std::size_t intents,
                      std::size_t slot_labels) {
  m.ac.vocab_size = vocab_size;
  m.sc.vocab_size = vocab_size;
  m.sc.intents = intents;
  m.sc.slot_labels = slot_labels;
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void take_real(const json& j, const char* key, Real& out) {
  double v = static_cast<double>(out);
  take(j, key, v);
  out = static_cast<Real>(v);
}

const char* const kKnownKeys[] = {
    "feature_dim", "conv_layers", "conv_channels", "conv_kernel", "conv_stride", "ac_dim",
    "ac_encoder_layers", "ac_decoder_layers", "ac_heads", "ac_ff_dim", "max_decode", "vocab_size",
    "sc_dim", "sc_layers", "sc_heads", "sc_ff_dim", "intents", "slot_labels", "dropout",
    "interface", "k", "tau", "straight_through", "seed", "batch_size", "steps", "lr", "schedule",
    "cut_fraction", "lr_ratio", "unfreeze_interval", "clip_norm", "w_intent", "w_slot", "w_asr",
    "log_every", "eval_every", "dev_irer_threshold", "stop_at_threshold", "max_seconds", "verbose",
    "model_kind", "train_size", "dev_size", "test_size", "pool_size", "lexicon_size",
    "min_frames", "max_frames", "noise", "vocab_max"};

}  // namespace

void apply_flat_config(const json& flat, ModelConfig& m, TrainConfig* t) {
  if (!flat.is_object()) throw ConfigError("config must be a flat JSON object");
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown config key '" + it.key() + "'");
    if (it->is_object() || it->is_array()) {
      throw ConfigError("config key '" + it.key() + "' must be a scalar");
    }
  }
  take(flat, "feature_dim", m.ac.feature_dim);
  take(flat, "conv_layers", m.ac.conv_layers);
  take(flat, "conv_channels", m.ac.conv_channels);
  take(flat, "conv_kernel", m.ac.kernel);
  take(flat, "conv_stride", m.ac.stride);
  take(flat, "ac_dim", m.ac.model_dim);
  take(flat, "ac_encoder_layers", m.ac.encoder_layers);
  take(flat, "ac_decoder_layers", m.ac.decoder_layers);
  take(flat, "ac_heads", m.ac.heads);
  take(flat, "ac_ff_dim", m.ac.ff_dim);
  take(flat, "max_decode", m.ac.max_decode);
  take(flat, "vocab_size", m.ac.vocab_size);
  m.sc.vocab_size = m.ac.vocab_size;
  take(flat, "sc_dim", m.sc.model_dim);
  take(flat, "sc_layers", m.sc.layers);
  take(flat, "sc_heads", m.sc.heads);
  take(flat, "sc_ff_dim", m.sc.ff_dim);
  take(flat, "intents", m.sc.intents);
  take(flat, "slot_labels", m.sc.slot_labels);
  if (flat.contains("dropout")) {
    take_real(flat, "dropout", m.ac.dropout);
    m.sc.dropout = m.ac.dropout;
  }
  if (flat.contains("interface")) {
    std::string name;
    take(flat, "interface", name);
    m.iface.kind = parse_interface(name);
  }
  take(flat, "k", m.iface.k);
  take_real(flat, "tau", m.iface.tau);
  take(flat, "straight_through", m.iface.straight_through);
  take(flat, "seed", m.seed);
  if (!t) return;
  t->seed = m.seed;
  take(flat, "batch_size", t->batch_size);
  take(flat, "steps", t->steps);
  take(flat, "lr", t->lr);
  if (flat.contains("schedule")) {
    std::string s;
    take(flat, "schedule", s);
    if (s == "constant") t->schedule = LrSchedule::kConstant;
    else if (s == "slanted") t->schedule = LrSchedule::kSlantedTriangular;
    else throw ConfigError("unknown schedule '" + s + "' (constant, slanted)");
  }
  take(flat, "cut_fraction", t->cut_fraction);
  take(flat, "lr_ratio", t->lr_ratio);
  take(flat, "unfreeze_interval", t->unfreeze_interval);
  take(flat, "clip_norm", t->clip_norm);
  take_real(flat, "w_intent", t->weights.intent);
  take_real(flat, "w_slot", t->weights.slot);
  take_real(flat, "w_asr", t->weights.asr);
  take(flat, "log_every", t->log_every);
  take(flat, "eval_every", t->eval_every);
  take(flat, "dev_irer_threshold", t->dev_irer_threshold);
  take(flat, "stop_at_threshold", t->stop_at_threshold);
  take(flat, "max_seconds", t->max_seconds);
  take(flat, "verbose", t->verbose);
}

json to_flat_config(const ModelConfig& m, const TrainConfig* t) {
  json j = {{"feature_dim", m.ac.feature_dim},
            {"conv_layers", m.ac.conv_layers},
            {"conv_channels", m.ac.conv_channels},
            {"conv_kernel", m.ac.kernel},
            {"conv_stride", m.ac.stride},
            {"ac_dim", m.ac.model_dim},
            {"ac_encoder_layers", m.ac.encoder_layers},
            {"ac_decoder_layers", m.ac.decoder_layers},
            {"ac_heads", m.ac.heads},
            {"ac_ff_dim", m.ac.ff_dim},
            {"max_decode", m.ac.max_decode},
            {"vocab_size", m.ac.vocab_size},
            {"sc_dim", m.sc.model_dim},
            {"sc_layers", m.sc.layers},
            {"sc_heads", m.sc.heads},
            {"sc_ff_dim", m.sc.ff_dim},
            {"intents", m.sc.intents},
            {"slot_labels", m.sc.slot_labels},
            {"dropout", static_cast<double>(m.ac.dropout)},
            {"interface", interface_name(m.iface.kind)},
            {"k", m.iface.k},
            {"tau", static_cast<double>(m.iface.tau)},
            {"straight_through", m.iface.straight_through},
            {"seed", m.seed}};
  if (t) {
    j["batch_size"] = t->batch_size;
    j["steps"] = t->steps;
    j["lr"] = t->lr;
    j["schedule"] = t->schedule == LrSchedule::kConstant ? "constant" : "slanted";
    j["cut_fraction"] = t->cut_fraction;
    j["lr_ratio"] = t->lr_ratio;
    j["unfreeze_interval"] = t->unfreeze_interval;
    j["clip_norm"] = t->clip_norm;
    j["w_intent"] = static_cast<double>(t->weights.intent);
    j["w_slot"] = static_cast<double>(t->weights.slot);
    j["w_asr"] = static_cast<double>(t->weights.asr);
    j["eval_every"] = t->eval_every;
    j["dev_irer_threshold"] = t->dev_irer_threshold;
    j["max_seconds"] = t->max_seconds;
  }
  return j;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config " + path.string() + " is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
