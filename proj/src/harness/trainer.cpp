#include "e2eslu/harness/trainer.hpp"

#include <chrono>
#include <iostream>
#include <numeric>

#include "e2eslu/diffengine/adam.hpp"
#include "e2eslu/errors.hpp"
#include "e2eslu/harness/evaluate.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

void set_frozen(NamedParameter& p, bool frozen) {
  p.frozen = frozen;
  p.tensor.set_requires_grad(!frozen);
}

// Freezes everything outside the first `unlocked` groups of `order`; groups
// missing from `order` always train.
void apply_unfreeze(ParameterStore& store, const std::vector<std::string>& order,
                    std::size_t unlocked) {
  for (auto& e : store.entries()) {
    auto it = std::find(order.begin(), order.end(), e->group);
    const bool frozen =
        it != order.end() && static_cast<std::size_t>(it - order.begin()) >= unlocked;
    set_frozen(*e, frozen);
  }
}

}  // namespace

TrainResult train_model(Trainable& model, std::span<const Utterance> train, const TrainConfig& cfg,
                        const WordpieceVocab* vocab, std::span<const Utterance> dev,
                        const StepCallback& on_step) {
  if (train.empty()) throw DataError("training set is empty");
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto& ac = model.config().ac;
  const Real dropout = ac.dropout;
  ParameterStore& store = model.parameters();
  const auto order = model.unfreeze_order();
  std::size_t unlocked = cfg.unfreeze_interval > 0 ? 1 : order.size();
  apply_unfreeze(store, order, unlocked);

  AdamConfig acfg;
  acfg.lr = cfg.lr_at(0);
  Adam adam(store, acfg);
  Rng order_rng = Rng(cfg.seed).derive(0x5eedULL);
  Rng step_rng = Rng(cfg.seed).derive(0xd20bULL);
  const SluModel* slu = dynamic_cast<const SluModel*>(&model);
  const bool dev_eval = cfg.eval_every > 0 && slu && vocab && !dev.empty();

  std::vector<std::size_t> perm(train.size());
  std::iota(perm.begin(), perm.end(), 0);
  order_rng.shuffle(perm);
  std::size_t cursor = 0;

  TrainResult result;
  std::vector<const Utterance*> members;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cfg.unfreeze_interval > 0 && step > 0 && step % cfg.unfreeze_interval == 0 &&
        unlocked < order.size()) {
      apply_unfreeze(store, order, ++unlocked);
    }
    members.clear();
    for (std::size_t i = 0; i < std::min(cfg.batch_size, train.size()); ++i) {
      if (cursor == perm.size()) {
        order_rng.shuffle(perm);
        cursor = 0;
      }
      members.push_back(&train[perm[cursor++]]);
    }
    Batch batch = make_batch(members, ac.feature_dim, ac.receptive_field());

    Graph g;
    ForwardContext ctx{g, step_rng, true, dropout};
    LossTerms terms = model.losses(ctx, batch, cfg.weights);
    g.backward(terms.total);

    StepLog log;
    log.step = step;
    log.loss = breakdown(terms);
    log.lr = cfg.lr_at(step);
    log.token_accuracy = token_accuracy(terms.asr_logits.value(), batch);
    log.grad_norm = clip_grad_norm(store, cfg.clip_norm > 0 ? cfg.clip_norm : 1e30);
    adam.set_lr(log.lr);
    adam.step();
    store.zero_grad();
    result.log.push_back(log);
    result.steps_run = step + 1;
    if (on_step) on_step(log);
    if (cfg.verbose && cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.steps)) {
      std::cerr << "step " << step << " loss " << log.loss.l_e2e << " (intent " << log.loss.l_intent
                << ", slot " << log.loss.l_slot << ", asr " << log.loss.l_asr << ") acc "
                << log.token_accuracy << '\n';
    }
    if (dev_eval && (step + 1) % cfg.eval_every == 0) {
      const double irer = evaluate(*slu, dev, *vocab).report.irer;
      result.dev.push_back({step + 1, irer});
      if (cfg.verbose) std::cerr << "step " << step + 1 << " dev IRER " << irer << '\n';
      if (cfg.dev_irer_threshold >= 0 && irer <= cfg.dev_irer_threshold &&
          !result.steps_to_threshold) {
        result.steps_to_threshold = step + 1;
        if (cfg.stop_at_threshold) break;
      }
    }
    if (cfg.max_seconds > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >=
            cfg.max_seconds) {
      break;
    }
  }
  apply_unfreeze(store, order, order.size());
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TrainResult pretrain_ac(AcousticPretrainModel& model, std::span<const Utterance> train,
                        const TrainConfig& cfg, const StepCallback& on_step) {
  return train_model(model, train, cfg, nullptr, {}, on_step);
}

TrainResult train_e2e(MultistageModel& model, std::span<const Utterance> train,
                      const TrainConfig& cfg, const WordpieceVocab& vocab,
                      std::span<const Utterance> dev, const ParameterStore* pretrained_ac,
                      const StepCallback& on_step) {
  if (pretrained_ac) {
    if (copy_matching(*pretrained_ac, model.parameters()) == 0) {
      throw ConfigError("pretrained checkpoint shares no parameters with the model");
    }
  }
  return train_model(model, train, cfg, &vocab, dev, on_step);
}

TrainResult train_baseline(MultitaskBaseline& model, std::span<const Utterance> train,
                           const TrainConfig& cfg, const WordpieceVocab& vocab,
                           std::span<const Utterance> dev, const StepCallback& on_step) {
  return train_model(model, train, cfg, &vocab, dev, on_step);
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
