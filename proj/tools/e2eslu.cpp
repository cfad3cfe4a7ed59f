// Command-line front end: data generation, training, evaluation, benchmarks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "e2eslu/errors.hpp"
#include "e2eslu/harness/bench.hpp"
#include "e2eslu/harness/checkpoint.hpp"
#include "e2eslu/harness/evaluate.hpp"
#include "e2eslu/harness/experiment.hpp"
#include "e2eslu/harness/trainer.hpp"
#include "e2eslu/synthcorpus/complexity.hpp"
#include "e2eslu/synthcorpus/corpus.hpp"
#include "e2eslu/synthcorpus/dataset_io.hpp"
#include "e2eslu/synthcorpus/split.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace e2eslu;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Options shared by the training subcommands.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> interface;
  std::optional<std::size_t> k;
  std::optional<double> tau;
  std::optional<double> lr;
  std::optional<std::size_t> steps;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "flat JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--interface", c.interface, "topk, matmul or gumbel");
  app->add_option("--k", c.k, "top-k size");
  app->add_option("--tau", c.tau, "Gumbel temperature");
  app->add_option("--lr", c.lr, "learning rate");
  app->add_option("--steps", c.steps, "training steps");
}

json read_flat(const Common& c) { return c.config.empty() ? json::object() : read_config_file(c.config); }

void apply_data_keys(const json& flat, DataConfig& d) {
  auto take = [&](const char* key, auto& out) {
    if (flat.contains(key)) out = flat.at(key).get<std::remove_reference_t<decltype(out)>>();
  };
  take("seed", d.seed);
  take("train_size", d.train_size);
  take("dev_size", d.dev_size);
  take("test_size", d.test_size);
  take("pool_size", d.pool_size);
  take("lexicon_size", d.lexicon_size);
  take("vocab_max", d.vocab_max);
  take("feature_dim", d.feature_dim);
  take("min_frames", d.min_frames);
  take("max_frames", d.max_frames);
  take("noise", d.noise);
}

// Model and training configs: defaults, then the file, then flags.
void build_configs(const Common& c, const DatasetInventory& inv, ModelConfig& m, TrainConfig& t) {
  apply_flat_config(read_flat(c), m, &t);
  fit_to_inventory(m, inv.vocab.size(), inv.intents.size(), inv.slots.size());
  if (c.seed) {
    m.seed = *c.seed;
    t.seed = *c.seed;
  }
  if (c.interface) m.iface.kind = parse_interface(*c.interface);
  if (c.k) m.iface.k = *c.k;
  if (c.tau) m.iface.tau = static_cast<Real>(*c.tau);
  if (c.lr) t.lr = *c.lr;
  if (c.steps) t.steps = *c.steps;
  m.iface.validate(m.ac.vocab_size);
  t.validate();
}

std::vector<Utterance> load_split(const fs::path& dir, const std::string& name,
                                  const DatasetInventory& inv, bool required = true) {
  const fs::path p = dir / (name + ".jsonl");
  if (!fs::exists(p)) {
    if (required) throw DataError("missing " + p.string());
    return {};
  }
  return read_jsonl(p, inv.intents, inv.slots, &inv.vocab);
}

void print_step(const StepLog& s, std::size_t every) {
  if (every == 0 || s.step % every != 0) return;
  std::fprintf(stderr, "step %zu loss %.4f (intent %.4f slot %.4f asr %.4f) lr %.2e acc %.3f\n",
               s.step, s.loss.l_e2e, s.loss.l_intent, s.loss.l_slot, s.loss.l_asr, s.lr,
               s.token_accuracy);
}

json counts_json(const EvalCounts& c) {
  return {{"utterances", c.utterances},
          {"gold_slots", c.gold_slots},
          {"intent_errors", c.intent_errors},
          {"slot_substitutions", c.slot_substitutions},
          {"slot_deletions", c.slot_deletions},
          {"slot_insertions", c.slot_insertions},
          {"interpretation_errors", c.interpretation_errors},
          {"truncations", c.truncations}};
}

// --- subcommands ------------------------------------------------------------

int gen_data(const Common& c, const fs::path& out) {
  DataConfig d;
  apply_data_keys(read_flat(c), d);
  if (c.seed) d.seed = *c.seed;
  const SyntheticData data = make_synthetic_data(d);
  fs::create_directories(out);
  DatasetInventory{data.vocab, data.intents, data.slots}.save(out);
  write_jsonl(out / "train.jsonl", data.train, data.intents, data.slots);
  write_jsonl(out / "dev.jsonl", data.dev, data.intents, data.slots);
  write_jsonl(out / "test.jsonl", data.test, data.intents, data.slots);
  write_jsonl(out / "hard.jsonl", data.hard, data.intents, data.slots);
  std::printf("wrote %s: vocabulary %zu, intents %zu, slot labels %zu\n", out.c_str(),
              data.vocab.size(), data.intents.size(), data.slots.size());
  std::printf("train %zu, dev %zu, test %zu, hard %zu\n", data.train.size(), data.dev.size(),
              data.test.size(), data.hard.size());
  return 0;
}

int split_hard(const fs::path& inventory, const fs::path& pool, const fs::path& train,
               const fs::path& dev, const fs::path& out) {
  const auto inv = DatasetInventory::load(inventory);
  const auto p = read_jsonl(pool, inv.intents, inv.slots, nullptr, false);
  const auto t = read_jsonl(train, inv.intents, inv.slots, nullptr, false);
  const auto d = read_jsonl(dev, inv.intents, inv.slots, nullptr, false);
  const auto hard = build_hard_split(p, t, d);
  write_jsonl(out, hard, inv.intents, inv.slots);
  std::printf("%zu of %zu pool utterances have an unseen word bigram\n", hard.size(), p.size());
  return 0;
}

int complexity(const fs::path& inventory, const std::vector<std::string>& files, std::size_t n) {
  const auto inv = DatasetInventory::load(inventory);
  std::vector<std::vector<std::string>> sentences;
  for (const auto& f : files) {
    for (const auto& u : read_jsonl(f, inv.intents, inv.slots, nullptr, false)) sentences.push_back(u.words);
  }
  const auto r = ngram_entropy(sentences, n);
  for (std::size_t i = 0; i < r.per_n.size(); ++i) std::printf("H(%zu-gram) = %.4f bits\n", i + 1, r.per_n[i]);
  std::printf("average = %.4f bits over %zu sentences\n", r.average, sentences.size());
  return 0;
}

int pretrain(const Common& c, const fs::path& data_dir, const fs::path& out) {
  const auto inv = DatasetInventory::load(data_dir);
  ModelConfig m;
  TrainConfig t;
  build_configs(c, inv, m, t);
  auto train = load_split(data_dir, "train", inv);
  AcousticPretrainModel model(m);
  const auto r = pretrain_ac(model, train, t, [&](const StepLog& s) { print_step(s, t.log_every); });
  save_model(out, model, &t);
  std::printf("pretrained %zu steps in %.1f s, saved %s\n", r.steps_run, r.seconds, out.c_str());
  return 0;
}

int train(const Common& c, const fs::path& data_dir, const fs::path& out, bool baseline,
          const std::string& pretrained) {
  const auto inv = DatasetInventory::load(data_dir);
  ModelConfig m;
  TrainConfig t;
  build_configs(c, inv, m, t);
  const auto tr = load_split(data_dir, "train", inv);
  const auto dev = load_split(data_dir, "dev", inv, false);
  auto log = [&](const StepLog& s) { print_step(s, t.log_every); };
  TrainResult r;
  std::unique_ptr<SluModel> model;
  if (baseline) {
    auto b = std::make_unique<MultitaskBaseline>(m);
    r = train_baseline(*b, tr, t, inv.vocab, dev, log);
    model = std::move(b);
  } else {
    auto ms = std::make_unique<MultistageModel>(m);
    std::optional<Checkpoint> ck;
    if (!pretrained.empty()) ck = load_checkpoint(pretrained);
    if (ck) {
      AcousticPretrainModel ac(m);
      restore_parameters(*ck, ac.parameters());
      r = train_e2e(*ms, tr, t, inv.vocab, dev, &ac.parameters(), log);
    } else {
      r = train_e2e(*ms, tr, t, inv.vocab, dev, nullptr, log);
    }
    model = std::move(ms);
  }
  save_model(out, *model, &t);
  for (const auto& p : r.dev) std::printf("step %zu dev IRER %.4f\n", p.step, p.irer);
  std::printf("trained %s for %zu steps in %.1f s, saved %s\n", model->kind().c_str(), r.steps_run,
              r.seconds, out.c_str());
  return 0;
}

int eval(const fs::path& model_path, const fs::path& data_dir, const std::string& split,
         bool oracle, const std::string& report_path) {
  const auto inv = DatasetInventory::load(data_dir);
  auto owned = load_model(model_path);
  auto* model = dynamic_cast<SluModel*>(owned.get());
  if (!model) throw ConfigError("checkpoint holds a '" + owned->kind() + "' model, which cannot be evaluated");
  const MultistageModel* ms = dynamic_cast<const MultistageModel*>(model);
  if (oracle && !ms) throw ConfigError("--oracle needs a multistage model");
  auto run = [&](std::span<const Utterance> data) {
    return oracle ? evaluate_oracle(*ms, data, inv.vocab) : evaluate(*model, data, inv.vocab);
  };
  const auto test = load_split(data_dir, split, inv);
  const EvalReport r = run(test).report;
  std::optional<double> h_irer;
  const auto hard = load_split(data_dir, "hard", inv, false);
  if (!hard.empty() && split != "hard") h_irer = run(hard).report.irer;

  const json flat = model_document(*owned);
  json j = {{"icer", r.icer},
            {"ser", r.ser},
            {"irer", r.irer},
            {"counts", counts_json(r.counts)},
            {"config_hash", config_hash(flat)},
            {"seed", flat.value("seed", 0)},
            {"oracle", oracle}};
  if (h_irer) j["h_irer"] = *h_irer;

  std::printf("%-10s %8s\n", "metric", "value");
  std::printf("%-10s %8.4f\n", "ICER", r.icer);
  std::printf("%-10s %8.4f\n", "SER", r.ser);
  std::printf("%-10s %8.4f\n", "IRER", r.irer);
  if (h_irer) std::printf("%-10s %8.4f\n", "h-IRER", *h_irer);
  std::printf("%zu utterances (%s%s), %zu truncated decodes\n", r.counts.utterances, split.c_str(),
              oracle ? ", gold transcripts" : "", r.counts.truncations);
  if (!report_path.empty()) {
    std::ofstream(report_path) << j.dump(2) << '\n';
  } else {
    std::printf("%s\n", j.dump().c_str());
  }
  return 0;
}

int bench(const std::map<std::string, std::string>& paths, const fs::path& data_dir,
          std::size_t repeats, bool token_cost) {
  const auto inv = DatasetInventory::load(data_dir);
  std::map<std::string, std::unique_ptr<Trainable>> owned;
  std::map<std::string, const SluModel*> models;
  for (const auto& [name, path] : paths) {
    if (path.empty()) continue;
    owned[name] = load_model(path);
    models[name] = dynamic_cast<const SluModel*>(owned[name].get());
    if (!models[name]) throw ConfigError(path + " is not an SLU model");
  }
  const auto test = load_split(data_dir, "test", inv);
  const auto hard = load_split(data_dir, "hard", inv);
  const BenchTable table = benchmark_interfaces(models, test, hard, inv.vocab, repeats);
  std::printf("%s", table.format().c_str());
  if (token_cost) {
    const TokenCost c = per_token_interface_cost();
    std::printf("per-token cost at V=%zu d=%zu: gumbel %.1f ns, matmul %.1f ns, topk %.1f ns\n",
                c.vocab, c.dim, c.gumbel_ns, c.matmul_ns, c.topk_ns);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end spoken language understanding toolkit"};
  app.require_subcommand(1);

  Common common;
  fs::path out, data_dir;

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus");
  add_common(gen, common);
  gen->add_option("--out", out, "output directory")->required();

  fs::path inventory, pool, train_file, dev_file;
  auto* hard = app.add_subcommand("split-hard", "filter a pool down to unseen-bigram utterances");
  hard->add_option("--inventory", inventory, "directory with vocab/intents/slots")->required();
  hard->add_option("--pool", pool)->required()->check(CLI::ExistingFile);
  hard->add_option("--train", train_file)->required()->check(CLI::ExistingFile);
  hard->add_option("--dev", dev_file)->required()->check(CLI::ExistingFile);
  hard->add_option("--out", out)->required();

  std::vector<std::string> files;
  std::size_t n_max = 3;
  auto* cx = app.add_subcommand("complexity", "n-gram entropy of datasets");
  cx->add_option("--inventory", inventory)->required();
  cx->add_option("files", files, "JSONL datasets")->required()->check(CLI::ExistingFile);
  cx->add_option("--n", n_max, "largest n-gram order");

  auto* pre = app.add_subcommand("pretrain-ac", "train the acoustic model on transcripts");
  add_common(pre, common);
  pre->add_option("--data", data_dir)->required();
  pre->add_option("--out", out)->required();

  std::string pretrained;
  auto* tr = app.add_subcommand("train", "train the multistage model end to end");
  add_common(tr, common);
  tr->add_option("--data", data_dir)->required();
  tr->add_option("--out", out)->required();
  tr->add_option("--pretrained", pretrained, "acoustic checkpoint")->check(CLI::ExistingFile);

  auto* trb = app.add_subcommand("train-baseline", "train the multitask baseline");
  add_common(trb, common);
  trb->add_option("--data", data_dir)->required();
  trb->add_option("--out", out)->required();

  fs::path model_path;
  std::string split = "test", report;
  bool oracle = false;
  auto* ev = app.add_subcommand("eval", "score a model");
  ev->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data_dir)->required();
  ev->add_option("--split", split, "split name (test, dev, hard)");
  ev->add_flag("--oracle", oracle, "feed gold transcripts to the understanding stage");
  ev->add_option("--report", report, "write the JSON report here");

  std::map<std::string, std::string> bench_paths = {{"matmul", ""}, {"topk", ""}, {"gumbel", ""}};
  std::size_t repeats = 5;
  bool token_cost = false;
  auto* be = app.add_subcommand("bench-ifaces", "compare interfaces against matmul");
  be->add_option("--matmul", bench_paths["matmul"])->required()->check(CLI::ExistingFile);
  be->add_option("--topk", bench_paths["topk"])->required()->check(CLI::ExistingFile);
  be->add_option("--gumbel", bench_paths["gumbel"])->required()->check(CLI::ExistingFile);
  be->add_option("--data", data_dir)->required();
  be->add_option("--repeats", repeats);
  be->add_flag("--token-cost", token_cost, "also time the interfaces per token at V=16384");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return gen_data(common, out);
    if (*hard) return split_hard(inventory, pool, train_file, dev_file, out);
    if (*cx) return complexity(inventory, files, n_max);
    if (*pre) return pretrain(common, data_dir, out);
    if (*tr) return train(common, data_dir, out, false, pretrained);
    if (*trb) return train(common, data_dir, out, true, "");
    if (*ev) return eval(model_path, data_dir, split, oracle, report);
    if (*be) return bench(bench_paths, data_dir, repeats, token_cost);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
