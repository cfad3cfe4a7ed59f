#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "e2eslu/harness/models.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct InterfaceRow {
  std::string name;
  double ms_per_batch = 0;
  double icer = 0;
  double irer = 0;
  double h_irer = 0;
};

/// Rows in the order matmul, topk, gumbel; matmul is the reference row.
struct BenchTable {
  std::vector<InterfaceRow> rows;

  // Speed delta in ms and relative error-rate improvements in percent against
  // matmul: 3 rows x 4 columns, reference row shown as dashes.
  std::vector<std::vector<std::string>> delta_cells() const;
  std::string format() const;
  nlohmann::json to_json() const;
};

/// Median wall-clock of `predict` on the first `batch_size` test utterances
/// plus ICER/IRER on `test` and IRER on `hard`.
InterfaceRow measure_interface(const SluModel& model, std::span<const Utterance> test,
                               std::span<const Utterance> hard, const WordpieceVocab& vocab,
                               std::size_t repeats = 5, std::size_t batch_size = 32);

/// `models` maps interface names (matmul, topk, gumbel) to trained models;
/// a missing entry raises ConfigError.
BenchTable benchmark_interfaces(const std::map<std::string, const SluModel*>& models,
                                std::span<const Utterance> test, std::span<const Utterance> hard,
                                const WordpieceVocab& vocab, std::size_t repeats = 5);

struct TokenCost {
  std::size_t vocab = 0;
  std::size_t dim = 0;
  std::size_t tokens = 0;
  double gumbel_ns = 0;
  double matmul_ns = 0;
  double topk_ns = 0;
};

/// Inference-path interface cost per token on random logits [tokens, vocab]
/// and a random table [vocab, dim], median over `repeats`.
TokenCost per_token_interface_cost(std::size_t vocab = 16384, std::size_t dim = 64,
                                   std::size_t tokens = 256, std::size_t k = 20,
                                   std::size_t repeats = 9, std::uint64_t seed = 1);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
