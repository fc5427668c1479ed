#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "ieqa/score_codec.hpp"
#include "ieqa/vocab.hpp"

namespace ieqa {

// Probabilities over the ten digits at one position, renormalized over the
// digit tokens only (pattern-token mass is discarded at digit positions).
using DigitDistribution = std::array<double, 10>;

// Zero to three already-decided digits fed back into the trunk as one-hot
// groups. Teacher forcing supplies ground-truth digits, decoding supplies
// generated ones.
struct PrefixDigits {
  std::array<int, 3> digit{0, 0, 0};
  int count = 0;

  static PrefixDigits none() { return {}; }
  static PrefixDigits of(std::initializer_list<int> ds) {
    PrefixDigits p;
    for (int d : ds) p.digit[static_cast<std::size_t>(p.count++)] = d;
    return p;
  }
};

// One-hidden-layer tanh trunk with a linear head per predicted sequence
// position. Stands in for the MLLM stack while keeping the per-position
// vocabulary-logit interface (and hand-derivable gradients).
struct ScorerParams {
  int embed_dim = 64;    // E
  int feature_dim = 16;  // F
  int hidden_dim = 32;   // H
  std::uint64_t seed = 0;
  Dimension dimension = Dimension::visual;
  ScoreRange range;
  std::string definition;  // metric definition the scorer was trained with

  // Trunk: hidden_dim x input_dim row-major + bias.
  std::vector<double> w1;
  std::vector<double> b1;
  // Heads: vocab x hidden row-major + bias, one per predicted position.
  std::array<std::vector<double>, TargetTemplate::kPredicted> w_out;
  std::array<std::vector<double>, TargetTemplate::kPredicted> b_out;

  // prompt embedding + features + three 10-slot prefix one-hot groups
  int input_dim() const { return embed_dim + feature_dim + 30; }
};

// Uniform init in +-0.5/sqrt(fan_in), drawn from a single splitmix64 stream
// in a fixed order (w1, b1, then w_out[p], b_out[p] for p = 0..6).
ScorerParams init_params(int embed_dim, int feature_dim, int hidden_dim,
                         std::uint64_t seed);

using Logits =
    std::array<std::array<double, tok::kVocabSize>, TargetTemplate::kPredicted>;

// Trunk activation under one prefix conditioning.
std::vector<double> trunk_hidden(const ScorerParams& p,
                                 const std::vector<double>& prompt,
                                 const std::vector<double>& features,
                                 const PrefixDigits& prefix);

std::array<double, tok::kVocabSize> head_logits(const ScorerParams& p, int head,
                                                const std::vector<double>& hidden);

// All seven heads under a single prefix conditioning. Throws
// std::invalid_argument on dimension mismatch.
Logits forward_logits(const ScorerParams& p, const std::vector<double>& prompt,
                      const std::vector<double>& features,
                      const PrefixDigits& prefix);

// Softmax over the ten digit logits of one head.
DigitDistribution digit_distribution_from_logits(
    const std::array<double, tok::kVocabSize>& logits);

// Teacher-forced digit distributions: position t is conditioned on the
// ground-truth prefix g_<t, never on g_t or later digits.
std::array<DigitDistribution, 3> digit_distributions(
    const ScorerParams& p, const std::vector<double>& prompt,
    const std::vector<double>& features, const DigitTriple& g);

enum class DecodeMode { greedy, expected };
DecodeMode decode_mode_from_label(std::string_view label);
std::string_view to_label(DecodeMode mode);

// Greedy: argmax digit per position (ties toward the lowest digit), feeding
// generated digits forward; the triple is the score. Expected: per-position
// digit expectation under the same generated-prefix conditioning, combined,
// clamped to the configured range and quantized to the two-decimal grid.
Score decode_score(const ScorerParams& p, const std::vector<double>& prompt,
                   const std::vector<double>& features, DecodeMode mode);

// Versioned JSON checkpoint; layout documented in the README.
void save_checkpoint(const ScorerParams& p, const std::filesystem::path& path);
ScorerParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ieqa
