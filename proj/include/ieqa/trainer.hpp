#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ieqa/parallel.hpp"
#include "ieqa/scorer.hpp"
#include "ieqa/synth_data.hpp"
#include "ieqa/tdrl.hpp"

namespace ieqa {

enum class LossKind { tdrl, ce_only };
LossKind loss_from_label(std::string_view label);  // "tdrl" | "ce-only"
std::string_view to_label(LossKind kind);

struct TrainConfig {
  LossKind loss = LossKind::tdrl;
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 1e-4;
  double warmup_ratio = 0.03;  // in [0, 0.5)
  std::uint64_t seed = 0;
  Dimension dimension = Dimension::visual;
  // Also apply CE to digit positions on top of l_score (kept switchable for
  // the double-counting ablation).
  bool ce_includes_digits = false;
  int embed_dim = 64;
  int hidden_dim = 32;
  // Optional checkpoint to fine-tune from instead of a fresh seeded init.
  // Its embed/hidden/feature dims must match; optimizer state starts fresh.
  std::string init_checkpoint;
  ScoreRange range;
};

struct EpochStats {
  double l_tdrl = 0.0;
  double l_ce = 0.0;
  double l_score = 0.0;
  double objective = 0.0;  // what the optimizer actually minimized
};

struct HeldoutStats {
  double mae = 0.0;
  double srcc = 0.0;
  double plcc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  HeldoutStats heldout;
  double wall_seconds = 0.0;
};

// Linear ramp 0->base over ceil(warmup_ratio * total_steps) steps, then
// cosine decay to zero at the final step.
double lr_at(int step, int total_steps, const TrainConfig& config);

// Gradient (or Adam moment) storage shaped like the trainable arrays.
struct GradTensors {
  std::vector<double> w1;
  std::vector<double> b1;
  std::array<std::vector<double>, TargetTemplate::kPredicted> w_out;
  std::array<std::vector<double>, TargetTemplate::kPredicted> b_out;

  static GradTensors zeros_like(const ScorerParams& p);
  void zero();
  void add(const GradTensors& other);
  void scale(double s);
};

// Fixed-order views over all trainable arrays (w1, b1, w_out[p], b_out[p]);
// params and grads iterate in lockstep for the Adam update and FD checks.
std::vector<std::span<double>> tensor_views(ScorerParams& p);
std::vector<std::span<double>> tensor_views(GradTensors& g);

// Per-sample loss + gradient under teacher forcing. Returns the TDRL
// breakdown (always computed, whatever the objective) and accumulates the
// objective's gradient into grad.
struct SampleLoss {
  TdrlBreakdown breakdown;
  double objective = 0.0;
};
SampleLoss sample_loss_grad(const ScorerParams& params,
                            const std::vector<double>& prompt,
                            const std::vector<double>& features,
                            const DigitTriple& g, LossKind loss,
                            bool ce_includes_digits, GradTensors& grad);

// Mean loss and gradient over a batch; per-sample gradients land in slots
// and are reduced in sample order, so serial and parallel agree bitwise.
struct BatchLoss {
  EpochStats stats;  // batch means
  GradTensors grad;  // mean gradient
};
BatchLoss batch_loss_grad(const ScorerParams& params,
                          const std::vector<double>& prompt,
                          std::span<const SampleRecord> samples,
                          std::span<const std::size_t> indices,
                          const TrainConfig& config, Exec exec);
BatchLoss batch_loss_grad_serial(const ScorerParams& params,
                                 const std::vector<double>& prompt,
                                 std::span<const SampleRecord> samples,
                                 std::span<const std::size_t> indices,
                                 const TrainConfig& config);

// Seeded mini-batch Adam training of one dimension's scorer. The definition
// text conditions the model through its prompt embedding and is stored in
// the returned params. Throws std::runtime_error naming the batch index if
// the loss turns non-finite.
std::pair<ScorerParams, TrainReport> train(
    const std::vector<SampleRecord>& train_set,
    const std::vector<SampleRecord>& heldout, std::string_view definition,
    const TrainConfig& config, Exec exec = Exec::parallel,
    bool progress = false);

// Decoded score values for every sample (slot-parallel kernel).
std::vector<double> predict_scores(const ScorerParams& params,
                                   const std::vector<SampleRecord>& samples,
                                   DecodeMode mode, Exec exec = Exec::parallel);
std::vector<double> predict_scores_serial(const ScorerParams& params,
                                          const std::vector<SampleRecord>& samples,
                                          DecodeMode mode);

// Elementwise mean of two prediction lists. Throws std::invalid_argument on
// length mismatch.
std::vector<double> ensemble_average(std::span<const double> a,
                                     std::span<const double> b);

std::string report_to_json(const TrainReport& report, const TrainConfig& config);
void write_report(const TrainReport& report, const TrainConfig& config,
                  const std::filesystem::path& path);

}  // namespace ieqa
