#include "ieqa/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "ieqa/eval_metrics.hpp"
#include "ieqa/prompt_embed.hpp"
#include "ieqa/rng.hpp"

namespace ieqa {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr std::uint64_t kShuffleTag = 0x7a3d;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// head index -> digit position t, or -1 for a pattern head
constexpr std::array<int, TargetTemplate::kPredicted> head_digit_position() {
  std::array<int, TargetTemplate::kPredicted> map{};
  for (int& m : map) m = -1;
  for (int t = 0; t < 3; ++t)
    map[static_cast<std::size_t>(TargetTemplate::kDigitHead[static_cast<std::size_t>(t)])] = t;
  return map;
}

// head index -> ground-truth pattern token, or -1 for a digit head
constexpr std::array<int, TargetTemplate::kPredicted> head_pattern_target() {
  std::array<int, TargetTemplate::kPredicted> map{};
  for (int& m : map) m = -1;
  for (std::size_t i = 0; i < TargetTemplate::kPatternHead.size(); ++i)
    map[static_cast<std::size_t>(TargetTemplate::kPatternHead[i])] =
        TargetTemplate::kPatternToken[i];
  return map;
}

constexpr auto kHeadDigitPos = head_digit_position();
constexpr auto kHeadPatternTarget = head_pattern_target();

double logsumexp(const std::array<double, tok::kVocabSize>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

std::vector<double> build_input(const ScorerParams& params,
                                const std::vector<double>& prompt,
                                const std::vector<double>& features,
                                const PrefixDigits& prefix) {
  std::vector<double> x(static_cast<std::size_t>(params.input_dim()), 0.0);
  std::copy(prompt.begin(), prompt.end(), x.begin());
  std::copy(features.begin(), features.end(),
            x.begin() + static_cast<std::ptrdiff_t>(prompt.size()));
  const std::size_t base = prompt.size() + features.size();
  for (int t = 0; t < prefix.count; ++t)
    x[base + static_cast<std::size_t>(10 * t + prefix.digit[static_cast<std::size_t>(t)])] = 1.0;
  return x;
}

}  // namespace

LossKind loss_from_label(std::string_view label) {
  if (label == "tdrl") return LossKind::tdrl;
  if (label == "ce-only") return LossKind::ce_only;
  throw std::invalid_argument("unknown loss kind: " + std::string(label));
}

std::string_view to_label(LossKind kind) {
  return kind == LossKind::tdrl ? "tdrl" : "ce-only";
}

double lr_at(int step, int total_steps, const TrainConfig& config) {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
  if (step < 0 || step >= total_steps)
    throw std::invalid_argument("step outside [0, total_steps)");
  if (config.warmup_ratio < 0.0 || config.warmup_ratio >= 0.5)
    throw std::invalid_argument("warmup_ratio must lie in [0, 0.5)");

  const int warmup =
      static_cast<int>(std::ceil(config.warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup)
    return config.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(warmup);

  // Cosine decay hits zero exactly on the final step.
  const int span = total_steps - 1 - warmup;
  const double progress =
      span <= 0 ? 1.0 : static_cast<double>(step - warmup) / static_cast<double>(span);
  return config.learning_rate * 0.5 * (1.0 + std::cos(progress * M_PI));
}

// --------------------------------------------------------------------------
// gradient storage
// --------------------------------------------------------------------------

GradTensors GradTensors::zeros_like(const ScorerParams& p) {
  GradTensors g;
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.b1.size(), 0.0);
  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    g.w_out[static_cast<std::size_t>(head)].assign(
        p.w_out[static_cast<std::size_t>(head)].size(), 0.0);
    g.b_out[static_cast<std::size_t>(head)].assign(
        p.b_out[static_cast<std::size_t>(head)].size(), 0.0);
  }
  return g;
}

void GradTensors::zero() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  for (auto& w : w_out) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : b_out) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  if (dst.size() != src.size())
    throw std::invalid_argument("gradient tensor size mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void GradTensors::add(const GradTensors& other) {
  add_into(w1, other.w1);
  add_into(b1, other.b1);
  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    add_into(w_out[static_cast<std::size_t>(head)], other.w_out[static_cast<std::size_t>(head)]);
    add_into(b_out[static_cast<std::size_t>(head)], other.b_out[static_cast<std::size_t>(head)]);
  }
}

void GradTensors::scale(double s) {
  for (double& v : w1) v *= s;
  for (double& v : b1) v *= s;
  for (auto& w : w_out)
    for (double& v : w) v *= s;
  for (auto& b : b_out)
    for (double& v : b) v *= s;
}

namespace {

template <typename T>
std::vector<std::span<double>> views_of(T& t) {
  std::vector<std::span<double>> views;
  views.reserve(2 + 2 * TargetTemplate::kPredicted);
  views.emplace_back(t.w1);
  views.emplace_back(t.b1);
  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    views.emplace_back(t.w_out[static_cast<std::size_t>(head)]);
    views.emplace_back(t.b_out[static_cast<std::size_t>(head)]);
  }
  return views;
}

}  // namespace

std::vector<std::span<double>> tensor_views(ScorerParams& p) { return views_of(p); }
std::vector<std::span<double>> tensor_views(GradTensors& g) { return views_of(g); }

// --------------------------------------------------------------------------
// per-sample loss and gradient
// --------------------------------------------------------------------------

SampleLoss sample_loss_grad(const ScorerParams& params,
                            const std::vector<double>& prompt,
                            const std::vector<double>& features,
                            const DigitTriple& g, LossKind loss,
                            bool ce_includes_digits, GradTensors& grad) {
  if (!valid_triple(g)) throw std::invalid_argument("invalid ground-truth triple");

  // Four distinct trunk conditionings: prefixes of length 0..3.
  const std::array<PrefixDigits, 4> prefixes{
      PrefixDigits::none(), PrefixDigits::of({g.d0}), PrefixDigits::of({g.d0, g.d1}),
      PrefixDigits::of({g.d0, g.d1, g.d2})};
  std::array<std::vector<double>, 4> x;
  std::array<std::vector<double>, 4> hidden;
  for (int c = 0; c < 4; ++c) {
    x[static_cast<std::size_t>(c)] = build_input(params, prompt, features,
                                                 prefixes[static_cast<std::size_t>(c)]);
    hidden[static_cast<std::size_t>(c)] =
        trunk_hidden(params, prompt, features, prefixes[static_cast<std::size_t>(c)]);
  }

  const std::array<int, 3> g_digits{g.d0, g.d1, g.d2};
  std::array<double, 4> pattern_logprobs{};
  std::size_t pattern_seen = 0;
  std::array<DigitDistribution, 3> dists{};
  double digit_ce = 0.0;  // full-vocab CE at the digit heads, when requested

  const std::size_t h = static_cast<std::size_t>(params.hidden_dim);
  const std::size_t d = static_cast<std::size_t>(params.input_dim());
  std::array<std::vector<double>, 4> dh;
  for (auto& v : dh) v.assign(h, 0.0);

  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    const int c = TargetTemplate::kPrefixDigits[static_cast<std::size_t>(head)];
    const auto& hvec = hidden[static_cast<std::size_t>(c)];
    const std::array<double, tok::kVocabSize> z = head_logits(params, head, hvec);

    std::array<double, tok::kVocabSize> dz{};
    const int t = kHeadDigitPos[static_cast<std::size_t>(head)];
    if (t < 0) {
      // Pattern head: full-vocabulary cross-entropy against the template token.
      const int target = kHeadPatternTarget[static_cast<std::size_t>(head)];
      const double lse = logsumexp(z);
      pattern_logprobs[pattern_seen++] = z[static_cast<std::size_t>(target)] - lse;
      for (int v = 0; v < tok::kVocabSize; ++v)
        dz[static_cast<std::size_t>(v)] = std::exp(z[static_cast<std::size_t>(v)] - lse);
      dz[static_cast<std::size_t>(target)] -= 1.0;
    } else {
      const DigitDistribution dist = digit_distribution_from_logits(z);
      dists[static_cast<std::size_t>(t)] = dist;
      const int gt = g_digits[static_cast<std::size_t>(t)];

      const bool want_distance = loss == LossKind::tdrl;
      const bool want_digit_ce = loss == LossKind::ce_only || ce_includes_digits;
      if (want_distance) {
        // d l_score / d z_k = 10^-t * p_k * (|k - g_t| - E[|j - g_t|]), with
        // zero gradient on the pattern-token logits (they never enter p).
        double expected = 0.0;
        for (int k = 0; k < 10; ++k)
          expected += dist[static_cast<std::size_t>(k)] * std::abs(k - gt);
        for (int k = 0; k < 10; ++k)
          dz[static_cast<std::size_t>(tok::digit_token(k))] +=
              kPositionWeight[static_cast<std::size_t>(t)] *
              dist[static_cast<std::size_t>(k)] * (std::abs(k - gt) - expected);
      }
      if (want_digit_ce) {
        const int target = tok::digit_token(gt);
        const double lse = logsumexp(z);
        digit_ce += lse - z[static_cast<std::size_t>(target)];
        for (int v = 0; v < tok::kVocabSize; ++v)
          dz[static_cast<std::size_t>(v)] += std::exp(z[static_cast<std::size_t>(v)] - lse);
        dz[static_cast<std::size_t>(target)] -= 1.0;
      }
    }

    // Head parameters and the shared hidden activation.
    auto& gw = grad.w_out[static_cast<std::size_t>(head)];
    auto& gb = grad.b_out[static_cast<std::size_t>(head)];
    const auto& w = params.w_out[static_cast<std::size_t>(head)];
    auto& dhc = dh[static_cast<std::size_t>(c)];
    for (int v = 0; v < tok::kVocabSize; ++v) {
      const double gz = dz[static_cast<std::size_t>(v)];
      if (gz == 0.0) continue;
      const std::size_t row = static_cast<std::size_t>(v) * h;
      for (std::size_t j = 0; j < h; ++j) {
        gw[row + j] += gz * hvec[j];
        dhc[j] += w[row + j] * gz;
      }
      gb[static_cast<std::size_t>(v)] += gz;
    }
  }

  // Trunk backprop, one conditioning at a time in fixed order.
  for (int c = 0; c < 4; ++c) {
    const auto& hvec = hidden[static_cast<std::size_t>(c)];
    const auto& xc = x[static_cast<std::size_t>(c)];
    const auto& dhc = dh[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < h; ++i) {
      const double da = dhc[i] * (1.0 - hvec[i] * hvec[i]);
      if (da == 0.0) continue;
      double* row = grad.w1.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += da * xc[j];
      grad.b1[i] += da;
    }
  }

  SampleLoss result;
  result.breakdown = l_tdrl(pattern_logprobs, dists, g);
  switch (loss) {
    case LossKind::tdrl:
      result.objective = result.breakdown.l_tdrl + (ce_includes_digits ? digit_ce : 0.0);
      break;
    case LossKind::ce_only:
      result.objective = result.breakdown.l_ce + digit_ce;
      break;
  }
  return result;
}

// --------------------------------------------------------------------------
// batch loss
// --------------------------------------------------------------------------

namespace {

// Both execution paths materialize each sample's gradient separately and add
// whole per-sample tensors in index order, so the floating-point addend
// grouping is identical and the results match bitwise.
BatchLoss reduce_batch(const ScorerParams& params, std::span<const SampleRecord> samples,
                       std::span<const std::size_t> indices, const TrainConfig& config,
                       std::vector<GradTensors>& slots, std::vector<SampleLoss>& losses) {
  BatchLoss batch;
  batch.grad = GradTensors::zeros_like(params);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    batch.grad.add(slots[i]);
    const TdrlBreakdown& b = losses[i].breakdown;
    batch.stats.l_tdrl += b.l_tdrl;
    batch.stats.l_ce += b.l_ce;
    batch.stats.l_score += b.l_score;
    batch.stats.objective += losses[i].objective;
  }
  (void)samples;
  (void)config;
  const double inv = 1.0 / static_cast<double>(indices.size());
  batch.grad.scale(inv);
  batch.stats.l_ce *= inv;
  batch.stats.l_score *= inv;
  batch.stats.objective *= inv;
  // Rebuilt from the scaled parts so the decomposition holds exactly at
  // every reporting level, not merely per sample.
  batch.stats.l_tdrl = batch.stats.l_ce + batch.stats.l_score;
  return batch;
}

}  // namespace

BatchLoss batch_loss_grad(const ScorerParams& params, const std::vector<double>& prompt,
                          std::span<const SampleRecord> samples,
                          std::span<const std::size_t> indices,
                          const TrainConfig& config, Exec exec) {
  if (indices.empty()) throw std::invalid_argument("empty batch");
  std::vector<GradTensors> slots(indices.size());
  std::vector<SampleLoss> losses(indices.size());
  for_each_index(indices.size(), exec, [&](std::size_t i) {
    const SampleRecord& rec = samples[indices[i]];
    slots[i] = GradTensors::zeros_like(params);
    losses[i] = sample_loss_grad(params, prompt, rec.features,
                                 quantize_to_triple(rec.mos(config.dimension)), config.loss,
                                 config.ce_includes_digits, slots[i]);
  });
  return reduce_batch(params, samples, indices, config, slots, losses);
}

BatchLoss batch_loss_grad_serial(const ScorerParams& params,
                                 const std::vector<double>& prompt,
                                 std::span<const SampleRecord> samples,
                                 std::span<const std::size_t> indices,
                                 const TrainConfig& config) {
  if (indices.empty()) throw std::invalid_argument("empty batch");
  std::vector<GradTensors> slots(indices.size());
  std::vector<SampleLoss> losses(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const SampleRecord& rec = samples[indices[i]];
    slots[i] = GradTensors::zeros_like(params);
    losses[i] = sample_loss_grad(params, prompt, rec.features,
                                 quantize_to_triple(rec.mos(config.dimension)), config.loss,
                                 config.ce_includes_digits, slots[i]);
  }
  return reduce_batch(params, samples, indices, config, slots, losses);
}

// --------------------------------------------------------------------------
// training loop
// --------------------------------------------------------------------------

namespace {

void fisher_yates(std::vector<std::size_t>& order, SplitMix64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(order[i - 1], order[j]);
  }
}

HeldoutStats heldout_stats(const ScorerParams& params,
                           const std::vector<SampleRecord>& heldout,
                           Dimension dimension, Exec exec) {
  HeldoutStats stats{kNan, kNan, kNan};
  if (heldout.empty()) return stats;
  const std::vector<double> preds =
      predict_scores(params, heldout, DecodeMode::expected, exec);
  std::vector<double> labels(heldout.size());
  double mae = 0.0;
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    labels[i] = heldout[i].mos(dimension);
    mae += std::abs(preds[i] - labels[i]);
  }
  stats.mae = mae / static_cast<double>(heldout.size());
  try {
    stats.srcc = srcc(preds, labels);
    stats.plcc = plcc(preds, labels);
  } catch (const degenerate_error&) {
    // constant predictions (or labels); leave the correlations as NaN
  }
  return stats;
}

}  // namespace

std::pair<ScorerParams, TrainReport> train(const std::vector<SampleRecord>& train_set,
                                           const std::vector<SampleRecord>& heldout,
                                           std::string_view definition,
                                           const TrainConfig& config, Exec exec,
                                           bool progress) {
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  if (config.epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (config.batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (!valid_range(config.range)) throw std::invalid_argument("invalid score range");
  if (definition.empty()) throw std::invalid_argument("empty metric definition");

  const auto start = std::chrono::steady_clock::now();

  const int feature_dim = static_cast<int>(train_set.front().features.size());
  ScorerParams params;
  if (config.init_checkpoint.empty()) {
    params = init_params(config.embed_dim, feature_dim, config.hidden_dim,
                         config.seed);
  } else {
    params = load_checkpoint(config.init_checkpoint);
    if (params.embed_dim != config.embed_dim ||
        params.hidden_dim != config.hidden_dim ||
        params.feature_dim != feature_dim)
      throw std::invalid_argument(
          "init checkpoint dims (embed=" + std::to_string(params.embed_dim) +
          ", hidden=" + std::to_string(params.hidden_dim) +
          ", feature=" + std::to_string(params.feature_dim) +
          ") do not match the requested configuration");
  }
  params.dimension = config.dimension;
  params.range = config.range;
  params.definition = std::string(definition);

  const std::vector<double> prompt =
      embed_prompt(params.definition, config.embed_dim);

  const std::size_t n = train_set.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const int steps_per_epoch = static_cast<int>((n + batch - 1) / batch);
  const int total_steps = config.epochs * steps_per_epoch;

  GradTensors m = GradTensors::zeros_like(params);
  GradTensors v = GradTensors::zeros_like(params);
  const auto param_views = tensor_views(params);
  const auto m_views = tensor_views(m);
  const auto v_views = tensor_views(v);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.epochs.reserve(static_cast<std::size_t>(config.epochs));
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    SplitMix64 rng(derive_seed(config.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    fisher_yates(order, rng);

    EpochStats epoch_stats;
    for (std::size_t begin = 0; begin < n; begin += batch, ++step) {
      const std::size_t end = std::min(n, begin + batch);
      const std::span<const std::size_t> indices(order.data() + begin, end - begin);
      const BatchLoss bl = batch_loss_grad(params, prompt, train_set, indices, config, exec);
      if (!std::isfinite(bl.stats.objective))
        throw std::runtime_error("non-finite training loss at epoch " +
                                 std::to_string(epoch) + ", step " + std::to_string(step));

      const double count = static_cast<double>(indices.size());
      epoch_stats.l_ce += bl.stats.l_ce * count;
      epoch_stats.l_score += bl.stats.l_score * count;
      epoch_stats.objective += bl.stats.objective * count;

      const double lr = lr_at(step, total_steps, config);
      const double t = static_cast<double>(step + 1);
      const double bias1 = 1.0 - std::pow(kAdamBeta1, t);
      const double bias2 = 1.0 - std::pow(kAdamBeta2, t);
      GradTensors grad = bl.grad;  // non-const views
      const auto grad_views = tensor_views(grad);
      for (std::size_t tv = 0; tv < param_views.size(); ++tv) {
        std::span<double> p = param_views[tv];
        std::span<double> gm = m_views[tv];
        std::span<double> gv = v_views[tv];
        std::span<const double> gg = grad_views[tv];
        for (std::size_t i = 0; i < p.size(); ++i) {
          gm[i] = kAdamBeta1 * gm[i] + (1.0 - kAdamBeta1) * gg[i];
          gv[i] = kAdamBeta2 * gv[i] + (1.0 - kAdamBeta2) * gg[i] * gg[i];
          const double mhat = gm[i] / bias1;
          const double vhat = gv[i] / bias2;
          p[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
        }
      }
    }

    const double inv = 1.0 / static_cast<double>(n);
    epoch_stats.l_ce *= inv;
    epoch_stats.l_score *= inv;
    epoch_stats.objective *= inv;
    epoch_stats.l_tdrl = epoch_stats.l_ce + epoch_stats.l_score;
    report.epochs.push_back(epoch_stats);
    if (progress) {
      std::fprintf(stderr, "epoch %d/%d  objective=%.6f  l_ce=%.6f  l_score=%.6f\n",
                   epoch + 1, config.epochs, epoch_stats.objective, epoch_stats.l_ce,
                   epoch_stats.l_score);
      std::fflush(stderr);
    }
  }

  report.heldout = heldout_stats(params, heldout, config.dimension, exec);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(params), std::move(report)};
}

// --------------------------------------------------------------------------
// prediction
// --------------------------------------------------------------------------

std::vector<double> predict_scores(const ScorerParams& params,
                                   const std::vector<SampleRecord>& samples,
                                   DecodeMode mode, Exec exec) {
  const std::vector<double> prompt = embed_prompt(params.definition, params.embed_dim);
  std::vector<double> out(samples.size(), 0.0);
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    out[i] = decode_score(params, prompt, samples[i].features, mode).value;
  });
  return out;
}

std::vector<double> predict_scores_serial(const ScorerParams& params,
                                          const std::vector<SampleRecord>& samples,
                                          DecodeMode mode) {
  const std::vector<double> prompt = embed_prompt(params.definition, params.embed_dim);
  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i)
    out[i] = decode_score(params, prompt, samples[i].features, mode).value;
  return out;
}

std::vector<double> ensemble_average(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("ensemble inputs differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

// --------------------------------------------------------------------------
// reporting
// --------------------------------------------------------------------------

std::string report_to_json(const TrainReport& report, const TrainConfig& config) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  cfg["loss"] = std::string(to_label(config.loss));
  cfg["epochs"] = config.epochs;
  cfg["batch_size"] = config.batch_size;
  cfg["learning_rate"] = config.learning_rate;
  cfg["warmup_ratio"] = config.warmup_ratio;
  cfg["seed"] = config.seed;
  cfg["dimension"] = std::string(to_label(config.dimension));
  cfg["ce_includes_digits"] = config.ce_includes_digits;
  cfg["embed_dim"] = config.embed_dim;
  cfg["hidden_dim"] = config.hidden_dim;
  cfg["init_checkpoint"] = config.init_checkpoint;
  cfg["score_lo"] = config.range.lo;
  cfg["score_hi"] = config.range.hi;
  j["config"] = std::move(cfg);

  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const EpochStats& e : report.epochs) {
    epochs.push_back({{"l_tdrl", e.l_tdrl},
                      {"l_ce", e.l_ce},
                      {"l_score", e.l_score},
                      {"objective", e.objective}});
  }
  j["epochs"] = std::move(epochs);
  // NaN serializes to null, which marks "not evaluated" in the report.
  j["heldout"] = {{"mae", report.heldout.mae},
                  {"srcc", report.heldout.srcc},
                  {"plcc", report.heldout.plcc}};
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2);
}

void write_report(const TrainReport& report, const TrainConfig& config,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report for writing: " + path.string());
  out << report_to_json(report, config) << '\n';
  if (!out) throw std::runtime_error("failed writing report: " + path.string());
}

}  // namespace ieqa
