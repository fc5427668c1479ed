#include "ieqa/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "ieqa/prompt_embed.hpp"
#include "ieqa/rng.hpp"

namespace ieqa {

namespace {

void fill_uniform(std::vector<double>& v, SplitMix64& rng, double bound) {
  for (double& x : v) x = rng.uniform(-bound, bound);
}

void check_finite_vec(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string("non-finite value in ") + what);
  }
}

}  // namespace

ScorerParams init_params(int embed_dim, int feature_dim, int hidden_dim,
                         std::uint64_t seed) {
  if (embed_dim <= 0 || feature_dim <= 0 || hidden_dim <= 0)
    throw std::invalid_argument("scorer dimensions must be positive");
  ScorerParams p;
  p.embed_dim = embed_dim;
  p.feature_dim = feature_dim;
  p.hidden_dim = hidden_dim;
  p.seed = seed;

  const std::size_t d = static_cast<std::size_t>(p.input_dim());
  const std::size_t h = static_cast<std::size_t>(hidden_dim);
  p.w1.resize(h * d);
  p.b1.resize(h);
  const double trunk_bound = 0.5 / std::sqrt(static_cast<double>(d));
  const double head_bound = 0.5 / std::sqrt(static_cast<double>(h));

  SplitMix64 rng(derive_seed(seed, /*tag=*/0x1e17));
  fill_uniform(p.w1, rng, trunk_bound);
  fill_uniform(p.b1, rng, trunk_bound);
  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    auto& w = p.w_out[static_cast<std::size_t>(head)];
    auto& b = p.b_out[static_cast<std::size_t>(head)];
    w.resize(static_cast<std::size_t>(tok::kVocabSize) * h);
    b.resize(static_cast<std::size_t>(tok::kVocabSize));
    fill_uniform(w, rng, head_bound);
    fill_uniform(b, rng, head_bound);
  }
  return p;
}

std::vector<double> trunk_hidden(const ScorerParams& p,
                                 const std::vector<double>& prompt,
                                 const std::vector<double>& features,
                                 const PrefixDigits& prefix) {
  if (static_cast<int>(prompt.size()) != p.embed_dim)
    throw std::invalid_argument("prompt embedding size mismatch");
  if (static_cast<int>(features.size()) != p.feature_dim)
    throw std::invalid_argument("feature vector size mismatch");
  if (prefix.count < 0 || prefix.count > 3)
    throw std::invalid_argument("prefix may hold at most three digits");
  check_finite_vec(prompt, "prompt embedding");
  check_finite_vec(features, "feature vector");

  const std::size_t d = static_cast<std::size_t>(p.input_dim());
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  if (p.w1.size() != h * d || p.b1.size() != h)
    throw std::invalid_argument("trunk weight shape mismatch");

  std::vector<double> x(d, 0.0);
  std::copy(prompt.begin(), prompt.end(), x.begin());
  std::copy(features.begin(), features.end(),
            x.begin() + static_cast<std::ptrdiff_t>(prompt.size()));
  const std::size_t onehot_base = prompt.size() + features.size();
  for (int t = 0; t < prefix.count; ++t) {
    const int digit = prefix.digit[static_cast<std::size_t>(t)];
    if (digit < 0 || digit > 9)
      throw std::invalid_argument("prefix digit outside 0..9");
    x[onehot_base + static_cast<std::size_t>(10 * t + digit)] = 1.0;
  }

  std::vector<double> hidden(h);
  for (std::size_t i = 0; i < h; ++i) {
    double acc = p.b1[i];
    const double* row = p.w1.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
    hidden[i] = std::tanh(acc);
  }
  return hidden;
}

std::array<double, tok::kVocabSize> head_logits(const ScorerParams& p, int head,
                                                const std::vector<double>& hidden) {
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  const auto& w = p.w_out[static_cast<std::size_t>(head)];
  const auto& b = p.b_out[static_cast<std::size_t>(head)];
  if (w.size() != static_cast<std::size_t>(tok::kVocabSize) * h ||
      b.size() != static_cast<std::size_t>(tok::kVocabSize))
    throw std::invalid_argument("head weight shape mismatch");
  std::array<double, tok::kVocabSize> logits{};
  for (int v = 0; v < tok::kVocabSize; ++v) {
    double acc = b[static_cast<std::size_t>(v)];
    const double* row = w.data() + static_cast<std::size_t>(v) * h;
    for (std::size_t j = 0; j < h; ++j) acc += row[j] * hidden[j];
    logits[static_cast<std::size_t>(v)] = acc;
  }
  return logits;
}

Logits forward_logits(const ScorerParams& p, const std::vector<double>& prompt,
                      const std::vector<double>& features,
                      const PrefixDigits& prefix) {
  const std::vector<double> hidden = trunk_hidden(p, prompt, features, prefix);
  Logits logits;
  for (int head = 0; head < TargetTemplate::kPredicted; ++head)
    logits[static_cast<std::size_t>(head)] = head_logits(p, head, hidden);
  return logits;
}

DigitDistribution digit_distribution_from_logits(
    const std::array<double, tok::kVocabSize>& logits) {
  DigitDistribution p{};
  double max_logit = logits[tok::kDigitBase];
  for (int k = 1; k < 10; ++k)
    max_logit = std::max(max_logit, logits[static_cast<std::size_t>(tok::kDigitBase + k)]);
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double e =
        std::exp(logits[static_cast<std::size_t>(tok::kDigitBase + k)] - max_logit);
    p[static_cast<std::size_t>(k)] = e;
    sum += e;
  }
  for (double& q : p) q /= sum;
  return p;
}

namespace {

// Distribution of digit position t conditioned on the given prefix digits.
DigitDistribution digit_dist_at(const ScorerParams& params,
                                const std::vector<double>& prompt,
                                const std::vector<double>& features, int t,
                                const PrefixDigits& prefix) {
  const std::vector<double> hidden = trunk_hidden(params, prompt, features, prefix);
  const int head = TargetTemplate::kDigitHead[static_cast<std::size_t>(t)];
  return digit_distribution_from_logits(head_logits(params, head, hidden));
}

int argmax_digit(const DigitDistribution& dist) {
  int best = 0;
  for (int k = 1; k < 10; ++k) {
    // strict > breaks ties toward the lowest digit
    if (dist[static_cast<std::size_t>(k)] > dist[static_cast<std::size_t>(best)])
      best = k;
  }
  return best;
}

}  // namespace

std::array<DigitDistribution, 3> digit_distributions(
    const ScorerParams& p, const std::vector<double>& prompt,
    const std::vector<double>& features, const DigitTriple& g) {
  if (!valid_triple(g)) throw std::invalid_argument("invalid ground-truth triple");
  std::array<DigitDistribution, 3> dists;
  dists[0] = digit_dist_at(p, prompt, features, 0, PrefixDigits::none());
  dists[1] = digit_dist_at(p, prompt, features, 1, PrefixDigits::of({g.d0}));
  dists[2] = digit_dist_at(p, prompt, features, 2, PrefixDigits::of({g.d0, g.d1}));
  return dists;
}

DecodeMode decode_mode_from_label(std::string_view label) {
  if (label == "greedy") return DecodeMode::greedy;
  if (label == "expected") return DecodeMode::expected;
  throw std::invalid_argument("unknown decode mode: " + std::string(label));
}

std::string_view to_label(DecodeMode mode) {
  return mode == DecodeMode::greedy ? "greedy" : "expected";
}

Score decode_score(const ScorerParams& p, const std::vector<double>& prompt,
                   const std::vector<double>& features, DecodeMode mode) {
  // Both modes walk the digit positions autoregressively on the greedy
  // digits; pattern tokens come from the template and play no role here.
  PrefixDigits prefix = PrefixDigits::none();
  std::array<DigitDistribution, 3> dists;
  DigitTriple greedy;
  int* slots[3] = {&greedy.d0, &greedy.d1, &greedy.d2};
  for (int t = 0; t < 3; ++t) {
    dists[static_cast<std::size_t>(t)] = digit_dist_at(p, prompt, features, t, prefix);
    const int d = argmax_digit(dists[static_cast<std::size_t>(t)]);
    *slots[t] = d;
    prefix.digit[static_cast<std::size_t>(prefix.count++)] = d;
  }

  Score score;
  score.dimension = p.dimension;
  if (mode == DecodeMode::greedy) {
    score.value = triple_value(greedy);
    return score;
  }

  // Expected: per-position digit expectation, assembled in hundredths so the
  // half-away rounding sees the exact scale.
  double scaled = 0.0;  // value * 100
  const double scale[3] = {100.0, 10.0, 1.0};
  for (int t = 0; t < 3; ++t) {
    double e = 0.0;
    for (int k = 0; k < 10; ++k)
      e += static_cast<double>(k) * dists[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    scaled += scale[t] * e;
  }
  scaled = std::clamp(scaled, p.range.lo * 100.0, p.range.hi * 100.0);
  score.value = triple_value(quantize_to_triple(scaled / 100.0));
  return score;
}

// --------------------------------------------------------------------------
// checkpoint io
// --------------------------------------------------------------------------

namespace {
constexpr const char* kCheckpointFormat = "ieqa-scorer";
constexpr int kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const ScorerParams& p, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed"] = p.seed;
  j["embed_dim"] = p.embed_dim;
  j["feature_dim"] = p.feature_dim;
  j["hidden_dim"] = p.hidden_dim;
  j["vocab_size"] = tok::kVocabSize;
  j["dimension"] = std::string(to_label(p.dimension));
  j["score_lo"] = p.range.lo;
  j["score_hi"] = p.range.hi;
  j["definition"] = p.definition;
  j["w1"] = p.w1;
  j["b1"] = p.b1;
  nlohmann::ordered_json w_out = nlohmann::ordered_json::array();
  nlohmann::ordered_json b_out = nlohmann::ordered_json::array();
  for (int head = 0; head < TargetTemplate::kPredicted; ++head) {
    w_out.push_back(p.w_out[static_cast<std::size_t>(head)]);
    b_out.push_back(p.b_out[static_cast<std::size_t>(head)]);
  }
  j["w_out"] = std::move(w_out);
  j["b_out"] = std::move(b_out);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

ScorerParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat)
    throw std::runtime_error("not a scorer checkpoint: " + path.string());
  if (j.value("version", -1) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path.string());

  ScorerParams p;
  p.seed = j.at("seed").get<std::uint64_t>();
  p.embed_dim = j.at("embed_dim").get<int>();
  p.feature_dim = j.at("feature_dim").get<int>();
  p.hidden_dim = j.at("hidden_dim").get<int>();
  if (j.at("vocab_size").get<int>() != tok::kVocabSize)
    throw std::runtime_error("checkpoint vocabulary size mismatch");
  p.dimension = dimension_from_label(j.at("dimension").get<std::string>());
  p.range.lo = j.at("score_lo").get<double>();
  p.range.hi = j.at("score_hi").get<double>();
  if (!valid_range(p.range))
    throw std::runtime_error("checkpoint carries an invalid score range");
  p.definition = j.at("definition").get<std::string>();
  p.w1 = j.at("w1").get<std::vector<double>>();
  p.b1 = j.at("b1").get<std::vector<double>>();
  const auto& w_out = j.at("w_out");
  const auto& b_out = j.at("b_out");
  if (w_out.size() != TargetTemplate::kPredicted ||
      b_out.size() != TargetTemplate::kPredicted)
    throw std::runtime_error("checkpoint head count mismatch");
  for (std::size_t head = 0; head < TargetTemplate::kPredicted; ++head) {
    p.w_out[head] = w_out[head].get<std::vector<double>>();
    p.b_out[head] = b_out[head].get<std::vector<double>>();
  }

  const std::size_t d = static_cast<std::size_t>(p.input_dim());
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  if (p.w1.size() != h * d || p.b1.size() != h)
    throw std::runtime_error("checkpoint trunk shape mismatch");
  for (std::size_t head = 0; head < TargetTemplate::kPredicted; ++head) {
    if (p.w_out[head].size() != static_cast<std::size_t>(tok::kVocabSize) * h ||
        p.b_out[head].size() != static_cast<std::size_t>(tok::kVocabSize))
      throw std::runtime_error("checkpoint head shape mismatch");
  }
  return p;
}

}  // namespace ieqa
