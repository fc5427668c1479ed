#include "ieqa/defvalue.hpp"

#include <stdexcept>

#include "ieqa/prompt_embed.hpp"

namespace ieqa {

double v_d_single(double p0, double p1, double p2) {
  for (double p : {p0, p1, p2}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::domain_error("digit probability outside [0, 1]");
  }
  return p0 + p1 / 10.0 + p2 / 100.0;
}

namespace {

double v_d_of_sample(const VdSample& sample, const ScorerParams& params,
                     const std::vector<double>& prompt) {
  const auto dists = digit_distributions(params, prompt, sample.features, sample.label);
  return v_d_single(dists[0][static_cast<std::size_t>(sample.label.d0)],
                    dists[1][static_cast<std::size_t>(sample.label.d1)],
                    dists[2][static_cast<std::size_t>(sample.label.d2)]);
}

}  // namespace

DefinitionValue v_d_aggregate(const std::vector<VdSample>& samples,
                              const ScorerParams& params,
                              std::string_view definition, Exec exec) {
  if (samples.empty())
    throw std::domain_error("v_d_aggregate requires at least one sample");
  const std::vector<double> prompt = embed_prompt(definition, params.embed_dim);

  std::vector<double> slots(samples.size());
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    slots[i] = v_d_of_sample(samples[i], params, prompt);
  });

  double sum = 0.0;
  for (double v : slots) sum += v;
  return DefinitionValue{sum / static_cast<double>(samples.size()), samples.size()};
}

DefinitionValue v_d_aggregate_serial(const std::vector<VdSample>& samples,
                                     const ScorerParams& params,
                                     std::string_view definition) {
  if (samples.empty())
    throw std::domain_error("v_d_aggregate requires at least one sample");
  const std::vector<double> prompt = embed_prompt(definition, params.embed_dim);
  double sum = 0.0;
  for (const VdSample& sample : samples)
    sum += v_d_of_sample(sample, params, prompt);
  return DefinitionValue{sum / static_cast<double>(samples.size()), samples.size()};
}

}  // namespace ieqa
