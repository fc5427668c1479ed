#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ieqa/parallel.hpp"
#include "ieqa/score_codec.hpp"
#include "ieqa/scorer.hpp"

namespace ieqa {

// Definition value of one metric-definition text: mean over samples of
// sum_t 10^-t P(d_t = g_t | g_<t). Bounded by [0, 1.11].
struct DefinitionValue {
  double v = 0.0;
  std::size_t n_samples = 0;
};

struct VdSample {
  std::vector<double> features;
  DigitTriple label;
};

// p0 + p1/10 + p2/100. Throws std::domain_error if a probability leaves [0,1].
double v_d_single(double p0, double p1, double p2);

// Teacher-forced evaluation of every sample under the definition's prompt
// embedding, reduced as a fixed-order mean. Throws std::domain_error on an
// empty sample list. Slot-based OpenMP version; bit-identical to the serial
// reference below for any thread count.
DefinitionValue v_d_aggregate(const std::vector<VdSample>& samples,
                              const ScorerParams& params,
                              std::string_view definition,
                              Exec exec = Exec::parallel);

// Plain-loop reference implementation.
DefinitionValue v_d_aggregate_serial(const std::vector<VdSample>& samples,
                                     const ScorerParams& params,
                                     std::string_view definition);

}  // namespace ieqa
