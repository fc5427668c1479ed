#pragma once

#include <array>
#include <span>

#include "ieqa/score_codec.hpp"
#include "ieqa/scorer.hpp"

namespace ieqa {

// 10^-t weight of digit position t (ones, tenths, hundredths).
inline constexpr std::array<double, 3> kPositionWeight{1.0, 0.1, 0.01};

struct TdrlBreakdown {
  double l_ce = 0.0;
  double l_score = 0.0;
  double l_tdrl = 0.0;  // l_ce + l_score, exactly as computed
  std::array<double, 3> l_score_terms{0.0, 0.0, 0.0};
};

// Negative sum of the ground-truth log-probabilities at the non-digit
// template positions ("score", ':', '.', EOS). Digit positions are excluded;
// they are governed by l_score. Throws std::domain_error if any
// log-probability is positive.
double l_ce(std::span<const double> pattern_logprobs);

// Sum over positions of 10^-t * E[|k - g_t|] under the teacher-forced digit
// distributions. Throws std::domain_error if a distribution is unnormalized
// (|sum - 1| > 1e-9).
TdrlBreakdown l_score(const std::array<DigitDistribution, 3>& dists,
                      const DigitTriple& g);

// d l_score / d z_{t,k} with the distributions formed by softmax over the
// given digit logits: 10^-t * p_k * (|k - g_t| - E[|j - g_t|]).
std::array<std::array<double, 10>, 3> l_score_grad(
    const std::array<std::array<double, 10>, 3>& digit_logits,
    const DigitTriple& g);

// Same gradient evaluated from already-normalized distributions (the
// inspect-loss surface takes probabilities, not logits).
std::array<std::array<double, 10>, 3> l_score_grad_from_dists(
    const std::array<DigitDistribution, 3>& dists, const DigitTriple& g);

TdrlBreakdown l_tdrl(std::span<const double> pattern_logprobs,
                     const std::array<DigitDistribution, 3>& dists,
                     const DigitTriple& g);

}  // namespace ieqa
