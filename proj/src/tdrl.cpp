#include "ieqa/tdrl.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ieqa {

namespace {

void check_normalized(const DigitDistribution& dist, int position) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0))
      throw std::domain_error("digit distribution at position " +
                              std::to_string(position) +
                              " has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::domain_error("digit distribution at position " +
                            std::to_string(position) +
                            " is unnormalized (sum " + std::to_string(sum) + ")");
}

}  // namespace

double l_ce(std::span<const double> pattern_logprobs) {
  double total = 0.0;
  for (double lp : pattern_logprobs) {
    if (lp > 0.0)
      throw std::domain_error("log-probability above 0 in l_ce input");
    total -= lp;
  }
  return total;
}

TdrlBreakdown l_score(const std::array<DigitDistribution, 3>& dists,
                      const DigitTriple& g) {
  if (!valid_triple(g)) throw std::invalid_argument("invalid ground-truth triple");
  const int gt[3] = {g.d0, g.d1, g.d2};
  TdrlBreakdown out;
  for (int t = 0; t < 3; ++t) {
    const auto& dist = dists[static_cast<std::size_t>(t)];
    check_normalized(dist, t);
    double expected_distance = 0.0;
    for (int k = 0; k < 10; ++k)
      expected_distance +=
          dist[static_cast<std::size_t>(k)] * std::abs(static_cast<double>(k - gt[t]));
    const double term = kPositionWeight[static_cast<std::size_t>(t)] * expected_distance;
    out.l_score_terms[static_cast<std::size_t>(t)] = term;
    out.l_score += term;
  }
  out.l_tdrl = out.l_score;
  return out;
}

std::array<std::array<double, 10>, 3> l_score_grad(
    const std::array<std::array<double, 10>, 3>& digit_logits,
    const DigitTriple& g) {
  std::array<DigitDistribution, 3> dists;
  for (int t = 0; t < 3; ++t) {
    const auto& z = digit_logits[static_cast<std::size_t>(t)];
    double max_z = z[0];
    for (double v : z) max_z = std::max(max_z, v);
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double e = std::exp(z[static_cast<std::size_t>(k)] - max_z);
      dists[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = e;
      sum += e;
    }
    for (double& p : dists[static_cast<std::size_t>(t)]) p /= sum;
  }
  return l_score_grad_from_dists(dists, g);
}

std::array<std::array<double, 10>, 3> l_score_grad_from_dists(
    const std::array<DigitDistribution, 3>& dists, const DigitTriple& g) {
  if (!valid_triple(g)) throw std::invalid_argument("invalid ground-truth triple");
  const int gt[3] = {g.d0, g.d1, g.d2};
  std::array<std::array<double, 10>, 3> grad{};
  for (int t = 0; t < 3; ++t) {
    const auto& dist = dists[static_cast<std::size_t>(t)];
    double expected_distance = 0.0;
    for (int k = 0; k < 10; ++k)
      expected_distance +=
          dist[static_cast<std::size_t>(k)] * std::abs(static_cast<double>(k - gt[t]));
    for (int k = 0; k < 10; ++k) {
      const double distance = std::abs(static_cast<double>(k - gt[t]));
      grad[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
          kPositionWeight[static_cast<std::size_t>(t)] *
          dist[static_cast<std::size_t>(k)] * (distance - expected_distance);
    }
  }
  return grad;
}

TdrlBreakdown l_tdrl(std::span<const double> pattern_logprobs,
                     const std::array<DigitDistribution, 3>& dists,
                     const DigitTriple& g) {
  TdrlBreakdown out = l_score(dists, g);
  out.l_ce = l_ce(pattern_logprobs);
  out.l_tdrl = out.l_ce + out.l_score;
  return out;
}

}  // namespace ieqa
