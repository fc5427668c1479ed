#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ieqa/score_codec.hpp"
#include "ieqa/synth_data.hpp"

namespace ieqa {

// Constant input vector: correlation undefined.
struct degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sample Pearson correlation. Throws std::invalid_argument on length
// mismatch or n < 2, degenerate_error on zero variance.
double plcc(std::span<const double> x, std::span<const double> y);

// Spearman: Pearson correlation of average (fractional) ranks.
double srcc(std::span<const double> x, std::span<const double> y);

// Average ranks with ties sharing the mean rank (1-based).
std::vector<double> average_ranks(std::span<const double> x);

struct DimCorr {
  double srcc = 0.0;
  double plcc = 0.0;
};

struct CorrelationReport {
  // cells[dimension][split]; nullopt marks a degenerate (undefined) cell.
  std::array<std::array<std::optional<DimCorr>, 2>, kDimensionCount> cells;
  std::optional<double> s_in;
  std::optional<double> s_out;
  std::optional<double> final;  // 0.7 s_in + 0.3 s_out

  bool complete() const;
};

// Builds the report from six complete (srcc, plcc) pairs:
// s_in = mean over dimensions of (srcc+plcc)/2 on the in split, s_out
// analogous, final = 0.7 s_in + 0.3 s_out.
CorrelationReport final_score(
    const std::array<std::array<DimCorr, 2>, kDimensionCount>& cells);

// Aggregates whatever cells are present; leaves s_in/s_out/final unset when
// a contributing cell is missing.
CorrelationReport partial_report(
    const std::array<std::array<std::optional<DimCorr>, 2>, kDimensionCount>&
        cells);

std::string report_to_json(const CorrelationReport& report);
CorrelationReport report_from_json(const std::string& text);
std::string report_table(const CorrelationReport& report);

}  // namespace ieqa
