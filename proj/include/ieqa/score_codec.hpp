#pragma once

#include <string>
#include <string_view>

namespace ieqa {

enum class Dimension { visual, editing, preservation };

inline constexpr int kDimensionCount = 3;

std::string_view to_label(Dimension d);
// Throws std::invalid_argument on unknown labels.
Dimension dimension_from_label(std::string_view label);

// A MOS score split into ones / tenths / hundredths digits. This is the unit
// the definition value and the distance loss operate on.
struct DigitTriple {
  int d0 = 0;  // ones
  int d1 = 0;  // tenths
  int d2 = 0;  // hundredths

  friend bool operator==(const DigitTriple&, const DigitTriple&) = default;
};

bool valid_triple(const DigitTriple& t);

// d0 + d1/10 + d2/100 as the correctly rounded double of the two-decimal
// rational.
double triple_value(const DigitTriple& t);

// Parses "X.XX" or "X.X" (single integer digit, one or two decimals).
// One-decimal inputs zero-pad the hundredths. Throws std::invalid_argument
// naming the offending character position otherwise.
DigitTriple parse_score(std::string_view text);

// "X.XX"
std::string format_triple(const DigitTriple& t);

// "<dimension> score: X.XX"
std::string format_prediction(Dimension d, const DigitTriple& t);

// Valid MOS interval. The codec itself admits [0.00, 9.99]; datasets and
// decoding clamp into this narrower window. Both ends must sit on the
// two-decimal grid.
struct ScoreRange {
  double lo = 1.0;
  double hi = 5.0;
};

bool valid_range(const ScoreRange& r);

struct Score {
  double value = 0.0;
  Dimension dimension = Dimension::visual;
};

// Round-half-away-from-zero onto the two-decimal grid, applied once at
// ingestion. Input must land in [0.00, 9.99] after rounding.
DigitTriple quantize_to_triple(double value);
double quantize_score(double value);

}  // namespace ieqa
