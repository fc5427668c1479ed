#include "ieqa/score_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace ieqa {

std::string_view to_label(Dimension d) {
  switch (d) {
    case Dimension::visual: return "visual";
    case Dimension::editing: return "editing";
    case Dimension::preservation: return "preservation";
  }
  throw std::logic_error("bad Dimension value");
}

Dimension dimension_from_label(std::string_view label) {
  if (label == "visual") return Dimension::visual;
  if (label == "editing") return Dimension::editing;
  if (label == "preservation") return Dimension::preservation;
  throw std::invalid_argument("unknown dimension label: " + std::string(label));
}

bool valid_triple(const DigitTriple& t) {
  auto ok = [](int d) { return d >= 0 && d <= 9; };
  return ok(t.d0) && ok(t.d1) && ok(t.d2);
}

double triple_value(const DigitTriple& t) {
  // Single division keeps the result correctly rounded for the two-decimal
  // rational.
  return static_cast<double>(100 * t.d0 + 10 * t.d1 + t.d2) / 100.0;
}

namespace {

[[noreturn]] void parse_fail(std::size_t pos, const std::string& what) {
  throw std::invalid_argument("score parse error at position " +
                              std::to_string(pos) + ": " + what);
}

int digit_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) parse_fail(pos, "unexpected end of input");
  const char c = text[pos];
  if (c < '0' || c > '9')
    parse_fail(pos, std::string("expected digit, got '") + c + "'");
  return c - '0';
}

}  // namespace

DigitTriple parse_score(std::string_view text) {
  DigitTriple t;
  t.d0 = digit_at(text, 0);
  if (text.size() < 2 || text[1] != '.') {
    if (text.size() < 2) parse_fail(1, "expected '.'");
    parse_fail(1, std::string("expected '.', got '") + text[1] + "'");
  }
  t.d1 = digit_at(text, 2);
  if (text.size() == 3) {
    t.d2 = 0;  // one-decimal input zero-pads the hundredths
  } else {
    t.d2 = digit_at(text, 3);
    if (text.size() > 4)
      parse_fail(4, std::string("trailing character '") + text[4] + "'");
  }
  return t;
}

std::string format_triple(const DigitTriple& t) {
  std::string s;
  s += static_cast<char>('0' + t.d0);
  s += '.';
  s += static_cast<char>('0' + t.d1);
  s += static_cast<char>('0' + t.d2);
  return s;
}

std::string format_prediction(Dimension d, const DigitTriple& t) {
  if (!valid_triple(t)) throw std::invalid_argument("invalid digit triple");
  std::string s(to_label(d));
  s += " score: ";
  s += format_triple(t);
  return s;
}

bool valid_range(const ScoreRange& r) {
  auto on_grid = [](double v) {
    if (!(v >= 0.0 && v <= 9.99)) return false;
    const double scaled = v * 100.0;
    return std::abs(scaled - std::round(scaled)) < 1e-9;
  };
  return on_grid(r.lo) && on_grid(r.hi) && r.lo < r.hi;
}

DigitTriple quantize_to_triple(double value) {
  if (!std::isfinite(value))
    throw std::domain_error("cannot quantize non-finite score");
  // llround rounds half away from zero.
  const long long hundredths = std::llround(value * 100.0);
  if (hundredths < 0 || hundredths > 999)
    throw std::domain_error("score " + std::to_string(value) +
                            " outside the representable [0.00, 9.99] range");
  const int n = static_cast<int>(hundredths);
  return DigitTriple{n / 100, (n / 10) % 10, n % 10};
}

double quantize_score(double value) { return triple_value(quantize_to_triple(value)); }

}  // namespace ieqa
