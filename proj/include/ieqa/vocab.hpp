#pragma once

#include <array>

#include "ieqa/score_codec.hpp"

namespace ieqa {

// Fixed 15-token vocabulary of the toy scorer.
namespace tok {

inline constexpr int kBos = 0;
inline constexpr int kWordScore = 1;  // the literal word "score"
inline constexpr int kColon = 2;
inline constexpr int kDot = 3;
inline constexpr int kDigitBase = 4;  // DIGIT_0..DIGIT_9 occupy 4..13
inline constexpr int kEos = 14;
inline constexpr int kVocabSize = 15;

constexpr int digit_token(int k) { return kDigitBase + k; }
constexpr bool is_digit_token(int id) {
  return id >= kDigitBase && id < kDigitBase + 10;
}
constexpr int digit_of(int id) { return id - kDigitBase; }

}  // namespace tok

// The fixed output sequence [BOS, "score", ':', D0, '.', D1, D2, EOS].
// The model predicts sequence positions 1..7; head p predicts position p+1.
// Digit position t in {0,1,2} maps to sequence index {3,5,6}.
struct TargetTemplate {
  static constexpr int kSeqLen = 8;
  static constexpr int kPredicted = 7;

  static constexpr std::array<int, 3> kDigitSeqPos{3, 5, 6};
  static constexpr std::array<int, 4> kPatternSeqPos{1, 2, 4, 7};
  static constexpr std::array<int, 3> kDigitHead{2, 4, 5};
  static constexpr std::array<int, 4> kPatternHead{0, 1, 3, 6};
  // Ground-truth tokens at the pattern heads, in kPatternHead order.
  static constexpr std::array<int, 4> kPatternToken{tok::kWordScore, tok::kColon,
                                                    tok::kDot, tok::kEos};
  // Teacher-forced prefix digits visible to each head: nothing before D0,
  // g0 before '.' and D1, g0 g1 before D2, the full triple before EOS.
  static constexpr std::array<int, kPredicted> kPrefixDigits{0, 0, 0, 1, 1, 2, 3};

  static std::array<int, kSeqLen> sequence(const DigitTriple& g) {
    return {tok::kBos,          tok::kWordScore,
            tok::kColon,        tok::digit_token(g.d0),
            tok::kDot,          tok::digit_token(g.d1),
            tok::digit_token(g.d2), tok::kEos};
  }
};

}  // namespace ieqa
