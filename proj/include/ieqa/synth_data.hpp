#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ieqa/parallel.hpp"
#include "ieqa/score_codec.hpp"

namespace ieqa {

enum class Split { in, out };

std::string_view to_label(Split s);
Split split_from_label(std::string_view label);

// One synthetic rating sample: a feature vector standing in for the encoded
// (original, edited, instruction) input, plus one MOS per dimension.
struct SampleRecord {
  std::string id;
  std::vector<double> features;
  double mos_visual = 0.0;
  double mos_edit = 0.0;
  double mos_pres = 0.0;
  Split split = Split::in;

  double mos(Dimension d) const;
};

struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t train_count = 2000;
  std::size_t val_in_count = 500;
  std::size_t val_out_count = 500;
  int feature_dim = 16;
  double noise_sigma = 0.15;  // annotator-noise analogue, added pre-quantization
  double ood_shift = 0.5;     // feature-mean shift magnitude of the out split
  ScoreRange range;
};

struct Dataset {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> val_in;
  std::vector<SampleRecord> val_out;
};

// Deterministic generation: features uniform in [-1,1]^F (out split shifted
// by ood_shift along a fixed seeded unit vector), per-dimension latent score
// lo + (hi-lo)*sigmoid(w_d.x + b_d), Gaussian noise, clamp, two-decimal
// quantization. Per-record counter-based seeding; thread-count invariant.
Dataset generate(const GeneratorSpec& spec, Exec exec = Exec::parallel);

// Latent heads the generator draws from the seed; exposed so tests can
// recompute scores independently.
struct LatentHeads {
  std::vector<double> w[kDimensionCount];
  double b[kDimensionCount];
  std::vector<double> ood_direction;  // unit vector
};
LatentHeads latent_heads(const GeneratorSpec& spec);

// JSON Lines, one record per line, field names exactly:
// id, features, mos_visual, mos_edit, mos_pres, split.
void write_jsonl(std::span<const SampleRecord> records,
                 const std::filesystem::path& path);

// Validates scores against the range (quantizing once at ingestion) and
// feature finiteness. Throws std::runtime_error naming the offending line.
std::vector<SampleRecord> read_jsonl(const std::filesystem::path& path,
                                     const ScoreRange& range);

}  // namespace ieqa
