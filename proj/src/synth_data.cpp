#include "ieqa/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "ieqa/rng.hpp"

namespace ieqa {

std::string_view to_label(Split s) { return s == Split::in ? "in" : "out"; }

Split split_from_label(std::string_view label) {
  if (label == "in") return Split::in;
  if (label == "out") return Split::out;
  throw std::invalid_argument("unknown split label: " + std::string(label));
}

double SampleRecord::mos(Dimension d) const {
  switch (d) {
    case Dimension::visual: return mos_visual;
    case Dimension::editing: return mos_edit;
    case Dimension::preservation: return mos_pres;
  }
  throw std::logic_error("bad Dimension value");
}

namespace {

// Seed-stream tags; record streams hang off these so generation order and
// thread count never matter.
constexpr std::uint64_t kTagHeads = 0x11;
constexpr std::uint64_t kTagOod = 0x22;
constexpr std::uint64_t kTagRecord = 0x33;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// The latent weight scale targets a pre-sigmoid spread wide enough that the
// score distribution covers most of the [lo, hi] grid.
constexpr double kLatentWeightBound = 1.5;

}  // namespace

LatentHeads latent_heads(const GeneratorSpec& spec) {
  LatentHeads heads;
  SplitMix64 rng(derive_seed(spec.seed, kTagHeads));
  for (int d = 0; d < kDimensionCount; ++d) {
    auto& w = heads.w[d];
    w.resize(static_cast<std::size_t>(spec.feature_dim));
    for (double& x : w) x = rng.uniform(-kLatentWeightBound, kLatentWeightBound);
    heads.b[d] = rng.uniform(-0.5, 0.5);
  }

  SplitMix64 ood_rng(derive_seed(spec.seed, kTagOod));
  heads.ood_direction.resize(static_cast<std::size_t>(spec.feature_dim));
  double norm_sq = 0.0;
  for (double& x : heads.ood_direction) {
    x = ood_rng.gaussian();
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& x : heads.ood_direction) x /= norm;
  return heads;
}

namespace {

SampleRecord make_record(const GeneratorSpec& spec, const LatentHeads& heads,
                         Split split, std::uint64_t stream,
                         std::size_t index, const std::string& id_prefix) {
  SampleRecord rec;
  rec.split = split;
  rec.id = id_prefix + "-";
  {
    std::string n = std::to_string(index);
    rec.id.append(6 > n.size() ? 6 - n.size() : 0, '0');
    rec.id += n;
  }

  SplitMix64 rng(derive_seed(spec.seed, kTagRecord, stream, index));
  rec.features.resize(static_cast<std::size_t>(spec.feature_dim));
  for (double& x : rec.features) x = rng.uniform(-1.0, 1.0);
  if (split == Split::out) {
    for (std::size_t j = 0; j < rec.features.size(); ++j)
      rec.features[j] += spec.ood_shift * heads.ood_direction[j];
  }

  double* mos[kDimensionCount] = {&rec.mos_visual, &rec.mos_edit, &rec.mos_pres};
  const double span = spec.range.hi - spec.range.lo;
  for (int d = 0; d < kDimensionCount; ++d) {
    double z = heads.b[d];
    for (std::size_t j = 0; j < rec.features.size(); ++j)
      z += heads.w[d][j] * rec.features[j];
    double score = spec.range.lo + span * sigmoid(z);
    score += spec.noise_sigma * rng.gaussian();
    score = std::clamp(score, spec.range.lo, spec.range.hi);
    *mos[d] = quantize_score(score);
  }
  return rec;
}

std::vector<SampleRecord> make_split(const GeneratorSpec& spec,
                                     const LatentHeads& heads, Split split,
                                     std::uint64_t stream, std::size_t count,
                                     const std::string& id_prefix, Exec exec) {
  std::vector<SampleRecord> records(count);
  for_each_index(count, exec, [&](std::size_t i) {
    records[i] = make_record(spec, heads, split, stream, i, id_prefix);
  });
  return records;
}

}  // namespace

Dataset generate(const GeneratorSpec& spec, Exec exec) {
  if (spec.train_count < 1 || spec.val_in_count < 1 || spec.val_out_count < 1)
    throw std::invalid_argument("split sizes must be at least 1");
  if (spec.feature_dim < 1)
    throw std::invalid_argument("feature dimension must be at least 1");
  if (spec.noise_sigma < 0.0)
    throw std::invalid_argument("noise sigma must be nonnegative");
  if (!valid_range(spec.range))
    throw std::invalid_argument("invalid score range");

  const LatentHeads heads = latent_heads(spec);
  Dataset ds;
  ds.train = make_split(spec, heads, Split::in, 0, spec.train_count, "train", exec);
  ds.val_in = make_split(spec, heads, Split::in, 1, spec.val_in_count, "valin", exec);
  ds.val_out = make_split(spec, heads, Split::out, 2, spec.val_out_count, "valout", exec);
  return ds;
}

void write_jsonl(std::span<const SampleRecord> records,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path.string());
  for (const SampleRecord& rec : records) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["features"] = rec.features;
    j["mos_visual"] = rec.mos_visual;
    j["mos_edit"] = rec.mos_edit;
    j["mos_pres"] = rec.mos_pres;
    j["split"] = std::string(to_label(rec.split));
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing dataset file: " + path.string());
}

std::vector<SampleRecord> read_jsonl(const std::filesystem::path& path,
                                     const ScoreRange& range) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
  std::vector<SampleRecord> records;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    SampleRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.features = j.at("features").get<std::vector<double>>();
      rec.mos_visual = j.at("mos_visual").get<double>();
      rec.mos_edit = j.at("mos_edit").get<double>();
      rec.mos_pres = j.at("mos_pres").get<double>();
      rec.split = split_from_label(j.at("split").get<std::string>());
    } catch (const std::exception& e) {
      fail(std::string("bad record: ") + e.what());
    }
    for (double x : rec.features)
      if (!std::isfinite(x)) fail("non-finite feature value");
    // two-decimal rounding happens exactly once, here at ingestion
    for (double* mos : {&rec.mos_visual, &rec.mos_edit, &rec.mos_pres}) {
      const double q = quantize_score(*mos);
      if (q < range.lo - 1e-9 || q > range.hi + 1e-9)
        fail("score " + std::to_string(q) + " outside configured range");
      *mos = q;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ieqa
