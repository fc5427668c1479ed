#include "ieqa/prompt_embed.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ieqa {

namespace {

std::uint64_t fnv1a64(const char* data, std::size_t len) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<double> embed_prompt(std::string_view text, int dim) {
  if (dim <= 0) throw std::invalid_argument("embedding dimension must be positive");
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  if (text.size() < 3) return v;  // no trigrams: zero vector
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
    const std::uint64_t h = fnv1a64(text.data() + i, 3);
    v[static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim))] += 1.0;
  }
  double norm_sq = 0.0;
  for (double c : v) norm_sq += c * c;
  const double norm = std::sqrt(norm_sq);
  for (double& c : v) c /= norm;
  return v;
}

}  // namespace ieqa
