#pragma once

#include <string_view>
#include <vector>

namespace ieqa {

// Deterministic stand-in for prompt conditioning: the bag of character
// trigrams of the definition text, hashed with 64-bit FNV-1a into dim
// buckets, counts L2-normalized. Texts shorter than one trigram embed to
// the zero vector.
std::vector<double> embed_prompt(std::string_view text, int dim = 64);

}  // namespace ieqa
