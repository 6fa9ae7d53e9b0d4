#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hopgraph {

// Splits text into maximal runs of ASCII alphanumeric characters. Bytes
// above 0x7F are treated as word characters so non-ASCII words survive
// as single tokens.
std::vector<std::string> tokenize(const std::string& text);

// Lowercases ASCII letters in place semantics (returns the folded copy).
std::string fold_case(std::string s);

// FNV-1a 64-bit over the bytes of `s`. Published so tests can recompute
// the token-hash embedder's bucket assignment independently.
std::uint64_t fnv1a64(const std::string& s);

} // namespace hopgraph
