#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tsparse/linop.hpp"
#include "tsparse/spectra.hpp"

namespace tsparse {

// Multiset of sampled indices, in draw order (golfing stages consume blocks
// by draw order). Immutable after draw.
struct SamplingPattern {
  std::vector<std::size_t> omega;        // as drawn, repetitions kept
  std::vector<std::size_t> omega_prime;  // sorted unique indices
  std::vector<std::size_t> multiplicity; // per omega_prime entry
  std::size_t max_repeat = 0;            // R
  std::size_t n = 0;                     // ambient dimension
  std::uint64_t seed = 0;

  std::size_t m() const { return omega.size(); }
  std::size_t unique_count() const { return omega_prime.size(); }
};

// Inverse-CDF draw from the density with a fixed 64-bit generator; forced
// indices occupy the first positions. Deterministic given (density, m, seed).
SamplingPattern draw(const SamplingDensity& density, std::size_t m,
                     std::uint64_t seed);

// Build a pattern from an explicit index multiset (deserialization, tests).
SamplingPattern pattern_from_indices(std::vector<std::size_t> omega,
                                     std::size_t n, std::uint64_t seed = 0);

// S_Omega x (dedup=false, length m) or S_Omega' x (dedup=true).
cvec subsample(const SamplingPattern& pattern, const cvec& x, bool dedup);

// Adjoints: scatter-add over repeats (dedup=false) or plain scatter.
cvec embed(const SamplingPattern& pattern, const cvec& y, bool dedup);

std::string pattern_json(const SamplingPattern& pattern);
SamplingPattern pattern_from_json(const std::string& text);

// 0/255 mask of sampled frequencies on an n1 x n2 grid (column-major).
void write_pgm_mask(const SamplingPattern& pattern, std::size_t n1,
                    std::size_t n2, const std::string& path);

}  // namespace tsparse
