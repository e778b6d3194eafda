#include "tsparse/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>

namespace tsparse {

namespace {

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void finalize(SamplingPattern& p) {
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t idx : p.omega) {
    if (idx >= p.n) throw std::invalid_argument("pattern index out of range");
    ++counts[idx];
  }
  p.omega_prime.clear();
  p.multiplicity.clear();
  p.max_repeat = 0;
  for (const auto& [idx, c] : counts) {
    p.omega_prime.push_back(idx);
    p.multiplicity.push_back(c);
    p.max_repeat = std::max(p.max_repeat, c);
  }
}

}  // namespace

SamplingPattern draw(const SamplingDensity& density, std::size_t m,
                     std::uint64_t seed) {
  std::size_t n = density.n();
  if (n == 0) throw std::invalid_argument("draw: empty density");
  if (m <= density.forced.size())
    throw std::invalid_argument(
        "draw: m must exceed the number of forced indices");

  // cumulative distribution over the random part
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (density.p[k] < 0.0)
      throw std::invalid_argument("draw: negative density entry");
    acc += density.p[k];
    cdf[k] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9)
    throw std::invalid_argument("draw: density does not sum to 1");
  for (double& c : cdf) c /= acc;
  cdf[n - 1] = 1.0;

  SamplingPattern p;
  p.n = n;
  p.seed = seed;
  p.omega = density.forced;
  p.omega.reserve(m);

  std::mt19937_64 rng(seed);
  for (std::size_t j = density.forced.size(); j < m; ++j) {
    double u = next_unit(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    p.omega.push_back(static_cast<std::size_t>(it - cdf.begin()));
  }
  finalize(p);
  return p;
}

SamplingPattern pattern_from_indices(std::vector<std::size_t> omega,
                                     std::size_t n, std::uint64_t seed) {
  SamplingPattern p;
  p.omega = std::move(omega);
  p.n = n;
  p.seed = seed;
  finalize(p);
  return p;
}

cvec subsample(const SamplingPattern& pattern, const cvec& x, bool dedup) {
  if (x.size() != pattern.n)
    throw std::invalid_argument("subsample: signal length mismatch");
  const auto& src = dedup ? pattern.omega_prime : pattern.omega;
  cvec out(src.size());
  for (std::size_t j = 0; j < src.size(); ++j) out[j] = x[src[j]];
  return out;
}

cvec embed(const SamplingPattern& pattern, const cvec& y, bool dedup) {
  const auto& dst = dedup ? pattern.omega_prime : pattern.omega;
  if (y.size() != dst.size())
    throw std::invalid_argument("embed: observation length mismatch");
  cvec out(pattern.n, cxd{0.0, 0.0});
  for (std::size_t j = 0; j < dst.size(); ++j) out[dst[j]] += y[j];
  return out;
}

std::string pattern_json(const SamplingPattern& pattern) {
  nlohmann::json j;
  j["n"] = pattern.n;
  j["seed"] = pattern.seed;
  j["omega"] = pattern.omega;
  return j.dump();
}

SamplingPattern pattern_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  return pattern_from_indices(j.at("omega").get<std::vector<std::size_t>>(),
                              j.at("n").get<std::size_t>(),
                              j.value("seed", std::uint64_t{0}));
}

void write_pgm_mask(const SamplingPattern& pattern, std::size_t n1,
                    std::size_t n2, const std::string& path) {
  if (n1 * n2 != pattern.n)
    throw std::invalid_argument("pgm mask: grid does not match pattern");
  std::vector<unsigned char> img(pattern.n, 0);
  for (std::size_t idx : pattern.omega_prime) img[idx] = 255;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << n2 << " " << n1 << "\n255\n";
  // column-major storage, raster rows in the file
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      out.put(static_cast<char>(img[i + j * n1]));
}

}  // namespace tsparse
