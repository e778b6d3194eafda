#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsparse/linop.hpp"
#include "tsparse/partition.hpp"

namespace tsparse {

// gamma = argmin over positive scalings of || gamma T*T - I ||, with the
// achieved norm. Closed form from the extreme eigenvalues of T*T.
struct GammaResult {
  double gamma = 1.0;
  double residual_norm = 0.0;  // (e_max - e_min) / (e_max + e_min)
};

GammaResult gamma_opt(const TransformOperator& t);

struct IncoherenceProfile {
  std::size_t n = 0;
  double gamma = 1.0;
  double gamma_residual = 0.0;
  double mu = 0.0;                  // max over all local parameters
  std::vector<double> mu_k;
  std::vector<double> mu_tilde_k;
  double mu_bar = 0.0;              // mean of sqrt(mu_k * mu_tilde_k)
  bool group = false;
  double norm_one_to_two = 0.0;      // ||T||_{1->2}
  double norm_pinv_two_to_inf = 0.0; // ||T^dagger||_{2->inf}
  double norm_product() const { return norm_one_to_two * norm_pinv_two_to_inf; }

  double mu_max() const;
  double mu_tilde_min() const;
};

IncoherenceProfile incoherence(const TransformOperator& t);
IncoherenceProfile group_incoherence(const TransformOperator& t,
                                     const GroupPartition& partition);

struct SamplingDensity {
  std::vector<double> p;              // zero on forced indices, sums to 1
  std::vector<std::size_t> forced;    // always-sampled indices
  std::size_t n() const { return p.size(); }
};

SamplingDensity density(const IncoherenceProfile& profile);
SamplingDensity group_density(const IncoherenceProfile& profile);

// Two-step scheme for rank-deficient transforms: force the null frequencies,
// then the density of the column-restricted transform on the rest. n0 < 0
// auto-detects the null columns; n0 >= 0 forces exactly the first n0 indices
// (validated against the detected null set).
SamplingDensity two_step_density(const TransformOperator& t,
                                 std::ptrdiff_t n0 = -1,
                                 const GroupPartition* partition = nullptr);

// Restrict an externally computed density to the complement of `forced`
// (cross-transform sampling experiments).
SamplingDensity restrict_density(const SamplingDensity& base,
                                 const std::vector<std::size_t>& forced);

// Indices whose columns vanish (relative threshold 1e-12 on column norms).
std::vector<std::size_t> null_columns_of(const TransformOperator& t);

SamplingDensity uniform_density(std::size_t n);
// Uniform on the complement of the forced set, forced always sampled.
SamplingDensity two_step_uniform_density(std::size_t n,
                                         std::vector<std::size_t> forced);

// --- closed-form sample-complexity and error-amplification expressions ----
// The multiplicative constants of the guarantees are unspecified in the
// underlying analysis; C is a caller-supplied knob. Outputs are shape
// quantities, not certified bounds.

double sample_complexity_bound(double mu, std::size_t s, std::size_t big_n,
                               double gamma_residual, double norm_product,
                               double beta, double c_const);

double noise_amplification_worst(double sigma_ratio, std::size_t n,
                                 std::size_t big_n, double norm_product);

double noise_amplification_repetition(double sigma_ratio, std::size_t n,
                                      std::size_t m, std::size_t big_n,
                                      double norm_product,
                                      std::size_t repeat_excess);

double noise_amplification_repetition_unitary(double sigma_ratio,
                                              std::size_t n, std::size_t m,
                                              std::size_t big_n,
                                              std::size_t max_repeat);

struct VdStats {
  double mu_bar = 0.0;
  double mu_max = 0.0;
  double mu_tilde_min = 0.0;
};
VdStats vd_stats(const IncoherenceProfile& profile);

double noise_amplification_worst_vd(double sigma_ratio, std::size_t n,
                                    std::size_t big_n, double norm_product,
                                    const VdStats& stats);

double noise_amplification_repetition_vd(double sigma_ratio, std::size_t n,
                                         std::size_t m, std::size_t big_n,
                                         double norm_product,
                                         std::size_t repeat_excess,
                                         const VdStats& stats);

// JSON document {n, gamma, mu, mu_k[], mu_tilde_k[], density[], forced[]}
std::string profile_json(const IncoherenceProfile& profile,
                         const SamplingDensity* density = nullptr);

}  // namespace tsparse
