#include "tsparse/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace tsparse {

namespace {

constexpr double kNullTol = 1e-12;

std::pair<double, double> gram_extremes(const TransformOperator& t) {
  auto [lo, hi] = t.gram_eigen_extremes();
  if (hi > 0.0) return {lo, hi};
  Eigen::MatrixXcd a = t.to_dense();
  Eigen::MatrixXcd gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                     Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {std::max(0.0, ev(0)), ev(ev.size() - 1)};
}

std::vector<std::size_t> null_columns(const ColumnNorms& cn) {
  double top = cn.one_to_two();
  std::vector<std::size_t> nulls;
  for (std::size_t k = 0; k < cn.col2.size(); ++k)
    if (cn.col2[k] <= kNullTol * top) nulls.push_back(k);
  return nulls;
}

void finalize_profile(IncoherenceProfile& prof) {
  double mu = 0.0, bar = 0.0;
  for (std::size_t k = 0; k < prof.mu_k.size(); ++k) {
    mu = std::max(mu, std::max(prof.mu_k[k], prof.mu_tilde_k[k]));
    bar += std::sqrt(prof.mu_k[k] * prof.mu_tilde_k[k]);
  }
  prof.mu = mu;
  prof.mu_bar = bar / static_cast<double>(prof.mu_k.size());
}

// Per-column max group-l2 norms of T and T~ for an arbitrary partition.
void group_column_norms(const TransformOperator& t,
                        const GroupPartition& partition,
                        std::vector<double>& gmax,
                        std::vector<double>& gmax_tilde) {
  std::size_t n = t.in_dim();
  const auto& group_of = partition.group_of();
  gmax.assign(n, 0.0);
  gmax_tilde.assign(n, 0.0);
  std::vector<double> acc(partition.group_count());
  auto scan = [&](const cvec& col, double& out) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < col.size(); ++i)
      acc[group_of[i]] += std::norm(col[i]);
    out = std::sqrt(*std::max_element(acc.begin(), acc.end()));
  };
  for (std::size_t k = 0; k < n; ++k) {
    scan(t.column(k), gmax[k]);
    scan(t.tilde_column(k), gmax_tilde[k]);
  }
}

SamplingDensity density_from_weights(std::vector<double> w,
                                     std::vector<std::size_t> forced) {
  double total = 0.0;
  for (double x : w) total += x;
  if (total <= 0.0)
    throw std::invalid_argument("density: all incoherence products vanish");
  for (double& x : w) x /= total;
  return SamplingDensity{std::move(w), std::move(forced)};
}

}  // namespace

double IncoherenceProfile::mu_max() const {
  return mu_k.empty() ? 0.0 : *std::max_element(mu_k.begin(), mu_k.end());
}

double IncoherenceProfile::mu_tilde_min() const {
  return mu_tilde_k.empty()
             ? 0.0
             : *std::min_element(mu_tilde_k.begin(), mu_tilde_k.end());
}

GammaResult gamma_opt(const TransformOperator& t) {
  auto [emin, emax] = gram_extremes(t);
  if (emax <= 0.0 || emin <= kNullTol * emax)
    throw std::invalid_argument(
        "non-injective transform; use two-step restriction");
  return GammaResult{2.0 / (emax + emin), (emax - emin) / (emax + emin)};
}

IncoherenceProfile incoherence(const TransformOperator& t) {
  GammaResult g = gamma_opt(t);
  ColumnNorms cn = column_norms(t);
  std::size_t n = t.in_dim();
  double dn = static_cast<double>(n);

  IncoherenceProfile prof;
  prof.n = n;
  prof.gamma = g.gamma;
  prof.gamma_residual = g.residual_norm;
  prof.mu_k.resize(n);
  prof.mu_tilde_k.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    prof.mu_k[k] = dn * g.gamma * cn.colinf[k] * cn.colinf[k];
    prof.mu_tilde_k[k] =
        dn / g.gamma * cn.tilde_colinf[k] * cn.tilde_colinf[k];
  }
  prof.norm_one_to_two = cn.one_to_two();
  prof.norm_pinv_two_to_inf = cn.pinv_two_to_inf();
  finalize_profile(prof);
  return prof;
}

IncoherenceProfile group_incoherence(const TransformOperator& t,
                                     const GroupPartition& partition) {
  if (partition.total_size() != t.out_dim())
    throw std::invalid_argument("partition does not cover the output space");
  if (partition.is_singletons()) {
    IncoherenceProfile prof = incoherence(t);
    prof.group = true;
    return prof;
  }

  GammaResult g = gamma_opt(t);
  std::size_t n = t.in_dim();
  double dn = static_cast<double>(n);

  IncoherenceProfile prof;
  prof.n = n;
  prof.gamma = g.gamma;
  prof.gamma_residual = g.residual_norm;
  prof.group = true;
  prof.mu_k.resize(n);
  prof.mu_tilde_k.resize(n);

  if (t.has_spectrum() &&
      partition.is_stack(t.in_dim(), t.filter_count())) {
    // stacked circulant + DFT: group norms collapse to the joint spectrum
    const auto& spec = t.spectra();
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (const auto& lam : spec) s += std::norm(lam[k]);
      prof.mu_k[k] = g.gamma * s;
      prof.mu_tilde_k[k] = s > 0.0 ? 1.0 / (g.gamma * s) : 0.0;
    }
  } else {
    std::vector<double> gmax, gmax_tilde;
    group_column_norms(t, partition, gmax, gmax_tilde);
    for (std::size_t k = 0; k < n; ++k) {
      prof.mu_k[k] = dn * g.gamma * gmax[k] * gmax[k];
      prof.mu_tilde_k[k] = dn / g.gamma * gmax_tilde[k] * gmax_tilde[k];
    }
  }

  ColumnNorms cn = column_norms(t);
  prof.norm_one_to_two = cn.one_to_two();
  prof.norm_pinv_two_to_inf = cn.pinv_two_to_inf();
  finalize_profile(prof);
  return prof;
}

SamplingDensity density(const IncoherenceProfile& profile) {
  std::vector<double> w(profile.n);
  for (std::size_t k = 0; k < profile.n; ++k)
    w[k] = std::sqrt(profile.mu_k[k] * profile.mu_tilde_k[k]);
  return density_from_weights(std::move(w), {});
}

SamplingDensity group_density(const IncoherenceProfile& profile) {
  if (!profile.group)
    throw std::invalid_argument("group_density needs a group profile");
  return density(profile);
}

SamplingDensity two_step_density(const TransformOperator& t, std::ptrdiff_t n0,
                                 const GroupPartition* partition) {
  ColumnNorms cn = column_norms(t);
  std::vector<std::size_t> nulls = null_columns(cn);

  if (n0 >= 0) {
    std::vector<std::size_t> expect(static_cast<std::size_t>(n0));
    for (std::size_t k = 0; k < expect.size(); ++k) expect[k] = k;
    if (nulls != expect)
      throw std::invalid_argument(
          "two_step_density: the first n0 columns are not exactly the null "
          "columns");
  }

  if (nulls.empty()) {
    IncoherenceProfile prof =
        partition ? group_incoherence(t, *partition) : incoherence(t);
    return density(prof);
  }

  std::size_t n = t.in_dim();
  std::vector<bool> is_null(n, false);
  for (std::size_t k : nulls) is_null[k] = true;

  std::vector<double> w(n, 0.0);
  if (t.has_spectrum()) {
    // restriction drops columns only; spectral tilde columns at the kept
    // indices coincide with the restricted transform's
    if (partition && partition->is_stack(n, t.filter_count())) {
      for (std::size_t k = 0; k < n; ++k)
        if (!is_null[k]) w[k] = cn.col2[k] * cn.tilde_col2[k];
    } else if (partition) {
      std::vector<double> gmax, gmax_tilde;
      group_column_norms(t, *partition, gmax, gmax_tilde);
      for (std::size_t k = 0; k < n; ++k)
        if (!is_null[k]) w[k] = gmax[k] * gmax_tilde[k];
    } else {
      for (std::size_t k = 0; k < n; ++k)
        if (!is_null[k]) w[k] = cn.colinf[k] * cn.tilde_colinf[k];
    }
  } else {
    // drop the null columns and work with the restricted dense operator
    Eigen::MatrixXcd a = t.to_dense();
    Eigen::MatrixXcd sub(a.rows(),
                         static_cast<Eigen::Index>(n - nulls.size()));
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < n; ++k)
      if (!is_null[k]) {
        sub.col(static_cast<Eigen::Index>(kept.size())) =
            a.col(static_cast<Eigen::Index>(k));
        kept.push_back(k);
      }
    TransformOperator rt = TransformOperator::dense(std::move(sub));
    IncoherenceProfile prof =
        partition ? group_incoherence(rt, *partition) : incoherence(rt);
    for (std::size_t i = 0; i < kept.size(); ++i)
      w[kept[i]] = std::sqrt(prof.mu_k[i] * prof.mu_tilde_k[i]);
  }
  return density_from_weights(std::move(w), std::move(nulls));
}

SamplingDensity restrict_density(const SamplingDensity& base,
                                 const std::vector<std::size_t>& forced) {
  std::vector<double> w = base.p;
  for (std::size_t k : forced) w.at(k) = 0.0;
  SamplingDensity out = density_from_weights(std::move(w), forced);
  std::sort(out.forced.begin(), out.forced.end());
  return out;
}

std::vector<std::size_t> null_columns_of(const TransformOperator& t) {
  return null_columns(column_norms(t));
}

SamplingDensity uniform_density(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_density: empty");
  return SamplingDensity{std::vector<double>(n, 1.0 / static_cast<double>(n)),
                         {}};
}

SamplingDensity two_step_uniform_density(std::size_t n,
                                         std::vector<std::size_t> forced) {
  std::vector<double> w(n, 1.0);
  for (std::size_t k : forced) w.at(k) = 0.0;
  std::sort(forced.begin(), forced.end());
  return density_from_weights(std::move(w), std::move(forced));
}

// --- closed-form expressions -------------------------------------------------

double sample_complexity_bound(double mu, std::size_t s, std::size_t big_n,
                               double gamma_residual, double norm_product,
                               double beta, double c_const) {
  double logs = std::log(static_cast<double>(big_n)) + std::log(norm_product);
  return c_const * (1.0 + beta) * mu * static_cast<double>(s) /
         (1.0 - gamma_residual) * logs;
}

double noise_amplification_worst(double sigma_ratio, std::size_t n,
                                 std::size_t big_n, double norm_product) {
  double root = std::sqrt(static_cast<double>(big_n));
  return sigma_ratio *
         (2.0 + 28.0 * root * (3.0 * static_cast<double>(n) * norm_product + 1.0));
}

double noise_amplification_repetition(double sigma_ratio, std::size_t n,
                                      std::size_t m, std::size_t big_n,
                                      double norm_product,
                                      std::size_t repeat_excess) {
  double root = std::sqrt(static_cast<double>(big_n));
  double ratio = static_cast<double>(n) / static_cast<double>(m);
  return sigma_ratio *
         (14.0 * root +
          ratio * (norm_product * static_cast<double>(repeat_excess) + 1.0));
}

double noise_amplification_repetition_unitary(double sigma_ratio,
                                              std::size_t n, std::size_t m,
                                              std::size_t big_n,
                                              std::size_t max_repeat) {
  double root = std::sqrt(static_cast<double>(big_n));
  double ratio = static_cast<double>(n) / static_cast<double>(m);
  return sigma_ratio * (14.0 * root + ratio * static_cast<double>(max_repeat));
}

VdStats vd_stats(const IncoherenceProfile& profile) {
  return VdStats{profile.mu_bar, profile.mu_max(), profile.mu_tilde_min()};
}

double noise_amplification_worst_vd(double sigma_ratio, std::size_t n,
                                    std::size_t big_n, double norm_product,
                                    const VdStats& stats) {
  double root = std::sqrt(static_cast<double>(big_n));
  double skew = stats.mu_max / stats.mu_tilde_min;
  return sigma_ratio * (stats.mu_bar / stats.mu_tilde_min) *
         (2.0 + 28.0 * root *
                    (skew * 3.0 * static_cast<double>(n) * norm_product + 1.0));
}

double noise_amplification_repetition_vd(double sigma_ratio, std::size_t n,
                                         std::size_t m, std::size_t big_n,
                                         double norm_product,
                                         std::size_t repeat_excess,
                                         const VdStats& stats) {
  double root = std::sqrt(static_cast<double>(big_n));
  double ratio = static_cast<double>(n) / static_cast<double>(m);
  double skew = stats.mu_max / stats.mu_tilde_min;
  return sigma_ratio * (stats.mu_bar / stats.mu_tilde_min) *
         (14.0 * root +
          ratio * (skew * norm_product * static_cast<double>(repeat_excess) +
                   1.0));
}

std::string profile_json(const IncoherenceProfile& profile,
                         const SamplingDensity* density) {
  nlohmann::json j;
  j["n"] = profile.n;
  j["gamma"] = profile.gamma;
  j["gamma_residual"] = profile.gamma_residual;
  j["mu"] = profile.mu;
  j["mu_bar"] = profile.mu_bar;
  j["group"] = profile.group;
  j["mu_k"] = profile.mu_k;
  j["mu_tilde_k"] = profile.mu_tilde_k;
  j["density"] = density ? nlohmann::json(density->p) : nlohmann::json::array();
  j["forced"] =
      density ? nlohmann::json(density->forced) : nlohmann::json::array();
  return j.dump(2);
}

}  // namespace tsparse
