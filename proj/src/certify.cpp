#include "tsparse/certify.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <stdexcept>

namespace tsparse {

namespace {

double norm2(const cvec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

cvec signum(const cvec& v, std::vector<std::size_t>* support) {
  double top = 0.0;
  for (const auto& z : v) top = std::max(top, std::abs(z));
  cvec out(v.size(), cxd{0.0, 0.0});
  for (std::size_t k = 0; k < v.size(); ++k) {
    double mag = std::abs(v[k]);
    if (mag > 1e-12 * top && mag > 0.0) {
      out[k] = v[k] / mag;
      if (support) support->push_back(k);
    }
  }
  return out;
}

// S_Omega* S_Omega w for an index block with multiplicities
cvec masked(const cvec& w, const std::vector<std::size_t>& block) {
  cvec out(w.size(), cxd{0.0, 0.0});
  for (std::size_t idx : block) out[idx] += w[idx];
  return out;
}

void project(cvec& v, const std::vector<bool>& keep) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!keep[k]) v[k] = cxd{0.0, 0.0};
}

// columns of T and T~ restricted to J, for all unique sampled indices
struct RestrictedColumns {
  // col_t[i] and col_tilde[i] hold the J-restricted columns at
  // pattern.omega_prime[i]
  std::vector<cvec> col_t, col_tilde;
};

RestrictedColumns restricted_columns(const TransformOperator& t,
                                     const std::vector<std::size_t>& indices,
                                     const std::vector<std::size_t>& j) {
  RestrictedColumns rc;
  rc.col_t.reserve(indices.size());
  rc.col_tilde.reserve(indices.size());
  if (t.has_spectrum()) {
    // T = (I (x) Psi*) diag-stack: entries are explicit exponentials
    const auto& spec = t.spectra();
    std::size_t n = t.in_dim();
    std::size_t n1 = t.grid_rows(), n2 = t.grid_cols();
    std::vector<double> gram(n, 0.0);
    for (const auto& lam : spec)
      for (std::size_t k = 0; k < n; ++k) gram[k] += std::norm(lam[k]);
    double top = *std::max_element(gram.begin(), gram.end());
    double tol = 1e-24 * top;
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t w : indices) {
      cvec ct(j.size()), ctl(j.size());
      std::size_t w1 = w % n1, w2 = w / n1;
      for (std::size_t a = 0; a < j.size(); ++a) {
        std::size_t filt = j[a] / n, pos = j[a] % n;
        std::size_t p1 = pos % n1, p2 = pos / n1;
        double phase =
            2.0 * std::numbers::pi *
            (static_cast<double>((w1 * p1) % n1) / static_cast<double>(n1) +
             static_cast<double>((w2 * p2) % n2) / static_cast<double>(n2));
        cxd basis = cxd{std::cos(phase), std::sin(phase)} * inv_sqrt_n;
        ct[a] = spec[filt][w] * basis;
        ctl[a] = gram[w] > tol ? spec[filt][w] / gram[w] * basis
                               : cxd{0.0, 0.0};
      }
      rc.col_t.push_back(std::move(ct));
      rc.col_tilde.push_back(std::move(ctl));
    }
    return rc;
  }
  for (std::size_t w : indices) {
    cvec full_t = t.column(w);
    cvec full_tilde = t.tilde_column(w);
    cvec ct(j.size()), ctl(j.size());
    for (std::size_t a = 0; a < j.size(); ++a) {
      ct[a] = full_t[j[a]];
      ctl[a] = full_tilde[j[a]];
    }
    rc.col_t.push_back(std::move(ct));
    rc.col_tilde.push_back(std::move(ctl));
  }
  return rc;
}

}  // namespace

std::size_t GolfingSchedule::total() const {
  std::size_t s = 0;
  for (std::size_t mi : m) s += mi;
  return s;
}

GolfingSchedule golfing_schedule(std::size_t s, std::size_t n,
                                 std::size_t big_n, double beta, double mu,
                                 double norm_product, bool use_log2) {
  if (s < 1) throw std::invalid_argument("golfing_schedule: s must be >= 1");
  double log_n_big = use_log2 ? std::log2(static_cast<double>(big_n))
                              : std::log(static_cast<double>(big_n));
  GolfingSchedule sched;
  sched.beta = beta;
  sched.ell = static_cast<int>(
      std::ceil(std::log2(static_cast<double>(s)) / 2.0 +
                std::log2(static_cast<double>(n)) + std::log2(norm_product)) +
      3);
  if (sched.ell < 1) sched.ell = 1;

  double c_head = 1.0 / std::ceil(2.0 * std::sqrt(log_n_big));
  double t_head = 1.0 / std::ceil(4.0 * std::sqrt(static_cast<double>(s)));
  double t_tail = log_n_big / std::ceil(4.0 * std::sqrt(static_cast<double>(s)));
  double m_scale = 10.0 * (1.0 + std::log(6.0) + beta) * mu *
                   static_cast<double>(s);
  for (int i = 1; i <= sched.ell; ++i) {
    double ci = i <= 3 ? c_head : 0.5;
    double ti = i <= 3 ? t_head : t_tail;
    sched.c.push_back(ci);
    sched.t.push_back(ti);
    sched.m.push_back(
        static_cast<std::size_t>(std::ceil(m_scale / (ci * ci))));
  }
  return sched;
}

GolfingSchedule fit_schedule(GolfingSchedule schedule,
                             std::size_t m_available) {
  std::size_t total = schedule.total();
  if (total == 0) throw std::invalid_argument("fit_schedule: empty schedule");
  // leave room for the retry rounds: target a third of the pattern
  double scale =
      static_cast<double>(m_available) / (3.0 * static_cast<double>(total));
  if (scale >= 1.0) return schedule;
  for (auto& mi : schedule.m)
    mi = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(scale * static_cast<double>(mi))));
  return schedule;
}

CertificateReport build_certificate(const TransformOperator& t, const cvec& tx,
                                    const SamplingPattern& pattern,
                                    const GolfingSchedule& schedule) {
  if (tx.size() != t.out_dim())
    throw std::invalid_argument("build_certificate: tx length mismatch");
  std::size_t n = t.in_dim(), big_n = t.out_dim();

  std::vector<std::size_t> j_support;
  cvec q = signum(tx, &j_support);
  if (j_support.empty())
    throw std::invalid_argument("build_certificate: empty support");
  std::vector<bool> on_j(big_n, false);
  for (std::size_t k : j_support) on_j[k] = true;

  CertificateReport report;
  report.v.assign(big_n, cxd{0.0, 0.0});

  std::size_t cursor = 0;
  for (int stage = 1; stage <= schedule.ell; ++stage) {
    std::size_t mi = schedule.m[static_cast<std::size_t>(stage - 1)];
    double ci = schedule.c[static_cast<std::size_t>(stage - 1)];
    double ti = schedule.t[static_cast<std::size_t>(stage - 1)];
    double qn = norm2(q);
    if (qn == 0.0) break;  // certificate already exact on the support

    struct Attempt {
      cvec vterm, q_next;
      double contraction = 0.0, off = 0.0;
    };
    bool have_best = false;
    Attempt best;
    std::size_t best_log = 0;
    int attempts = 0;
    for (; attempts < 3; ++attempts) {
      if (cursor + mi > pattern.omega.size()) break;
      std::vector<std::size_t> block(pattern.omega.begin() + cursor,
                                     pattern.omega.begin() + cursor + mi);
      cursor += mi;

      cvec w = t.apply(q, Apply::adjoint);           // T* q
      cvec proj = t.apply(w, Apply::tilde);          // TT+ q
      cvec fw = masked(w, block);
      cvec fq = t.apply(fw, Apply::tilde);           // T~ S*S T* q
      double scale = static_cast<double>(n) / static_cast<double>(mi);
      for (auto& z : fq) z *= scale;

      Attempt a;
      a.vterm.resize(big_n);
      a.q_next.resize(big_n);
      for (std::size_t k = 0; k < big_n; ++k) {
        a.vterm[k] = fq[k] + q[k] - proj[k];
        a.q_next[k] = on_j[k] ? proj[k] - fq[k] : cxd{0.0, 0.0};
      }
      a.contraction = norm2(a.q_next) / qn;
      double off = 0.0;
      for (std::size_t k = 0; k < big_n; ++k)
        if (!on_j[k]) off = std::max(off, std::abs(a.vterm[k]));
      a.off = off / qn;

      report.stage_log.push_back(StageAttempt{stage, attempts + 1,
                                              a.contraction, ci, a.off, ti,
                                              false});
      bool ok = a.contraction <= ci && a.off <= ti;
      if (!have_best || a.contraction < best.contraction) {
        best = std::move(a);
        best_log = report.stage_log.size() - 1;
        have_best = true;
      }
      if (ok) break;
    }

    if (!have_best) {
      report.omega_exhausted = true;
      break;
    }
    report.stage_log[best_log].chosen = true;
    for (std::size_t k = 0; k < big_n; ++k) report.v[k] += best.vterm[k];
    q = std::move(best.q_next);
  }
  report.q_final = q;

  // measure the three conditions from the final v
  {
    cvec w = t.apply(report.v, Apply::adjoint);  // T* v
    cvec w_miss = w;
    for (std::size_t idx : pattern.omega_prime) w_miss[idx] = cxd{0.0, 0.0};
    report.vanish_residual = norm2(t.apply(w_miss, Apply::tilde));
  }
  {
    cvec sgn = signum(tx, nullptr);
    double sq = 0.0;
    for (std::size_t k : j_support) sq += std::norm(report.v[k] - sgn[k]);
    report.sign_deviation = std::sqrt(sq);
    double off = 0.0;
    for (std::size_t k = 0; k < big_n; ++k)
      if (!on_j[k]) off = std::max(off, std::abs(report.v[k]));
    report.offsupport_max = off;
  }
  ColumnNorms cn = column_norms(t);
  double norm_product = cn.one_to_two() * cn.pinv_two_to_inf();
  report.sign_threshold =
      1.0 / (7.0 * static_cast<double>(n) * norm_product);
  report.local_isometry_dev =
      local_isometry_deviation(t, pattern, j_support);

  double vn = norm2(report.v);
  report.passed = !report.omega_exhausted &&
                  report.vanish_residual <= 1e-8 * std::max(vn, 1.0) &&
                  report.sign_deviation <= report.sign_threshold &&
                  report.offsupport_max <= report.offsupport_threshold &&
                  report.local_isometry_dev <= report.local_isometry_threshold;
  return report;
}

double local_isometry_deviation(const TransformOperator& t,
                                const SamplingPattern& pattern,
                                const std::vector<std::size_t>& j_support) {
  std::size_t s = j_support.size();
  if (s == 0) return 0.0;
  if (s > 2048)
    throw std::invalid_argument("local_isometry_deviation: support too large");
  std::size_t n = t.in_dim();
  double scale =
      static_cast<double>(n) / static_cast<double>(pattern.m());

  RestrictedColumns rc =
      restricted_columns(t, pattern.omega_prime, j_support);

  Eigen::MatrixXcd dev = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s),
                                                static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < pattern.omega_prime.size(); ++i) {
    double w = scale * static_cast<double>(pattern.multiplicity[i]);
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b)
        dev(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            w * rc.col_t[i][a] * std::conj(rc.col_tilde[i][b]);
  }
  // subtract Pi_J T T+ Pi_J via one projection application per column of J
  cvec e(t.out_dim(), cxd{0.0, 0.0});
  for (std::size_t b = 0; b < s; ++b) {
    e[j_support[b]] = 1.0;
    cvec col = t.apply(t.apply(e, Apply::adjoint), Apply::tilde);  // TT+ e_j
    e[j_support[b]] = 0.0;
    for (std::size_t a = 0; a < s; ++a)
      dev(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -=
          col[j_support[a]];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dev);
  return svd.singularValues()(0);
}

double deviation_e2(const TransformOperator& t, const SamplingPattern& pattern,
                    const std::vector<std::size_t>& j_support, const cvec& q) {
  std::size_t big_n = t.out_dim();
  std::vector<bool> on_j(big_n, false);
  for (std::size_t k : j_support) on_j[k] = true;
  cvec qj = q;
  project(qj, on_j);
  cvec a = t.apply(qj, Apply::pinv);  // T+ Pi_J q
  cvec sampled(a.size(), cxd{0.0, 0.0});
  for (std::size_t idx : pattern.omega) sampled[idx] += a[idx];
  double scale = static_cast<double>(t.in_dim()) /
                 static_cast<double>(pattern.m());
  cvec lhs = t.apply(sampled, Apply::forward);
  cvec mean = t.apply(a, Apply::forward);
  double sq = 0.0;
  for (std::size_t k : j_support) sq += std::norm(scale * lhs[k] - mean[k]);
  return std::sqrt(sq);
}

double deviation_e3(const TransformOperator& t, const SamplingPattern& pattern,
                    const std::vector<std::size_t>& j_support, const cvec& q) {
  std::size_t big_n = t.out_dim();
  std::vector<bool> on_j(big_n, false);
  for (std::size_t k : j_support) on_j[k] = true;
  cvec qj = q;
  project(qj, on_j);
  cvec a = t.apply(qj, Apply::adjoint);  // T* Pi_J q
  cvec sampled(a.size(), cxd{0.0, 0.0});
  for (std::size_t idx : pattern.omega) sampled[idx] += a[idx];
  double scale = static_cast<double>(t.in_dim()) /
                 static_cast<double>(pattern.m());
  cvec lhs = t.apply(sampled, Apply::tilde);
  cvec mean = t.apply(a, Apply::tilde);
  double peak = 0.0;
  for (std::size_t k = 0; k < big_n; ++k)
    if (!on_j[k]) peak = std::max(peak, std::abs(scale * lhs[k] - mean[k]));
  return peak;
}

double deviation_e3_group(const TransformOperator& t,
                          const SamplingPattern& pattern,
                          const GroupPartition& partition,
                          const std::vector<std::size_t>& j_groups,
                          const cvec& q) {
  std::size_t big_l = t.out_dim();
  if (partition.total_size() != big_l)
    throw std::invalid_argument("deviation_e3_group: partition mismatch");
  std::vector<bool> group_on(partition.group_count(), false);
  for (std::size_t g : j_groups) group_on.at(g) = true;
  std::vector<bool> on_j(big_l, false);
  const auto& gof = partition.group_of();
  for (std::size_t k = 0; k < big_l; ++k) on_j[k] = group_on[gof[k]];

  cvec qj = q;
  project(qj, on_j);
  cvec a = t.apply(qj, Apply::adjoint);
  cvec sampled(a.size(), cxd{0.0, 0.0});
  for (std::size_t idx : pattern.omega) sampled[idx] += a[idx];
  double scale = static_cast<double>(t.in_dim()) /
                 static_cast<double>(pattern.m());
  cvec lhs = t.apply(sampled, Apply::tilde);
  cvec mean = t.apply(a, Apply::tilde);
  std::vector<double> acc(partition.group_count(), 0.0);
  for (std::size_t k = 0; k < big_l; ++k)
    acc[gof[k]] += std::norm(scale * lhs[k] - mean[k]);
  double peak = 0.0;
  for (std::size_t g = 0; g < acc.size(); ++g)
    if (!group_on[g]) peak = std::max(peak, std::sqrt(acc[g]));
  return peak;
}

double local_isometry_tail_bound(double delta, std::size_t m, std::size_t s,
                                 double mu, double gamma_residual) {
  double md = static_cast<double>(m), sd = static_cast<double>(s);
  double denom = 1.0 / (1.0 - gamma_residual) + delta / 3.0;
  return 2.0 * sd *
         std::exp(-(md / (sd * mu)) * (delta * delta / 2.0) / denom);
}

std::string certificate_json(const CertificateReport& report) {
  nlohmann::json j;
  j["vanish_residual"] = report.vanish_residual;
  j["sign_deviation"] = report.sign_deviation;
  j["offsupport_max"] = report.offsupport_max;
  j["local_isometry_dev"] = report.local_isometry_dev;
  j["sign_threshold"] = report.sign_threshold;
  j["offsupport_threshold"] = report.offsupport_threshold;
  j["local_isometry_threshold"] = report.local_isometry_threshold;
  j["passed"] = report.passed;
  j["omega_exhausted"] = report.omega_exhausted;
  auto stages = nlohmann::json::array();
  for (const auto& a : report.stage_log) {
    stages.push_back({{"stage", a.stage},
                      {"attempt", a.attempt},
                      {"contraction", a.contraction},
                      {"c_target", a.c_target},
                      {"off_support", a.off_support},
                      {"t_target", a.t_target},
                      {"chosen", a.chosen}});
  }
  j["stages"] = stages;
  std::vector<double> vre, vim;
  vre.reserve(report.v.size());
  vim.reserve(report.v.size());
  for (const auto& z : report.v) {
    vre.push_back(z.real());
    vim.push_back(z.imag());
  }
  j["v_re"] = vre;
  j["v_im"] = vim;
  return j.dump();
}

}  // namespace tsparse
