#pragma once

#include <cstddef>
#include <vector>

#include "tsparse/linop.hpp"
#include "tsparse/partition.hpp"
#include "tsparse/sampling.hpp"

namespace tsparse {

// Stage parameters of the golfing construction. c and t are the per-stage
// contraction and off-support targets, m the per-stage sample counts.
struct GolfingSchedule {
  int ell = 0;
  std::vector<double> c;
  std::vector<double> t;
  std::vector<std::size_t> m;
  double beta = 1.0;

  std::size_t total() const;
};

// Parameter schedule as printed in the analysis; `use_log2` switches the
// base of the "log N" occurrences (sensitivity knob, natural log default).
GolfingSchedule golfing_schedule(std::size_t s, std::size_t n,
                                 std::size_t big_n, double beta, double mu,
                                 double norm_product, bool use_log2 = false);

// Rescale the per-stage sample counts so that three retry rounds fit into a
// pattern with m_available draws; c/t targets are kept.
GolfingSchedule fit_schedule(GolfingSchedule schedule,
                             std::size_t m_available);

struct StageAttempt {
  int stage = 0;
  int attempt = 0;
  double contraction = 0.0;
  double c_target = 0.0;
  double off_support = 0.0;
  double t_target = 0.0;
  bool chosen = false;
};

struct CertificateReport {
  cvec v;
  cvec q_final;                    // residual of the support recursion
  double vanish_residual = 0.0;    // ||(TT+ - T S' S'* T+)* v||
  double sign_deviation = 0.0;     // ||Pi_J (v - sgn(Tx))||_2
  double offsupport_max = 0.0;     // ||(I - Pi_J) v||_inf
  double local_isometry_dev = 0.0;
  double sign_threshold = 0.0;     // 1 / (7 n ||T||_{1->2} ||T+||_{2->inf})
  double offsupport_threshold = 0.5;
  double local_isometry_threshold = 0.5;
  bool passed = false;
  bool omega_exhausted = false;
  std::vector<StageAttempt> stage_log;
};

// Golfing construction of the inexact dual certificate for the signal whose
// transform is `tx` (its support and signs seed the recursion). Stages
// consume blocks of the pattern in draw order; a stage missing its targets
// is retried on the next unused block, up to three attempts, after which the
// best attempt is kept. All reported quantities are measured from the final
// v, never assumed.
CertificateReport build_certificate(const TransformOperator& t, const cvec& tx,
                                    const SamplingPattern& pattern,
                                    const GolfingSchedule& schedule);

// || (n/m) Pi_J T S*S T+ Pi_J - Pi_J T T+ Pi_J ||, dense on the |J| x |J|
// restriction.
double local_isometry_deviation(const TransformOperator& t,
                                const SamplingPattern& pattern,
                                const std::vector<std::size_t>& j_support);

// Single-draw deviation quantities of the concentration estimates.
double deviation_e2(const TransformOperator& t, const SamplingPattern& pattern,
                    const std::vector<std::size_t>& j_support, const cvec& q);
double deviation_e3(const TransformOperator& t, const SamplingPattern& pattern,
                    const std::vector<std::size_t>& j_support, const cvec& q);
double deviation_e3_group(const TransformOperator& t,
                          const SamplingPattern& pattern,
                          const GroupPartition& partition,
                          const std::vector<std::size_t>& j_groups,
                          const cvec& q);

// Tail bound of the restricted-isometry estimate at deviation delta
// (used to pick sample sizes in the Monte Carlo checks).
double local_isometry_tail_bound(double delta, std::size_t m, std::size_t s,
                                 double mu, double gamma_residual);

std::string certificate_json(const CertificateReport& report);

}  // namespace tsparse
