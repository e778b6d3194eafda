#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsparse/linop.hpp"
#include "tsparse/partition.hpp"
#include "tsparse/sampling.hpp"

namespace tsparse {

enum class Variant { l1_eq, l1_ball, l1_ball_weighted, group_eq, group_ball };

bool is_equality(Variant v);
bool is_group(Variant v);

struct RecoveryProblem {
  TransformOperator transform;  // T = Phi Psi^dagger
  SamplingPattern pattern;
  // equality variants: S_Omega x (length m) or S_Omega' x (length |Omega'|);
  // ball variants: the noisy observations on Omega'
  cvec observations;
  Variant variant = Variant::l1_eq;
  double epsilon = 0.0;
  std::vector<double> rho;  // weights, weighted variant only (length n)
  std::optional<GroupPartition> partition;
};

struct SolveOptions {
  int iterations = 1000;
  double beta1 = 1.0;
  double beta2 = 1.0;
  bool early_stop = false;
  double early_tolerance = 1e-12;
  int cg_max_iterations = 200;
  double cg_tolerance = 1e-10;
};

struct SolveReport {
  cvec x_hat;
  std::vector<double> objective;
  std::vector<double> primal_residual;
  std::vector<double> dual_residual;
  int iterations = 0;
  double feasibility_gap = 0.0;
  bool ill_posed_warning = false;
};

// prox of tau*|.| at z: sgn(z) * max(|z| - tau, 0)
cxd soft_threshold(cxd z, double tau);
// prox of tau*||.||_2 on a block: scale by max(1 - tau/||block||, 0)
cvec group_soft_threshold(const cvec& block, double tau);
// Euclidean projection onto the ball of given center and radius
cvec project_ball(const cvec& v, const cvec& center, double radius);

SolveReport solve(const RecoveryProblem& problem, const SolveOptions& opts = {});

inline constexpr double kRsnrCapDb = 300.0;
inline constexpr double kSuccessThresholdDb = 60.0;

// -20 log10(||x_hat - x|| / ||x||), capped at kRsnrCapDb
double rsnr_db(const cvec& x_hat, const cvec& x);

std::string problem_json(const RecoveryProblem& problem);
std::string report_json(const SolveReport& report);

// ||Tg||_1 or the mixed group norm, matching the problem variant
double objective_value(const RecoveryProblem& problem, const cvec& g);

}  // namespace tsparse
