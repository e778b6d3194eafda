#include "tsparse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace tsparse {

bool is_equality(Variant v) {
  return v == Variant::l1_eq || v == Variant::group_eq;
}

bool is_group(Variant v) {
  return v == Variant::group_eq || v == Variant::group_ball;
}

cxd soft_threshold(cxd z, double tau) {
  double mag = std::abs(z);
  if (mag <= tau || mag == 0.0) return cxd{0.0, 0.0};
  return z * ((mag - tau) / mag);
}

cvec group_soft_threshold(const cvec& block, double tau) {
  double sq = 0.0;
  for (const auto& z : block) sq += std::norm(z);
  double mag = std::sqrt(sq);
  cvec out(block.size(), cxd{0.0, 0.0});
  if (mag <= tau || mag == 0.0) return out;
  double scale = (mag - tau) / mag;
  for (std::size_t i = 0; i < block.size(); ++i) out[i] = block[i] * scale;
  return out;
}

cvec project_ball(const cvec& v, const cvec& center, double radius) {
  if (v.size() != center.size())
    throw std::invalid_argument("project_ball: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sq += std::norm(v[i] - center[i]);
  double dist = std::sqrt(sq);
  if (dist <= radius) return v;
  cvec out(v.size());
  double scale = radius / dist;
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = center[i] + (v[i] - center[i]) * scale;
  return out;
}

double rsnr_db(const cvec& x_hat, const cvec& x) {
  if (x_hat.size() != x.size())
    throw std::invalid_argument("rsnr: length mismatch");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    err += std::norm(x_hat[i] - x[i]);
    ref += std::norm(x[i]);
  }
  if (ref == 0.0) throw std::invalid_argument("rsnr: zero reference signal");
  if (err == 0.0) return kRsnrCapDb;
  double db = -10.0 * std::log10(err / ref);
  return std::min(db, kRsnrCapDb);
}

namespace {

double norm2(const cvec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

double l1_norm(const cvec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::abs(z);
  return s;
}

double group_norm(const cvec& v, const GroupPartition& part,
                  std::vector<double>& scratch) {
  scratch.assign(part.group_count(), 0.0);
  const auto& gof = part.group_of();
  for (std::size_t i = 0; i < v.size(); ++i) scratch[gof[i]] += std::norm(v[i]);
  double s = 0.0;
  for (double g : scratch) s += std::sqrt(g);
  return s;
}

// prox of (1/beta)||.||_{G,1}: per-group shrinkage in place
void group_prox(cvec& v, const GroupPartition& part, double tau,
                std::vector<double>& scratch) {
  scratch.assign(part.group_count(), 0.0);
  const auto& gof = part.group_of();
  for (std::size_t i = 0; i < v.size(); ++i) scratch[gof[i]] += std::norm(v[i]);
  for (double& g : scratch) {
    double mag = std::sqrt(g);
    g = (mag <= tau || mag == 0.0) ? 0.0 : (mag - tau) / mag;
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= scratch[gof[i]];
}

struct Workspace {
  // problem-derived constants
  std::size_t n = 0, big_n = 0;
  std::vector<std::size_t> sample_idx;  // omega_prime
  std::vector<double> weight;           // rho at sampled indices (1 otherwise)
  cvec b;                               // dedup'd observations
  std::vector<double> diag;             // beta1*diag(T*T)+beta2*w^2 on samples
  bool diagonal_path = false;
};

// Observations indexed by draw order (length m) take precedence; a vector of
// length |Omega'| is read against the sorted unique indices.
cvec dedup_observations(const RecoveryProblem& p) {
  const auto& pat = p.pattern;
  if (p.observations.size() == pat.m()) {
    // first occurrence wins; a noiseless equality instance is consistent
    cvec b(pat.unique_count());
    std::vector<bool> seen(pat.unique_count(), false);
    for (std::size_t j = 0; j < pat.m(); ++j) {
      std::size_t idx = pat.omega[j];
      auto it = std::lower_bound(pat.omega_prime.begin(),
                                 pat.omega_prime.end(), idx);
      std::size_t slot =
          static_cast<std::size_t>(it - pat.omega_prime.begin());
      if (!seen[slot]) {
        b[slot] = p.observations[j];
        seen[slot] = true;
      }
    }
    return b;
  }
  if (p.observations.size() == pat.unique_count()) return p.observations;
  throw std::invalid_argument("observations must have length m or |Omega'|");
}

void validate(const RecoveryProblem& p) {
  if (!p.transform.valid()) throw std::invalid_argument("missing transform");
  if (p.pattern.n != p.transform.in_dim())
    throw std::invalid_argument("pattern dimension does not match transform");
  bool eq = is_equality(p.variant);
  // epsilon == 0 exactly when the variant is an equality one
  if (eq && p.epsilon != 0.0)
    throw std::invalid_argument("equality variant requires epsilon == 0");
  if (!eq && p.epsilon <= 0.0)
    throw std::invalid_argument("ball variants require epsilon > 0");
  bool weighted = p.variant == Variant::l1_ball_weighted;
  if (weighted && p.rho.size() != p.transform.in_dim())
    throw std::invalid_argument("weighted variant requires rho of length n");
  if (!weighted && !p.rho.empty())
    throw std::invalid_argument("rho is only valid for the weighted variant");
  if (is_group(p.variant)) {
    if (!p.partition)
      throw std::invalid_argument("group variant requires a partition");
    if (p.partition->total_size() != p.transform.out_dim())
      throw std::invalid_argument("partition does not match transform output");
  } else if (p.partition) {
    throw std::invalid_argument("partition is only valid for group variants");
  }
}

bool detect_ill_posed(const RecoveryProblem& p) {
  // non-injective transform whose null frequencies are not all sampled
  const auto& t = p.transform;
  std::vector<double> colsq;
  if (t.has_spectrum()) {
    const auto& spec = t.spectra();
    colsq.assign(t.in_dim(), 0.0);
    for (const auto& lam : spec)
      for (std::size_t k = 0; k < lam.size(); ++k)
        colsq[k] += std::norm(lam[k]);
  } else if (t.orthonormal()) {
    return false;
  } else if (t.kind() == OpKind::dense &&
             t.in_dim() * t.out_dim() <= kDenseEntryLimit) {
    Eigen::MatrixXcd a = t.to_dense();
    colsq.resize(t.in_dim());
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      colsq[static_cast<std::size_t>(k)] = a.col(k).squaredNorm();
  } else {
    return false;
  }
  double top = *std::max_element(colsq.begin(), colsq.end());
  for (std::size_t k = 0; k < colsq.size(); ++k) {
    if (colsq[k] > 1e-24 * top) continue;
    if (!std::binary_search(p.pattern.omega_prime.begin(),
                            p.pattern.omega_prime.end(), k))
      return true;
  }
  return false;
}

// g-update system A g = rhs with A = beta1 T*T + beta2 Srho* Srho, solved by
// conjugate gradient when T*T is not diagonal in the coordinate basis.
void solve_normal_cg(const TransformOperator& t, const Workspace& ws,
                     double beta1, double beta2, const cvec& rhs, cvec& g,
                     const SolveOptions& opts) {
  auto apply_a = [&](const cvec& v) {
    cvec out = t.apply(t.apply(v, Apply::forward), Apply::adjoint);
    for (auto& z : out) z *= beta1;
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i) {
      std::size_t k = ws.sample_idx[i];
      out[k] += beta2 * ws.weight[i] * ws.weight[i] * v[k];
    }
    return out;
  };
  cvec r = apply_a(g);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  cvec p = r, ap;
  double rs = 0.0;
  for (const auto& z : r) rs += std::norm(z);
  double target = opts.cg_tolerance * std::max(norm2(rhs), 1e-300);
  for (int it = 0; it < opts.cg_max_iterations && std::sqrt(rs) > target;
       ++it) {
    ap = apply_a(p);
    cxd pap{0.0, 0.0};
    for (std::size_t i = 0; i < p.size(); ++i)
      pap += std::conj(p[i]) * ap[i];
    double denom = pap.real();
    if (denom <= 0.0) break;
    double alpha = rs / denom;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rs_new = 0.0;
    for (const auto& z : r) rs_new += std::norm(z);
    double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
}

}  // namespace

double objective_value(const RecoveryProblem& problem, const cvec& g) {
  cvec tg = problem.transform.apply(g, Apply::forward);
  if (is_group(problem.variant)) {
    std::vector<double> scratch;
    return group_norm(tg, *problem.partition, scratch);
  }
  return l1_norm(tg);
}

SolveReport solve(const RecoveryProblem& problem, const SolveOptions& opts) {
  validate(problem);
  const TransformOperator& t = problem.transform;
  const SamplingPattern& pat = problem.pattern;
  const bool eq = is_equality(problem.variant);
  const bool grouped = is_group(problem.variant);
  const bool weighted = problem.variant == Variant::l1_ball_weighted;
  const double beta1 = opts.beta1, beta2 = opts.beta2;

  Workspace ws;
  ws.n = t.in_dim();
  ws.big_n = t.out_dim();
  ws.sample_idx = pat.omega_prime;
  ws.b = dedup_observations(problem);
  ws.weight.assign(ws.sample_idx.size(), 1.0);
  if (weighted)
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
      ws.weight[i] = problem.rho[ws.sample_idx[i]];

  std::vector<double> gram = t.gram_diagonal();
  ws.diagonal_path = !gram.empty();
  if (ws.diagonal_path) {
    ws.diag.assign(ws.n, 0.0);
    for (std::size_t k = 0; k < ws.n; ++k) ws.diag[k] = beta1 * gram[k];
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
      ws.diag[ws.sample_idx[i]] += beta2 * ws.weight[i] * ws.weight[i];
  }

  SolveReport report;
  report.ill_posed_warning = detect_ill_posed(problem);

  // weighted sampled observations: the ball center
  cvec center(ws.sample_idx.size());
  for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
    center[i] = ws.weight[i] * ws.b[i];

  // state
  cvec g(ws.n, cxd{0.0, 0.0});
  for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
    g[ws.sample_idx[i]] = ws.b[i];  // observed entries, zeros elsewhere
  cvec y(ws.big_n, cxd{0.0, 0.0});
  cvec u1(ws.big_n, cxd{0.0, 0.0});
  cvec z(ws.sample_idx.size(), cxd{0.0, 0.0});
  cvec u2(ws.sample_idx.size(), cxd{0.0, 0.0});
  cvec y_prev, z_prev;
  cvec tg = t.apply(g, Apply::forward);
  std::vector<double> scratch;

  const int iters = opts.iterations;
  report.objective.reserve(iters);
  report.primal_residual.reserve(iters);
  report.dual_residual.reserve(iters);

  for (int it = 0; it < iters; ++it) {
    // y-update: prox of the sparsity norm at Tg + u1
    y_prev = y;
    for (std::size_t i = 0; i < ws.big_n; ++i) y[i] = tg[i] + u1[i];
    if (grouped)
      group_prox(y, *problem.partition, 1.0 / beta1, scratch);
    else
      for (auto& v : y) v = soft_threshold(v, 1.0 / beta1);

    // z-update (ball variants): project the sampled entries
    if (!eq) {
      z_prev = z;
      for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
        z[i] = ws.weight[i] * g[ws.sample_idx[i]] + u2[i];
      z = project_ball(z, center, problem.epsilon);
    }

    // g-update: (beta1 T*T + beta2 Srho*Srho) g = rhs
    cvec rhs(ws.big_n);
    for (std::size_t i = 0; i < ws.big_n; ++i) rhs[i] = y[i] - u1[i];
    cvec rhs_g = t.apply(rhs, Apply::adjoint);
    for (auto& v : rhs_g) v *= beta1;
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i) {
      cxd zi = eq ? ws.b[i] - u2[i] : z[i] - u2[i];
      rhs_g[ws.sample_idx[i]] += beta2 * ws.weight[i] * zi;
    }
    if (ws.diagonal_path) {
      for (std::size_t k = 0; k < ws.n; ++k)
        g[k] = ws.diag[k] > 1e-300 ? rhs_g[k] / ws.diag[k] : cxd{0.0, 0.0};
    } else {
      solve_normal_cg(t, ws, beta1, beta2, rhs_g, g, opts);
    }
    tg = t.apply(g, Apply::forward);

    // dual updates
    double cons_sq = 0.0;
    for (std::size_t i = 0; i < ws.big_n; ++i) u1[i] += tg[i] - y[i];
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i) {
      cxd ri = eq ? ws.weight[i] * g[ws.sample_idx[i]] - ws.b[i]
                  : ws.weight[i] * g[ws.sample_idx[i]] - z[i];
      u2[i] += ri;
      cons_sq += std::norm(ri);
    }

    // traces
    double fit_sq = 0.0;
    for (std::size_t i = 0; i < ws.big_n; ++i) fit_sq += std::norm(tg[i] - y[i]);
    report.primal_residual.push_back(std::sqrt(fit_sq + cons_sq));

    cvec dy(ws.big_n);
    for (std::size_t i = 0; i < ws.big_n; ++i) dy[i] = y[i] - y_prev[i];
    cvec dual = t.apply(dy, Apply::adjoint);
    for (auto& v : dual) v *= beta1;
    if (!eq && !z_prev.empty()) {
      for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
        dual[ws.sample_idx[i]] +=
            beta2 * ws.weight[i] * (z[i] - z_prev[i]);
    }
    report.dual_residual.push_back(norm2(dual));

    report.objective.push_back(grouped
                                   ? group_norm(tg, *problem.partition, scratch)
                                   : l1_norm(tg));
    ++report.iterations;

    if (opts.early_stop &&
        report.primal_residual.back() < opts.early_tolerance &&
        report.dual_residual.back() < opts.early_tolerance)
      break;
  }

  report.x_hat = std::move(g);

  // feasibility gap against the stated constraint
  if (eq) {
    double sq = 0.0;
    for (std::size_t j = 0; j < pat.m(); ++j) {
      std::size_t idx = pat.omega[j];
      auto it = std::lower_bound(pat.omega_prime.begin(),
                                 pat.omega_prime.end(), idx);
      std::size_t slot = static_cast<std::size_t>(it - pat.omega_prime.begin());
      sq += std::norm(report.x_hat[idx] - ws.b[slot]);
    }
    report.feasibility_gap = std::sqrt(sq);
  } else {
    double sq = 0.0;
    for (std::size_t i = 0; i < ws.sample_idx.size(); ++i)
      sq += std::norm(ws.weight[i] *
                      (report.x_hat[ws.sample_idx[i]] - ws.b[i]));
    report.feasibility_gap = std::max(0.0, std::sqrt(sq) - problem.epsilon);
  }
  return report;
}

namespace {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::l1_eq: return "l1_eq";
    case Variant::l1_ball: return "l1_ball";
    case Variant::l1_ball_weighted: return "l1_ball_weighted";
    case Variant::group_eq: return "group_eq";
    case Variant::group_ball: return "group_ball";
  }
  return "?";
}

nlohmann::json complex_list(const cvec& v) {
  std::vector<double> re, im;
  re.reserve(v.size());
  im.reserve(v.size());
  for (const auto& z : v) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return nlohmann::json{{"re", re}, {"im", im}};
}

}  // namespace

std::string problem_json(const RecoveryProblem& problem) {
  nlohmann::json j;
  j["variant"] = variant_name(problem.variant);
  j["epsilon"] = problem.epsilon;
  j["n"] = problem.pattern.n;
  j["omega"] = problem.pattern.omega;
  j["seed"] = problem.pattern.seed;
  j["observations"] = complex_list(problem.observations);
  if (!problem.rho.empty()) j["rho"] = problem.rho;
  if (problem.partition) j["groups"] = problem.partition->groups();
  return j.dump();
}

std::string report_json(const SolveReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["feasibility_gap"] = report.feasibility_gap;
  j["ill_posed_warning"] = report.ill_posed_warning;
  j["objective"] = report.objective;
  j["primal_residual"] = report.primal_residual;
  j["dual_residual"] = report.dual_residual;
  j["x_hat"] = complex_list(report.x_hat);
  return j.dump();
}

}  // namespace tsparse
