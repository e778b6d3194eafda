// Acceptance suite: one verdict line per criterion, with the tolerances
// pinned in the assertions. Criteria 4 and 5 print additional evidence on
// whether their reduced-scale thresholds are reachable at all, plus
// scale-matched companion checks of the same claims.
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>

#include "testutil.hpp"
#include "tsparse/bench.hpp"
#include "tsparse/certify.hpp"
#include "tsparse/sampling.hpp"
#include "tsparse/solver.hpp"
#include "tsparse/spectra.hpp"

using namespace tsparse;
using testutil::Rng;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

Stopwatch g_total;

void verdict(int criterion, bool pass, const std::string& details) {
  std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
              details.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

cvec random_invertible_spectrum(Rng& rng, std::size_t n) {
  cvec lam(n);
  for (auto& z : lam) {
    do {
      z = rng.cgaussian();
    } while (std::abs(z) < 0.1);
  }
  return lam;
}

cvec sparse_spectrum_signal(Rng& rng, std::size_t n, std::size_t s) {
  cvec f(n, cxd{0.0, 0.0});
  std::size_t placed = 0;
  while (placed < s) {
    std::size_t idx = rng.index(n);
    if (std::abs(f[idx]) > 0.0) continue;
    cxd g = rng.cgaussian();
    f[idx] = g + (g.real() >= 0 ? cxd{0.5, 0.0} : cxd{-0.5, 0.0});
    ++placed;
  }
  return f;
}

bench::ExperimentConfig phantom_config(const std::string& objective,
                                       bench::DensityMode mode,
                                       std::vector<std::size_t> ms,
                                       int trials) {
  bench::ExperimentConfig c;
  c.signal_kind = "phantom";
  c.n1 = 64;
  c.n2 = 64;
  c.phi_kind = "tv2";
  c.objective = objective;
  c.density_mode = mode;
  c.cross_phi_kind = "haar2";
  c.s_list = {0};
  c.m_list = std::move(ms);
  c.trials = trials;
  c.seed = 20250811;
  c.threads = 4;
  return c;
}

// exactly feasible competitor: the solver output with the sampled entries
// overwritten by the observations; an objective below the ground truth's
// certifies that the ground truth is not the program's minimizer
double competitor_objective_ratio(const RecoveryProblem& prob,
                                  const cvec& x_true, int iterations) {
  SolveOptions so;
  so.iterations = iterations;
  SolveReport rep = solve(prob, so);
  cvec g = rep.x_hat;
  for (std::size_t i = 0; i < prob.pattern.unique_count(); ++i) {
    std::size_t k = prob.pattern.omega_prime[i];
    g[k] = x_true[k];
  }
  return objective_value(prob, g) / objective_value(prob, x_true);
}

}  // namespace

TEST_CASE("criterion 01: uniform density for invertible circulants") {
  Stopwatch watch;
  Rng rng(10001);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    cvec lam = random_invertible_spectrum(rng, 64);
    auto t = compose(
        TransformOperator::circulant(testutil::kernel_from_spectrum(lam)),
        TransformOperator::dft(64));
    SamplingDensity d = density(incoherence(t));
    for (double p : d.p) worst = std::max(worst, std::abs(p - 1.0 / 64.0));
  }
  double secs = watch.seconds();
  bool pass = worst < 1e-10 && secs < 1.0;
  verdict(1, pass, fmt("max |p_k - 1/n| = %.3g over 20 kernels in %.2fs",
                       worst, secs));
  CHECK(worst < 1e-10);
  CHECK(secs < 1.0);
}

TEST_CASE("criterion 02: uniform group density for circulant stacks") {
  Rng rng(10002);
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<cvec> kernels;
    for (int j = 0; j < 2; ++j)
      kernels.push_back(
          testutil::kernel_from_spectrum(random_invertible_spectrum(rng, 64)));
    auto t = compose(TransformOperator::circulant_stack(kernels, 64),
                     TransformOperator::dft(64));
    auto part = GroupPartition::circulant_stack(64, 2);
    SamplingDensity d = group_density(group_incoherence(t, part));
    for (double p : d.p) worst = std::max(worst, std::abs(p - 1.0 / 64.0));
  }
  bool pass = worst < 1e-10;
  verdict(2, pass, fmt("max |p_k - 1/n| = %.3g over 10 two-filter stacks",
                       worst));
  CHECK(worst < 1e-10);
}

TEST_CASE("criterion 03: closed-form gamma matches golden-section search") {
  Rng rng(10003);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    std::size_t cols = 6 + rng.index(11);           // 6 .. 16
    std::size_t rows = cols + 2 + rng.index(17 - 1); // up to 32
    rows = std::min<std::size_t>(rows, 32);
    Eigen::MatrixXcd a = testutil::random_injective(rng, rows, cols);
    auto t = TransformOperator::dense(a);
    double closed = gamma_opt(t).gamma;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a,
                                                       Eigen::EigenvaluesOnly);
    auto f = [&](double g) {
      double v = 0.0;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        v = std::max(v, std::abs(g * es.eigenvalues()(i) - 1.0));
      return v;
    };
    double lo = 0.0, hi = 2.0 / es.eigenvalues()(es.eigenvalues().size() - 1) +
                              1.0;
    // bracket on a fine grid, then golden-section refinement
    double best = lo, best_val = 1e300;
    for (int i = 0; i <= 100000; ++i) {
      double g = lo + (hi - lo) * i / 100000.0;
      double v = f(g);
      if (v < best_val) {
        best_val = v;
        best = g;
      }
    }
    double a0 = best - (hi - lo) / 100000.0, b0 = best + (hi - lo) / 100000.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b0 - phi * (b0 - a0), d = a0 + phi * (b0 - a0);
    for (int it = 0; it < 200; ++it) {
      if (f(c) < f(d))
        b0 = d;
      else
        a0 = c;
      c = b0 - phi * (b0 - a0);
      d = a0 + phi * (b0 - a0);
    }
    worst = std::max(worst, std::abs(closed - 0.5 * (a0 + b0)));
  }
  bool pass = worst < 1e-8;
  verdict(3, pass, fmt("max |closed - searched| = %.3g over 20 operators",
                       worst));
  CHECK(worst < 1e-8);
}

TEST_CASE("criterion 04: 2D anisotropic TV phase transition at 64x64") {
  // stated points: m/n = 1/32 and 1/8, two-step uniform density, 10 trials
  auto cfg = phantom_config("l1", bench::DensityMode::two_step_uniform,
                            {4096 / 32, 4096 / 8}, 10);
  bench::GridResult grid = bench::run_grid(cfg);
  double rate_low = grid.cells[0].rate();
  double rate_high = grid.cells[1].rate();
  bool pass = rate_low <= 0.2 && rate_high >= 0.9;
  verdict(4, pass,
          fmt("rate(m/n=1/32) = %.2f (need <= 0.2), rate(m/n=1/8) = %.2f "
              "(need >= 0.9)",
              rate_low, rate_high));

  // evidence on the m/n = 1/8 point: an exactly feasible competitor beats
  // the ground-truth objective, so the stated threshold is unreachable for
  // this program at this scale regardless of the solver
  {
    bench::Instruments ins = bench::prepare(cfg);
    cvec x = ins.psi.apply(ins.base.data, Apply::forward);
    SamplingPattern pat = draw(ins.sampling, 4096 / 8, 991);
    RecoveryProblem prob;
    prob.transform = ins.transform;
    prob.pattern = pat;
    prob.observations = subsample(pat, x, false);
    prob.variant = Variant::l1_eq;
    double ratio = competitor_objective_ratio(prob, x, 4000);
    std::printf(
        "criterion 4 evidence: at m/n = 1/8 a feasible point has objective "
        "%.4f x ground truth (minimizer differs from the signal)\n",
        ratio);
    CHECK(ratio < 1.0);
  }

  // companion at the same scale with the sample budget matched to the
  // phantom's gradient support (the transition location scales with t):
  // t(64x64) = 620, success arrives near m = 1.65 t
  auto companion = phantom_config("l1", bench::DensityMode::two_step_uniform,
                                  {512, 1024}, 10);
  bench::GridResult comp = bench::run_grid(companion);
  std::printf(
      "criterion 4 companion: rate(m=512 = 0.83 t) = %.2f, rate(m=1024 = "
      "1.65 t) = %.2f\n",
      comp.cells[0].rate(), comp.cells[1].rate());
  CHECK(comp.cells[0].rate() <= 0.2);
  CHECK(comp.cells[1].rate() >= 0.9);

  CHECK(rate_low <= 0.2);
  CHECK_MESSAGE(rate_high >= 0.9,
                "stated threshold is infeasible at 64x64 (see evidence)");

  if (std::getenv("TSPARSE_FULL_SCALE")) {
    bench::ExperimentConfig full =
        phantom_config("l1", bench::DensityMode::two_step_uniform,
                       {65536 / 32, 65536 / 16}, 50);
    full.n1 = full.n2 = 256;
    bench::GridResult fg = bench::run_grid(full);
    std::printf("criterion 4 full scale (1000 iters): rate(1/32) = %.2f, "
                "rate(1/16) = %.2f\n",
                fg.cells[0].rate(), fg.cells[1].rate());
  }
}

TEST_CASE("criterion 05: isotropic TV density superiority at 64x64") {
  // stated: gap >= 0.3 at some m/n in {1/16, 3/32, 1/8}, 10 trials each
  std::vector<std::size_t> ms = {4096 / 16, 4096 * 3 / 32, 4096 / 8};
  auto tv_cfg =
      phantom_config("group", bench::DensityMode::two_step_variable, ms, 10);
  auto cross_cfg = phantom_config("group", bench::DensityMode::cross, ms, 10);
  bench::GridResult tv = bench::run_grid(tv_cfg);
  bench::GridResult cross = bench::run_grid(cross_cfg);
  double best_gap = -1.0;
  std::string table;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    double gap = tv.cells[i].rate() - cross.cells[i].rate();
    best_gap = std::max(best_gap, gap);
    table += fmt("m=%zu: %.2f vs %.2f; ", ms[i], tv.cells[i].rate(),
                 cross.cells[i].rate());
  }
  bool pass = best_gap >= 0.3;
  verdict(5, pass, fmt("%sbest gap %.2f (need >= 0.3)", table.c_str(),
                       best_gap));

  // evidence: at these m both programs provably fail (feasible competitor
  // below the ground-truth objective even for the matched density)
  {
    bench::Instruments ins = bench::prepare(tv_cfg);
    cvec x = ins.psi.apply(ins.base.data, Apply::forward);
    SamplingPattern pat = draw(ins.sampling, ms.back(), 992);
    RecoveryProblem prob;
    prob.transform = ins.transform;
    prob.pattern = pat;
    prob.observations = subsample(pat, x, false);
    prob.variant = Variant::group_eq;
    prob.partition = ins.partition;
    double ratio = competitor_objective_ratio(prob, x, 4000);
    std::printf(
        "criterion 5 evidence: at m/n = 1/8 a feasible point has objective "
        "%.4f x ground truth for the mixed norm\n",
        ratio);
    CHECK(ratio < 1.0);
  }

  // companion at the sample budget where the densities separate (2.3 t):
  // matched density succeeds, wavelet cross density does not
  std::vector<std::size_t> cms = {1408};
  bench::GridResult ctv = bench::run_grid(
      phantom_config("group", bench::DensityMode::two_step_variable, cms, 10));
  bench::GridResult ccross = bench::run_grid(
      phantom_config("group", bench::DensityMode::cross, cms, 10));
  double cgap = ctv.cells[0].rate() - ccross.cells[0].rate();
  std::printf("criterion 5 companion: m = 1408 = 2.27 t: %.2f vs %.2f (gap "
              "%.2f)\n",
              ctv.cells[0].rate(), ccross.cells[0].rate(), cgap);
  CHECK(cgap >= 0.3);

  CHECK_MESSAGE(best_gap >= 0.3,
                "stated m/n grid sits below the 64x64 transition for both "
                "densities (see evidence)");
}

TEST_CASE("criterion 06: classical partial-Fourier sanity") {
  std::size_t n = 128, s = 5, m = 60;
  auto psi = TransformOperator::dft(n);
  auto t = compose(TransformOperator::identity(n), psi);
  int hits = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(42000 + trial);
    cvec f = sparse_spectrum_signal(rng, n, s);
    cvec x = psi.apply(f, Apply::forward);
    SamplingPattern pat = draw(uniform_density(n), m, 52000 + trial);
    RecoveryProblem prob;
    prob.transform = t;
    prob.pattern = pat;
    prob.observations = subsample(pat, x, false);
    prob.variant = Variant::l1_eq;
    SolveReport rep = solve(prob);
    if (rsnr_db(rep.x_hat, x) >= 60.0) ++hits;
  }
  double rate = static_cast<double>(hits) / trials;
  bool pass = rate >= 0.9;
  verdict(6, pass, fmt("success rate %.2f over %d trials (need >= 0.9)",
                       rate, trials));
  CHECK(rate >= 0.9);
}

TEST_CASE("criterion 07: prox operators match brute-force minimization") {
  Rng rng(10007);
  auto objective = [](cxd u, cxd z, double tau) {
    return tau * std::abs(u) + 0.5 * std::norm(u - z);
  };
  double worst_scalar = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    cxd z = 0.6 * rng.cgaussian();
    double tau = rng.unit();
    cxd closed = soft_threshold(z, tau);
    // coarse grid then refinement; strong convexity localizes the optimum
    double r = std::abs(z) + 0.05;
    cxd best{0.0, 0.0};
    double best_val = objective(best, z, tau);
    for (double re = -r; re <= r; re += 0.01)
      for (double im = -r; im <= r; im += 0.01) {
        double v = objective(cxd{re, im}, z, tau);
        if (v < best_val) {
          best_val = v;
          best = cxd{re, im};
        }
      }
    for (double re = best.real() - 0.03; re <= best.real() + 0.03; re += 5e-4)
      for (double im = best.imag() - 0.03; im <= best.imag() + 0.03;
           im += 5e-4) {
        double v = objective(cxd{re, im}, z, tau);
        if (v < best_val) best_val = v;
      }
    double fc = objective(closed, z, tau);
    worst_scalar = std::max(worst_scalar, std::abs(fc - best_val));
    REQUIRE(fc <= best_val + 1e-12);
  }

  auto group_objective = [](double u0, double u1, double z0, double z1,
                            double tau) {
    return tau * std::hypot(u0, u1) +
           0.5 * ((u0 - z0) * (u0 - z0) + (u1 - z1) * (u1 - z1));
  };
  double worst_group = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    // real two-dimensional block: the full grid is tractable and the
    // complex case is covered by the scalar grid above plus phase symmetry
    double z0 = 1.2 * (rng.unit() - 0.5), z1 = 1.2 * (rng.unit() - 0.5);
    double tau = rng.unit();
    cvec closed = group_soft_threshold({cxd{z0, 0.0}, cxd{z1, 0.0}}, tau);
    double fc = group_objective(closed[0].real(), closed[1].real(), z0, z1,
                                tau);
    double r = std::hypot(z0, z1) + 0.05;
    double best_val = group_objective(0.0, 0.0, z0, z1, tau);
    double b0 = 0.0, b1 = 0.0;
    for (double u0 = -r; u0 <= r; u0 += 0.01)
      for (double u1 = -r; u1 <= r; u1 += 0.01) {
        double v = group_objective(u0, u1, z0, z1, tau);
        if (v < best_val) {
          best_val = v;
          b0 = u0;
          b1 = u1;
        }
      }
    for (double u0 = b0 - 0.02; u0 <= b0 + 0.02; u0 += 1e-3)
      for (double u1 = b1 - 0.02; u1 <= b1 + 0.02; u1 += 1e-3) {
        double v = group_objective(u0, u1, z0, z1, tau);
        if (v < best_val) best_val = v;
      }
    worst_group = std::max(worst_group, std::abs(fc - best_val));
    REQUIRE(fc <= best_val + 1e-12);
  }
  bool pass = worst_scalar < 1e-6 && worst_group < 1e-6;
  verdict(7, pass,
          fmt("objective gaps: scalar %.3g, group %.3g over 100 instances "
              "each",
              worst_scalar, worst_group));
  CHECK(worst_scalar < 1e-6);
  CHECK(worst_group < 1e-6);
}

TEST_CASE("criterion 08: passing certificates imply recovery") {
  std::size_t n = 128, s = 5, m = 96;
  auto psi = TransformOperator::dft(n);
  auto t = compose(TransformOperator::identity(n), psi);
  IncoherenceProfile prof = incoherence(t);
  GolfingSchedule reference =
      golfing_schedule(s, n, n, 1.0, prof.mu, prof.norm_product());

  // stated configuration: the same m = 96 pattern feeds the certificate
  // (schedule fitted to the pattern) and the solver
  int passed = 0, implied = 0;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(61000 + seed);
    cvec f = sparse_spectrum_signal(rng, n, s);
    cvec x = psi.apply(f, Apply::forward);
    cvec tx = t.apply(x, Apply::forward);
    SamplingPattern pat = draw(uniform_density(n), m, 62000 + seed);
    CertificateReport rep =
        build_certificate(t, tx, pat, fit_schedule(reference, m));
    if (!rep.passed) continue;
    ++passed;
    RecoveryProblem prob;
    prob.transform = t;
    prob.pattern = pat;
    prob.observations = subsample(pat, x, false);
    prob.variant = Variant::l1_eq;
    if (rsnr_db(solve(prob).x_hat, x) >= 60.0) ++implied;
  }
  bool stated_ok = implied == passed;

  // companion with the printed stage schedule (pattern sized for it), so
  // the implication is exercised on certificates that do pass
  int cpassed = 0, cimplied = 0;
  const int cseeds = 10;
  for (int seed = 0; seed < cseeds; ++seed) {
    Rng rng(63000 + seed);
    cvec f = sparse_spectrum_signal(rng, n, s);
    cvec x = psi.apply(f, Apply::forward);
    cvec tx = t.apply(x, Apply::forward);
    SamplingPattern pat =
        draw(uniform_density(n), 3 * reference.total(), 64000 + seed);
    CertificateReport rep = build_certificate(t, tx, pat, reference);
    if (!rep.passed) continue;
    ++cpassed;
    RecoveryProblem prob;
    prob.transform = t;
    prob.pattern = pat;
    prob.observations = subsample(pat, x, false);
    prob.variant = Variant::l1_eq;
    if (rsnr_db(solve(prob).x_hat, x) >= 60.0) ++cimplied;
  }
  bool pass = stated_ok && cpassed >= 8 && cimplied == cpassed;
  verdict(8, pass,
          fmt("m=96: %d passed, implication %d/%d; scheduled pattern: %d/%d "
              "passed, implication %d/%d",
              passed, implied, passed, cpassed, cseeds, cimplied, cpassed));
  CHECK(implied == passed);
  CHECK(cpassed >= 8);
  CHECK(cimplied == cpassed);
}

TEST_CASE("criterion 09: restricted isometry deviation tail") {
  std::size_t n = 64, s = 8;
  auto t = compose(TransformOperator::identity(n), TransformOperator::dft(n));
  IncoherenceProfile prof = incoherence(t);
  // smallest m whose tail bound at delta = 1/2 reaches 0.1
  std::size_t m = 1;
  while (local_isometry_tail_bound(0.5, m, s, prof.mu, prof.gamma_residual) >
         0.1)
    ++m;
  const int trials = 1000;
  int exceed = 0;
  Rng rng(10009);
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::size_t> j;
    while (j.size() < s) {
      std::size_t idx = rng.index(n);
      if (std::find(j.begin(), j.end(), idx) == j.end()) j.push_back(idx);
    }
    SamplingPattern pat = draw(uniform_density(n), m, 71000 + trial);
    if (local_isometry_deviation(t, pat, j) > 0.5) ++exceed;
  }
  double empirical = static_cast<double>(exceed) / trials;
  double margin = 3.0 * std::sqrt(0.1 * 0.9 / trials);
  bool pass = empirical <= 0.1 + margin;
  verdict(9, pass,
          fmt("m = %zu, P(dev > 1/2) = %.4f, bound 0.1 + 3 sigma = %.4f", m,
              empirical, 0.1 + margin));
  CHECK(empirical <= 0.1 + margin);
}

TEST_CASE("criterion 10: grid runs are byte-deterministic") {
  bench::ExperimentConfig c;
  c.signal_kind = "synthetic1d";
  c.n1 = 128;
  c.n2 = 1;
  c.phi_kind = "haar";
  c.haar_level = 4;
  c.density_mode = bench::DensityMode::variable;
  c.s_list = {4, 8};
  c.m_list = {48, 64};
  c.trials = 5;
  c.seed = 987;
  c.threads = 3;
  std::string csv1 = bench::grid_csv(bench::run_grid(c));
  std::string csv2 = bench::grid_csv(bench::run_grid(c));
  bool pass = csv1 == csv2;
  verdict(10, pass, fmt("two runs, %zu bytes each, identical = %s",
                        csv1.size(), pass ? "yes" : "no"));
  CHECK(csv1 == csv2);
}

TEST_CASE("total wall time") {
  double secs = g_total.seconds();
  std::printf("acceptance suite wall time: %.1f s\n", secs);
  CHECK(secs < 1800.0);  // reduced-scale budget: under 30 minutes
}
