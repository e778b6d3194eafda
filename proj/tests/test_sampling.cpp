#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "testutil.hpp"
#include "tsparse/sampling.hpp"
#include "tsparse/spectra.hpp"

using namespace tsparse;
using testutil::Rng;

TEST_CASE("uniform draw ranges, determinism, and marginals") {
  SamplingDensity d = uniform_density(4);
  SamplingPattern a = draw(d, 4, 7);
  SamplingPattern b = draw(d, 4, 7);
  CHECK(a.omega == b.omega);
  CHECK(a.seed == 7);
  for (std::size_t idx : a.omega) CHECK(idx < 4);

  SamplingPattern c = draw(d, 4, 8);
  CHECK(a.omega != c.omega);  // different seed, different draw

  // chi-square style check on 1e5 draws
  SamplingPattern big = draw(d, 100000, 99);
  std::vector<std::size_t> counts(4, 0);
  for (std::size_t idx : big.omega) ++counts[idx];
  double expect = 25000.0, sigma = std::sqrt(100000.0 * 0.25 * 0.75);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(std::abs(static_cast<double>(counts[k]) - expect) <= 3.0 * sigma);
}

TEST_CASE("two-step draw always takes the forced index first") {
  auto t = compose(TransformOperator::finite_difference_1d(32),
                   TransformOperator::dft(32));
  SamplingDensity d = two_step_density(t);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SamplingPattern p = draw(d, 10, seed);
    REQUIRE(p.omega.size() == 10);
    CHECK(p.omega[0] == 0);
    for (std::size_t j = 1; j < 10; ++j) CHECK(p.omega[j] >= 1);
  }
}

TEST_CASE("point mass density") {
  SamplingDensity d;
  d.p = {0.0, 0.0, 0.0, 1.0, 0.0};
  SamplingPattern p = draw(d, 5, 3);
  CHECK(p.omega == std::vector<std::size_t>(5, 3));
  CHECK(p.max_repeat == 5);
  CHECK(p.unique_count() == 1);
}

TEST_CASE("subsample keeps or collapses repeats") {
  cvec x = {10.0, 20.0, 30.0, 40.0, 50.0};
  SamplingPattern p = pattern_from_indices({1, 1, 4}, 5);
  cvec kept = subsample(p, x, false);
  CHECK(kept == cvec{20.0, 20.0, 50.0});
  cvec uniq = subsample(p, x, true);
  CHECK(uniq == cvec{20.0, 50.0});
}

TEST_CASE("full sampling returns the signal up to ordering") {
  Rng rng(5);
  cvec x = rng.cvector(6);
  SamplingPattern p = pattern_from_indices({0, 1, 2, 3, 4, 5}, 6);
  CHECK(subsample(p, x, false) == x);
}

TEST_CASE("subsample and embed are adjoint") {
  Rng rng(55);
  SamplingDensity d = uniform_density(16);
  SamplingPattern p = draw(d, 24, 11);  // repetitions near certain
  for (int trial = 0; trial < 10; ++trial) {
    cvec x = rng.cvector(16);
    cvec y = rng.cvector(p.m());
    cxd lhs = testutil::inner(subsample(p, x, false), y);
    cxd rhs = testutil::inner(x, embed(p, y, false));
    CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("embed scatter-adds repeats") {
  SamplingPattern p = pattern_from_indices({1, 1}, 4);
  cvec out = embed(p, {1.0, 1.0}, false);
  CHECK(out == cvec{0.0, 2.0, 0.0, 0.0});
  cvec out2 = embed(p, {1.0}, true);
  CHECK(out2 == cvec{0.0, 1.0, 0.0, 0.0});
}

TEST_CASE("deduplicated sampling operator is idempotent") {
  Rng rng(77);
  SamplingPattern p = draw(uniform_density(12), 20, 13);
  cvec x = rng.cvector(12);
  cvec once = embed(p, subsample(p, x, true), true);
  cvec twice = embed(p, subsample(p, once, true), true);
  CHECK(once == twice);  // exact
}

TEST_CASE("multiplicity identity against the multiset operator") {
  Rng rng(78);
  SamplingPattern p = draw(uniform_density(10), 25, 17);
  cvec x = rng.cvector(10);
  // S' S'* (S* S x) == S* S x exactly: integer-weighted arithmetic
  cvec ssx = embed(p, subsample(p, x, false), false);
  cvec left = embed(p, subsample(p, ssx, true), true);
  CHECK(left == ssx);
}

TEST_CASE("pattern json round trip") {
  SamplingPattern p = draw(uniform_density(20), 15, 123);
  SamplingPattern q = pattern_from_json(pattern_json(p));
  CHECK(q.omega == p.omega);
  CHECK(q.n == p.n);
  CHECK(q.seed == p.seed);
  CHECK(q.omega_prime == p.omega_prime);
  CHECK(q.max_repeat == p.max_repeat);
}

TEST_CASE("pgm mask export") {
  namespace fs = std::filesystem;
  SamplingPattern p = pattern_from_indices({0, 5, 10, 15}, 16);
  std::string path = (fs::temp_directory_path() / "tsparse_mask.pgm").string();
  write_pgm_mask(p, 4, 4, path);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "P5");
  std::string dims, depth;
  std::getline(in, dims);
  std::getline(in, depth);
  CHECK(dims == "4 4");
  CHECK(depth == "255");
  std::vector<unsigned char> pix(16);
  in.read(reinterpret_cast<char*>(pix.data()), 16);
  std::size_t lit = 0;
  for (unsigned char v : pix) {
    CHECK((v == 0 || v == 255));
    if (v == 255) ++lit;
  }
  CHECK(lit == 4);
  fs::remove(path);
}

TEST_CASE("empirical isotropy on the range of T") {
  // (n/m) E[T S*S T+] approaches T T+ as trials grow
  std::size_t n = 16;
  Rng rng(91);
  cvec lam(n);
  for (auto& z : lam) z = cxd{0.8 + rng.unit(), rng.unit() - 0.5};
  auto t = compose(
      TransformOperator::circulant(testutil::kernel_from_spectrum(lam)),
      TransformOperator::dft(n));
  Eigen::MatrixXcd td = t.to_dense();
  Eigen::MatrixXcd tpinv = t.to_dense(Apply::pinv);
  Eigen::MatrixXcd projector = td * tpinv;

  auto estimate = [&](int trials, std::uint64_t seed0) {
    std::size_t m = 8;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (int trial = 0; trial < trials; ++trial) {
      SamplingPattern p = draw(uniform_density(n), m, seed0 + trial);
      Eigen::MatrixXcd mask = Eigen::MatrixXcd::Zero(n, n);
      for (std::size_t j = 0; j < p.unique_count(); ++j)
        mask(static_cast<Eigen::Index>(p.omega_prime[j]),
             static_cast<Eigen::Index>(p.omega_prime[j])) =
            static_cast<double>(p.multiplicity[j]);
      acc += (static_cast<double>(n) / m) * td * mask * tpinv;
    }
    return ((acc / trials) - projector).operatorNorm();
  };

  double err_small = estimate(100, 1000);
  double err_large = estimate(1600, 100000);
  CHECK(err_large < err_small);
  CHECK(err_large < 0.25);
}

TEST_CASE("draw sequence is locked across platforms") {
  // fixed generator + inverse CDF: the exact sequence is part of the
  // contract (seed 42, uniform density on 16 bins)
  SamplingPattern p = draw(uniform_density(16), 8, 42);
  CHECK(p.omega == std::vector<std::size_t>{12, 10, 12, 2, 14, 1, 9, 5});
  CHECK(p.max_repeat == 2);
}

TEST_CASE("draw rejects bad inputs") {
  SamplingDensity d = uniform_density(8);
  CHECK_THROWS_AS(draw(d, 0, 1), std::invalid_argument);
  SamplingDensity neg;
  neg.p = {0.5, -0.1, 0.6};
  CHECK_THROWS_AS(draw(neg, 3, 1), std::invalid_argument);
  SamplingDensity short_sum;
  short_sum.p = {0.2, 0.2, 0.2};
  CHECK_THROWS_AS(draw(short_sum, 3, 1), std::invalid_argument);
  // forced indices must leave room for random draws
  auto t = compose(TransformOperator::finite_difference_1d(8),
                   TransformOperator::dft(8));
  SamplingDensity ts = two_step_density(t);
  CHECK_THROWS_AS(draw(ts, 1, 1), std::invalid_argument);
}
