#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsparse/linop.hpp"
#include "tsparse/partition.hpp"
#include "tsparse/sampling.hpp"
#include "tsparse/solver.hpp"
#include "tsparse/spectra.hpp"

namespace tsparse::bench {

// Column-major complex raster (cols == 1 for 1D signals).
struct Signal {
  cvec data;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::size_t size() const { return data.size(); }
};

// Modified Shepp-Logan phantom at the requested resolution, values in [0, 1].
Signal phantom(std::size_t n1, std::size_t n2);

// Deterministic piecewise-smooth complex test signal (default length 512),
// standing in for a sampled scan line.
cvec reference_signal_1d(std::size_t n = 512);

// raw signal files: 16-byte header {magic "TSPR", u32 ndim, u32 d0, u32 d1},
// then float64 little-endian re/im pairs
void write_signal(const std::string& path, const Signal& s);
Signal read_signal(const std::string& path);

// solver output: u64 count header then count re/im float64 pairs
void write_solution(const std::string& path, const cvec& x);
cvec read_solution(const std::string& path);

// Keep the s largest coefficients of the synthesis transform (group-l2
// magnitudes when a partition is given) and synthesize back. s == 0 yields
// the zero signal; s >= coefficient count returns the input.
cvec synthesize_sparse(const cvec& base, const TransformOperator& phi_synth,
                       std::size_t s,
                       const GroupPartition* partition = nullptr);

// 1D finite difference with the last row replaced by all-ones: invertible
// companion used for signal synthesis only.
TransformOperator tv_synthesis_operator(std::size_t n);

enum class DensityMode {
  uniform,
  variable,
  two_step_uniform,
  two_step_variable,
  cross,
};

struct ExperimentConfig {
  std::string signal_kind = "synthetic1d";  // synthetic1d | phantom | file
  std::string signal_path;
  std::size_t n1 = 512;
  std::size_t n2 = 1;

  std::string phi_kind = "haar";  // haar | haar2 | tv | tv2 | identity | circulant
  int haar_level = 6;
  cvec circulant_kernel;
  std::string objective = "l1";  // l1 | group

  DensityMode density_mode = DensityMode::variable;
  std::string cross_phi_kind;  // transform behind the cross density
  int cross_haar_level = 0;

  std::vector<std::size_t> s_list{0};  // 0: use the base signal as-is
  std::vector<std::size_t> m_list;
  int trials = 1;
  std::uint64_t seed = 1;
  double threshold_db = kSuccessThresholdDb;
  SolveOptions admm;
  int threads = 1;

  std::size_t n() const { return n1 * n2; }
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

// Everything derived from a config that the subcommands share.
struct Instruments {
  TransformOperator phi, psi, transform;
  std::optional<GroupPartition> partition;
  SamplingDensity sampling;
  Signal base;
  Variant variant = Variant::l1_eq;
};
Instruments prepare(const ExperimentConfig& config);

struct CellResult {
  std::size_t s = 0;
  std::size_t m = 0;
  int trials = 0;
  int successes = 0;
  int failures = 0;  // trials that threw, recorded and skipped
  double mean_rsnr_db = 0.0;
  std::vector<double> rsnr_db;
  double wall_seconds = 0.0;
  double rate() const {
    return trials ? static_cast<double>(successes) / trials : 0.0;
  }
};

struct GridResult {
  std::vector<CellResult> cells;
  bool any_failure() const;
};

GridResult run_grid(const ExperimentConfig& config);

// base_seed XOR 64-bit FNV-1a of the (s, m, trial) words
std::uint64_t trial_seed(std::uint64_t base, std::size_t s, std::size_t m,
                         std::size_t trial);

// csv schema: s,m,trials,successes,rate,mean_rsnr_db
std::string grid_csv(const GridResult& result);
GridResult grid_from_csv(const std::string& text);
std::string grid_json(const GridResult& result);

void emit_density_plot(const SamplingDensity& density, std::size_t n1,
                       std::size_t n2, const std::string& path);
void emit_success_grid(const GridResult& result, const std::string& csv_path,
                       const std::string& svg_path);

}  // namespace tsparse::bench
