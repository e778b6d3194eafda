#include "tsparse/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tsparse::bench {

namespace {

using json = nlohmann::json;

// ellipse table of the modified head phantom: value, half axes, center, tilt
struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

constexpr Ellipse kPhantomTable[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  char b[4];
  in.read(b, 4);
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

}  // namespace

Signal phantom(std::size_t n1, std::size_t n2) {
  if (n1 < 16 || n2 < 16)
    throw std::invalid_argument("phantom: resolution too small");
  Signal img;
  img.rows = n1;
  img.cols = n2;
  img.data.assign(n1 * n2, cxd{0.0, 0.0});
  for (std::size_t j = 0; j < n2; ++j) {
    double x = -1.0 + (2.0 * static_cast<double>(j) + 1.0) /
                          static_cast<double>(n2);
    for (std::size_t i = 0; i < n1; ++i) {
      double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) /
                           static_cast<double>(n1);
      double val = 0.0;
      for (const auto& e : kPhantomTable) {
        double ang = e.phi_deg * std::numbers::pi / 180.0;
        double dx = x - e.x0, dy = y - e.y0;
        double u = (dx * std::cos(ang) + dy * std::sin(ang)) / e.a;
        double v = (-dx * std::sin(ang) + dy * std::cos(ang)) / e.b;
        if (u * u + v * v <= 1.0) val += e.value;
      }
      img.data[i + j * n1] = val;
    }
  }
  return img;
}

cvec reference_signal_1d(std::size_t n) {
  cvec f(n);
  for (std::size_t k = 0; k < n; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(n);
    double mag = 0.2;
    mag += 0.9 * std::exp(-std::pow((t - 0.23) / 0.08, 2));
    if (t >= 0.35 && t < 0.55) mag += 0.7;
    mag += 0.5 * std::exp(-std::pow((t - 0.72) / 0.03, 2));
    if (t >= 0.60 && t < 0.64) mag += 0.4;
    if (t >= 0.85) mag += 0.8 * std::pow(std::sin(std::numbers::pi * t), 2);
    double phase =
        2.0 * std::numbers::pi * (0.5 * t + 0.3 * t * t);
    f[k] = mag * cxd{std::cos(phase), std::sin(phase)};
  }
  return f;
}

void write_signal(const std::string& path, const Signal& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("TSPR", 4);
  put_u32(out, s.cols > 1 ? 2 : 1);
  put_u32(out, static_cast<std::uint32_t>(s.rows));
  put_u32(out, static_cast<std::uint32_t>(s.cols));
  for (const auto& z : s.data) {
    double re = z.real(), im = z.imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
}

Signal read_signal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "TSPR", 4) != 0)
    throw std::runtime_error(path + ": bad signal header");
  std::uint32_t ndim = get_u32(in);
  std::uint32_t d0 = get_u32(in), d1 = get_u32(in);
  if (ndim != 1 && ndim != 2)
    throw std::runtime_error(path + ": unsupported rank");
  Signal s;
  s.rows = d0;
  s.cols = ndim == 2 ? d1 : 1;
  s.data.resize(s.rows * s.cols);
  for (auto& z : s.data) {
    double re, im;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    z = cxd{re, im};
  }
  if (!in) throw std::runtime_error(path + ": truncated signal file");
  return s;
}

void write_solution(const std::string& path, const cvec& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::uint64_t count = x.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (const auto& z : x) {
    double re = z.real(), im = z.imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
}

cvec read_solution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  cvec x(count);
  for (auto& z : x) {
    double re, im;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    z = cxd{re, im};
  }
  if (!in) throw std::runtime_error(path + ": truncated solution file");
  return x;
}

TransformOperator tv_synthesis_operator(std::size_t n) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    a(static_cast<Eigen::Index>(i),
      static_cast<Eigen::Index>((i + n - 1) % n)) = -1.0;
  }
  for (std::size_t j = 0; j < n; ++j)
    a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(j)) = 1.0;
  return TransformOperator::dense(std::move(a));
}

cvec synthesize_sparse(const cvec& base, const TransformOperator& phi_synth,
                       std::size_t s, const GroupPartition* partition) {
  if (base.size() != phi_synth.in_dim())
    throw std::invalid_argument("synthesize_sparse: signal length mismatch");
  cvec coef = phi_synth.apply(base, Apply::forward);
  if (s == 0) return cvec(base.size(), cxd{0.0, 0.0});

  if (partition) {
    std::vector<double> mag(partition->group_count(), 0.0);
    const auto& gof = partition->group_of();
    for (std::size_t k = 0; k < coef.size(); ++k)
      mag[gof[k]] += std::norm(coef[k]);
    std::vector<std::size_t> order(mag.size());
    for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return mag[a] > mag[b];
                     });
    std::vector<bool> keep(mag.size(), false);
    for (std::size_t g = 0; g < std::min(s, order.size()); ++g)
      keep[order[g]] = true;
    for (std::size_t k = 0; k < coef.size(); ++k)
      if (!keep[gof[k]]) coef[k] = cxd{0.0, 0.0};
  } else if (s < coef.size()) {
    std::vector<std::size_t> order(coef.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return std::abs(coef[a]) > std::abs(coef[b]);
                     });
    std::vector<bool> keep(coef.size(), false);
    for (std::size_t k = 0; k < s; ++k) keep[order[k]] = true;
    for (std::size_t k = 0; k < coef.size(); ++k)
      if (!keep[k]) coef[k] = cxd{0.0, 0.0};
  }
  return phi_synth.apply(coef, Apply::pinv);
}

// --- config ---------------------------------------------------------------

namespace {

DensityMode mode_from_string(const std::string& s) {
  if (s == "uniform") return DensityMode::uniform;
  if (s == "variable") return DensityMode::variable;
  if (s == "two_step_uniform") return DensityMode::two_step_uniform;
  if (s == "two_step_variable") return DensityMode::two_step_variable;
  if (s == "cross") return DensityMode::cross;
  throw std::invalid_argument("unknown density mode: " + s);
}

std::string mode_to_string(DensityMode m) {
  switch (m) {
    case DensityMode::uniform: return "uniform";
    case DensityMode::variable: return "variable";
    case DensityMode::two_step_uniform: return "two_step_uniform";
    case DensityMode::two_step_variable: return "two_step_variable";
    case DensityMode::cross: return "cross";
  }
  return "?";
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  if (j.contains("signal")) {
    const auto& s = j["signal"];
    c.signal_kind = s.value("kind", c.signal_kind);
    c.signal_path = s.value("path", c.signal_path);
    c.n1 = s.value("n1", c.n1);
    c.n2 = s.value("n2", c.n2);
  }
  c.phi_kind = j.value("phi", c.phi_kind);
  c.haar_level = j.value("haar_level", c.haar_level);
  if (j.contains("circulant_kernel")) {
    for (const auto& v : j["circulant_kernel"])
      c.circulant_kernel.push_back(cxd{v.get<double>(), 0.0});
  }
  c.objective = j.value("objective", c.objective);
  if (j.contains("density")) {
    const auto& d = j["density"];
    c.density_mode = mode_from_string(d.value("mode", "variable"));
    c.cross_phi_kind = d.value("cross_phi", c.cross_phi_kind);
    c.cross_haar_level = d.value("cross_haar_level", c.cross_haar_level);
  }
  if (j.contains("s")) c.s_list = j["s"].get<std::vector<std::size_t>>();
  if (j.contains("m")) c.m_list = j["m"].get<std::vector<std::size_t>>();
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.threshold_db = j.value("threshold_db", c.threshold_db);
  if (j.contains("admm")) {
    const auto& a = j["admm"];
    c.admm.iterations = a.value("iterations", c.admm.iterations);
    c.admm.beta1 = a.value("beta1", c.admm.beta1);
    c.admm.beta2 = a.value("beta2", c.admm.beta2);
  }
  c.threads = j.value("threads", c.threads);

  if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (c.m_list.empty()) throw std::invalid_argument("config: m list empty");
  for (std::size_t m : c.m_list)
    if (m == 0 || m > c.n())
      throw std::invalid_argument("config: m out of range");
  for (std::size_t s : c.s_list)
    if (s >= c.n()) throw std::invalid_argument("config: s must satisfy s < n");
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["signal"] = {{"kind", c.signal_kind}, {"n1", c.n1}, {"n2", c.n2}};
  if (!c.signal_path.empty()) j["signal"]["path"] = c.signal_path;
  j["phi"] = c.phi_kind;
  j["haar_level"] = c.haar_level;
  j["objective"] = c.objective;
  j["density"] = {{"mode", mode_to_string(c.density_mode)}};
  if (!c.cross_phi_kind.empty()) {
    j["density"]["cross_phi"] = c.cross_phi_kind;
    j["density"]["cross_haar_level"] = c.cross_haar_level;
  }
  j["s"] = c.s_list;
  j["m"] = c.m_list;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threshold_db"] = c.threshold_db;
  j["admm"] = {{"iterations", c.admm.iterations},
               {"beta1", c.admm.beta1},
               {"beta2", c.admm.beta2}};
  j["threads"] = c.threads;
  return j.dump(2);
}

namespace {

TransformOperator build_phi(const std::string& kind, std::size_t n1,
                            std::size_t n2, int haar_level,
                            const cvec& kernel) {
  if (kind == "haar") return TransformOperator::haar(n1 * n2, haar_level);
  if (kind == "haar2") return TransformOperator::haar2(n1, n2);
  if (kind == "tv") return TransformOperator::finite_difference_1d(n1 * n2);
  if (kind == "tv2") return TransformOperator::finite_difference_2d(n1, n2);
  if (kind == "identity") return TransformOperator::identity(n1 * n2);
  if (kind == "circulant") {
    if (kernel.empty()) throw std::invalid_argument("missing circulant kernel");
    return n2 > 1 ? TransformOperator::circulant2(kernel, n1, n2)
                  : TransformOperator::circulant(kernel);
  }
  throw std::invalid_argument("unknown transform kind: " + kind);
}

}  // namespace

Instruments prepare(const ExperimentConfig& c) {
  Instruments ins;
  if (c.signal_kind == "phantom") {
    ins.base = phantom(c.n1, c.n2);
  } else if (c.signal_kind == "synthetic1d") {
    if (c.n2 != 1)
      throw std::invalid_argument("synthetic1d signals are one-dimensional");
    ins.base = Signal{reference_signal_1d(c.n1), c.n1, 1};
  } else if (c.signal_kind == "file") {
    ins.base = read_signal(c.signal_path);
    if (ins.base.rows != c.n1 || ins.base.cols != c.n2)
      throw std::invalid_argument("signal file does not match config dims");
  } else {
    throw std::invalid_argument("unknown signal kind: " + c.signal_kind);
  }

  ins.phi = build_phi(c.phi_kind, c.n1, c.n2, c.haar_level, c.circulant_kernel);
  ins.psi = c.n2 > 1 ? TransformOperator::dft2(c.n1, c.n2)
                     : TransformOperator::dft(c.n1);
  ins.transform = compose(ins.phi, ins.psi);

  bool grouped = c.objective == "group";
  if (grouped && ins.transform.filter_count() > 1)
    ins.partition = GroupPartition::circulant_stack(
        c.n(), ins.transform.filter_count());
  else if (grouped)
    ins.partition = GroupPartition::singletons(ins.transform.out_dim());
  ins.variant = grouped ? Variant::group_eq : Variant::l1_eq;

  const GroupPartition* part = ins.partition ? &*ins.partition : nullptr;
  switch (c.density_mode) {
    case DensityMode::uniform:
      ins.sampling = uniform_density(c.n());
      break;
    case DensityMode::variable:
      ins.sampling = part ? group_density(group_incoherence(ins.transform, *part))
                          : density(incoherence(ins.transform));
      break;
    case DensityMode::two_step_uniform:
      ins.sampling =
          two_step_uniform_density(c.n(), null_columns_of(ins.transform));
      break;
    case DensityMode::two_step_variable:
      ins.sampling = two_step_density(ins.transform, -1, part);
      break;
    case DensityMode::cross: {
      if (c.cross_phi_kind.empty())
        throw std::invalid_argument("cross mode needs density.cross_phi");
      int lvl = c.cross_haar_level > 0 ? c.cross_haar_level : c.haar_level;
      TransformOperator cross_phi =
          build_phi(c.cross_phi_kind, c.n1, c.n2, lvl, {});
      TransformOperator cross_t = compose(cross_phi, ins.psi);
      SamplingDensity cross = density(incoherence(cross_t));
      std::vector<std::size_t> nulls = null_columns_of(ins.transform);
      ins.sampling =
          nulls.empty() ? cross : restrict_density(cross, nulls);
      break;
    }
  }
  return ins;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t s, std::size_t m,
                         std::size_t trial) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::uint64_t w) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  mix(s);
  mix(m);
  mix(trial);
  return base ^ h;
}

bool GridResult::any_failure() const {
  for (const auto& c : cells)
    if (c.failures > 0) return true;
  return false;
}

GridResult run_grid(const ExperimentConfig& config) {
  Instruments ins = prepare(config);
  std::size_t n = config.n();

  // synthesized measurement-domain signals, one per sparsity level
  std::map<std::size_t, cvec> x_by_s;
  for (std::size_t s : config.s_list) {
    if (x_by_s.count(s)) continue;
    cvec f;
    if (s == 0) {
      f = ins.base.data;
    } else {
      TransformOperator synth =
          config.phi_kind == "tv" ? tv_synthesis_operator(n) : ins.phi;
      if (config.phi_kind == "tv2")
        throw std::invalid_argument(
            "2D finite-difference synthesis is not supported; use s = 0");
      const GroupPartition* part = ins.partition ? &*ins.partition : nullptr;
      // group thresholding only applies to partitions of the synth output
      if (part && part->total_size() != synth.out_dim()) part = nullptr;
      f = synthesize_sparse(ins.base.data, synth, s, part);
    }
    x_by_s[s] = ins.psi.apply(f, Apply::forward);
  }

  struct Job {
    std::size_t cell, s, m, trial;
  };
  std::vector<Job> jobs;
  std::vector<CellResult> cells;
  for (std::size_t s : config.s_list) {
    for (std::size_t m : config.m_list) {
      CellResult cell;
      cell.s = s;
      cell.m = m;
      cell.trials = config.trials;
      cell.rsnr_db.assign(static_cast<std::size_t>(config.trials), 0.0);
      for (int t = 0; t < config.trials; ++t)
        jobs.push_back(Job{cells.size(), s, m, static_cast<std::size_t>(t)});
      cells.push_back(std::move(cell));
    }
  }

  struct TrialOutcome {
    double rsnr = 0.0;
    bool success = false;
    bool failed = false;
    double seconds = 0.0;
  };
  std::vector<TrialOutcome> outcomes(jobs.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t idx = cursor.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      TrialOutcome& out = outcomes[idx];
      auto t0 = std::chrono::steady_clock::now();
      try {
        const cvec& x = x_by_s.at(job.s);
        SamplingPattern pat =
            draw(ins.sampling, job.m,
                 trial_seed(config.seed, job.s, job.m, job.trial));
        RecoveryProblem prob;
        prob.transform = ins.transform;
        prob.pattern = std::move(pat);
        prob.observations = subsample(prob.pattern, x, false);
        prob.variant = ins.variant;
        prob.partition = ins.partition;
        SolveReport rep = solve(prob, config.admm);
        out.rsnr = rsnr_db(rep.x_hat, x);
        out.success = out.rsnr >= config.threshold_db;
      } catch (const std::exception&) {
        out.failed = true;
      }
      out.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    }
  };

  int nthreads = std::max(1, config.threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    const Job& job = jobs[idx];
    const TrialOutcome& out = outcomes[idx];
    CellResult& cell = cells[job.cell];
    if (out.failed) {
      ++cell.failures;
      cell.rsnr_db[job.trial] = std::nan("");
    } else {
      cell.rsnr_db[job.trial] = out.rsnr;
      if (out.success) ++cell.successes;
    }
    cell.wall_seconds += out.seconds;
  }
  for (auto& cell : cells) {
    double sum = 0.0;
    int counted = 0;
    for (double v : cell.rsnr_db)
      if (!std::isnan(v)) {
        sum += v;
        ++counted;
      }
    cell.mean_rsnr_db = counted ? sum / counted : 0.0;
  }

  GridResult result;
  result.cells = std::move(cells);
  return result;
}

std::string grid_csv(const GridResult& result) {
  std::string out = "s,m,trials,successes,rate,mean_rsnr_db\n";
  char line[160];
  for (const auto& c : result.cells) {
    std::snprintf(line, sizeof(line), "%zu,%zu,%d,%d,%.17g,%.17g\n", c.s, c.m,
                  c.trials, c.successes, c.rate(), c.mean_rsnr_db);
    out += line;
  }
  return out;
}

GridResult grid_from_csv(const std::string& text) {
  GridResult result;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "s,m,trials,successes,rate,mean_rsnr_db")
    throw std::invalid_argument("grid csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CellResult c;
    double rate = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%zu,%d,%d,%lg,%lg", &c.s, &c.m,
                    &c.trials, &c.successes, &rate, &c.mean_rsnr_db) != 6)
      throw std::invalid_argument("grid csv: bad row: " + line);
    result.cells.push_back(std::move(c));
  }
  return result;
}

std::string grid_json(const GridResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    json jc;
    jc["s"] = c.s;
    jc["m"] = c.m;
    jc["trials"] = c.trials;
    jc["successes"] = c.successes;
    jc["failures"] = c.failures;
    jc["rate"] = c.rate();
    jc["mean_rsnr_db"] = c.mean_rsnr_db;
    jc["rsnr_db"] = c.rsnr_db;
    jc["wall_seconds"] = c.wall_seconds;
    cells.push_back(std::move(jc));
  }
  return json{{"cells", cells}}.dump(2);
}

// --- plots -------------------------------------------------------------------

namespace {

std::string gray(double v) {
  int g = static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  char buf[24];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", g, g, g);
  return buf;
}

}  // namespace

void emit_density_plot(const SamplingDensity& density, std::size_t n1,
                       std::size_t n2, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (n2 <= 1) {
    const int w = 640, h = 240, pad = 10;
    double top = *std::max_element(density.p.begin(), density.p.end());
    if (top <= 0.0) top = 1.0;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
        << "' height='" << h << "'>\n<rect width='100%' height='100%' "
        << "fill='white'/>\n<polyline fill='none' stroke='black' points='";
    std::size_t n = density.p.size();
    for (std::size_t k = 0; k < n; ++k) {
      double x = pad + (w - 2.0 * pad) * static_cast<double>(k) /
                           static_cast<double>(n > 1 ? n - 1 : 1);
      double y = h - pad - (h - 2.0 * pad) * (density.p[k] / top);
      out << x << "," << y << " ";
    }
    out << "'/>\n";
    for (std::size_t k : density.forced) {
      double x = pad + (w - 2.0 * pad) * static_cast<double>(k) /
                           static_cast<double>(density.p.size() - 1);
      out << "<circle cx='" << x << "' cy='" << (h - pad)
          << "' r='3' fill='red'/>\n";
    }
    out << "</svg>\n";
    return;
  }
  // 2D: log-scale grayscale raster
  double top = 0.0, bottom = 1e300;
  for (double v : density.p)
    if (v > 0.0) {
      top = std::max(top, v);
      bottom = std::min(bottom, v);
    }
  double lo = std::log10(std::max(bottom, top * 1e-6));
  double hi = std::log10(top);
  double span = std::max(hi - lo, 1e-12);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << n2
      << "' height='" << n1 << "' shape-rendering='crispEdges'>\n";
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      double v = density.p[i + j * n1];
      bool forced = std::binary_search(density.forced.begin(),
                                       density.forced.end(), i + j * n1);
      double g =
          forced ? 1.0
                 : (v <= 0.0 ? 0.0 : (std::log10(v) - lo) / span);
      out << "<rect x='" << j << "' y='" << i << "' width='1' height='1' fill='"
          << gray(g) << "'/>\n";
    }
  }
  out << "</svg>\n";
}

void emit_success_grid(const GridResult& result, const std::string& csv_path,
                       const std::string& svg_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << grid_csv(result);
  }
  std::vector<std::size_t> ss, ms;
  for (const auto& c : result.cells) {
    ss.push_back(c.s);
    ms.push_back(c.m);
  }
  std::sort(ss.begin(), ss.end());
  ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  const int cell = 16;
  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("cannot write " + svg_path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='"
      << ss.size() * cell << "' height='" << ms.size() * cell
      << "' shape-rendering='crispEdges'>\n";
  for (const auto& c : result.cells) {
    std::size_t col = static_cast<std::size_t>(
        std::find(ss.begin(), ss.end(), c.s) - ss.begin());
    std::size_t row = static_cast<std::size_t>(
        std::find(ms.begin(), ms.end(), c.m) - ms.begin());
    // larger m toward the top, as in phase-transition diagrams
    std::size_t y = (ms.size() - 1 - row) * cell;
    out << "<rect x='" << col * cell << "' y='" << y << "' width='" << cell
        << "' height='" << cell << "' fill='" << gray(c.rate()) << "'/>\n";
  }
  out << "</svg>\n";
}

}  // namespace tsparse::bench
