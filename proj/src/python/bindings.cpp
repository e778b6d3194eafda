#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsparse/bench.hpp"
#include "tsparse/certify.hpp"
#include "tsparse/sampling.hpp"
#include "tsparse/solver.hpp"
#include "tsparse/spectra.hpp"

namespace py = pybind11;
using namespace tsparse;

namespace {

Apply mode_from(const std::string& name) {
  if (name == "forward") return Apply::forward;
  if (name == "adjoint") return Apply::adjoint;
  if (name == "pinv") return Apply::pinv;
  if (name == "tilde") return Apply::tilde;
  throw std::invalid_argument("unknown apply mode: " + name);
}

Variant variant_from(const std::string& name) {
  if (name == "l1_eq") return Variant::l1_eq;
  if (name == "l1_ball") return Variant::l1_ball;
  if (name == "l1_ball_weighted") return Variant::l1_ball_weighted;
  if (name == "group_eq") return Variant::group_eq;
  if (name == "group_ball") return Variant::group_ball;
  throw std::invalid_argument("unknown variant: " + name);
}

}  // namespace

PYBIND11_MODULE(_tsparse, m) {
  m.doc() = "sparse signal recovery in a transform domain";

  py::class_<TransformOperator>(m, "TransformOperator")
      .def_property_readonly("in_dim", &TransformOperator::in_dim)
      .def_property_readonly("out_dim", &TransformOperator::out_dim)
      .def_property_readonly("orthonormal", &TransformOperator::orthonormal)
      .def("apply",
           [](const TransformOperator& op, const cvec& v,
              const std::string& mode) { return op.apply(v, mode_from(mode)); },
           py::arg("v"), py::arg("mode") = "forward")
      .def("column", &TransformOperator::column)
      .def("tilde_column", &TransformOperator::tilde_column)
      .def("gram_diagonal", &TransformOperator::gram_diagonal)
      .def("__repr__", &TransformOperator::describe);

  m.def("make_dft", &TransformOperator::dft, py::arg("n"));
  m.def("make_dft2", &TransformOperator::dft2, py::arg("n1"), py::arg("n2"));
  m.def("make_haar", &TransformOperator::haar, py::arg("n"), py::arg("level"));
  m.def("make_haar2", &TransformOperator::haar2, py::arg("n1"), py::arg("n2"));
  m.def("make_finite_difference_1d", &TransformOperator::finite_difference_1d,
        py::arg("n"));
  m.def("make_finite_difference_2d", &TransformOperator::finite_difference_2d,
        py::arg("n1"), py::arg("n2"));
  m.def("make_circulant",
        [](const cvec& kernel, std::size_t n1, std::size_t n2) {
          if (n2 > 1) return TransformOperator::circulant2(kernel, n1, n2);
          return TransformOperator::circulant(kernel);
        },
        py::arg("kernel"), py::arg("n1") = 0, py::arg("n2") = 1)
  ;
  m.def("make_circulant_stack", &TransformOperator::circulant_stack,
        py::arg("kernels"), py::arg("n1"), py::arg("n2") = 1);
  m.def("make_identity", &TransformOperator::identity, py::arg("n"));
  m.def("compose", &compose, py::arg("phi"), py::arg("psi"));
  m.def("singular_bounds", [](const TransformOperator& op) {
    SingularBounds sb = singular_bounds(op);
    return std::make_pair(sb.sigma_min, sb.sigma_max);
  });
  m.def("column_norms", [](const TransformOperator& op) {
    ColumnNorms cn = column_norms(op);
    py::dict d;
    d["col2"] = cn.col2;
    d["tilde_col2"] = cn.tilde_col2;
    d["colinf"] = cn.colinf;
    d["tilde_colinf"] = cn.tilde_colinf;
    return d;
  });

  py::class_<GroupPartition>(m, "GroupPartition")
      .def(py::init<std::vector<std::vector<std::size_t>>>())
      .def_static("singletons", &GroupPartition::singletons)
      .def_static("circulant_stack", &GroupPartition::circulant_stack)
      .def_property_readonly("group_count", &GroupPartition::group_count)
      .def_property_readonly("total_size", &GroupPartition::total_size);

  py::class_<IncoherenceProfile>(m, "IncoherenceProfile")
      .def_readonly("n", &IncoherenceProfile::n)
      .def_readonly("gamma", &IncoherenceProfile::gamma)
      .def_readonly("gamma_residual", &IncoherenceProfile::gamma_residual)
      .def_readonly("mu", &IncoherenceProfile::mu)
      .def_readonly("mu_k", &IncoherenceProfile::mu_k)
      .def_readonly("mu_tilde_k", &IncoherenceProfile::mu_tilde_k)
      .def_readonly("mu_bar", &IncoherenceProfile::mu_bar)
      .def_readonly("group", &IncoherenceProfile::group);

  py::class_<SamplingDensity>(m, "SamplingDensity")
      .def_readonly("p", &SamplingDensity::p)
      .def_readonly("forced", &SamplingDensity::forced);

  m.def("gamma_opt", [](const TransformOperator& t) {
    GammaResult g = gamma_opt(t);
    return std::make_pair(g.gamma, g.residual_norm);
  });
  m.def("incoherence", &incoherence);
  m.def("group_incoherence", &group_incoherence);
  m.def("density", &density);
  m.def("group_density", &group_density);
  m.def("two_step_density",
        [](const TransformOperator& t, std::ptrdiff_t n0,
           const GroupPartition* part) {
          return two_step_density(t, n0, part);
        },
        py::arg("t"), py::arg("n0") = -1, py::arg("partition") = nullptr);
  m.def("uniform_density", &uniform_density);
  m.def("null_columns", &null_columns_of);
  m.def("sample_complexity_bound", &sample_complexity_bound, py::arg("mu"),
        py::arg("s"), py::arg("big_n"), py::arg("gamma_residual"),
        py::arg("norm_product"), py::arg("beta") = 1.0,
        py::arg("c_const") = 1.0);

  py::class_<SamplingPattern>(m, "SamplingPattern")
      .def_readonly("omega", &SamplingPattern::omega)
      .def_readonly("omega_prime", &SamplingPattern::omega_prime)
      .def_readonly("max_repeat", &SamplingPattern::max_repeat)
      .def_readonly("n", &SamplingPattern::n)
      .def_readonly("seed", &SamplingPattern::seed);

  m.def("draw", &draw, py::arg("density"), py::arg("m"), py::arg("seed"));
  m.def("subsample", &subsample, py::arg("pattern"), py::arg("x"),
        py::arg("dedup") = false);
  m.def("embed", &embed, py::arg("pattern"), py::arg("y"),
        py::arg("dedup") = false);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("x_hat", &SolveReport::x_hat)
      .def_readonly("objective", &SolveReport::objective)
      .def_readonly("primal_residual", &SolveReport::primal_residual)
      .def_readonly("dual_residual", &SolveReport::dual_residual)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("feasibility_gap", &SolveReport::feasibility_gap)
      .def_readonly("ill_posed_warning", &SolveReport::ill_posed_warning);

  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("tau"));
  m.def("group_soft_threshold", &group_soft_threshold, py::arg("block"),
        py::arg("tau"));
  m.def("rsnr_db", &rsnr_db, py::arg("x_hat"), py::arg("x"));
  m.def("solve",
        [](const TransformOperator& t, const SamplingPattern& pattern,
           const cvec& observations, const std::string& variant,
           double epsilon, const std::vector<double>& rho,
           const GroupPartition* partition, int iterations, double beta1,
           double beta2) {
          RecoveryProblem prob;
          prob.transform = t;
          prob.pattern = pattern;
          prob.observations = observations;
          prob.variant = variant_from(variant);
          prob.epsilon = epsilon;
          prob.rho = rho;
          if (partition) prob.partition = *partition;
          SolveOptions opts;
          opts.iterations = iterations;
          opts.beta1 = beta1;
          opts.beta2 = beta2;
          return solve(prob, opts);
        },
        py::arg("transform"), py::arg("pattern"), py::arg("observations"),
        py::arg("variant") = "l1_eq", py::arg("epsilon") = 0.0,
        py::arg("rho") = std::vector<double>{},
        py::arg("partition") = nullptr, py::arg("iterations") = 1000,
        py::arg("beta1") = 1.0, py::arg("beta2") = 1.0);

  py::class_<GolfingSchedule>(m, "GolfingSchedule")
      .def_readonly("ell", &GolfingSchedule::ell)
      .def_readonly("c", &GolfingSchedule::c)
      .def_readonly("t", &GolfingSchedule::t)
      .def_readonly("m", &GolfingSchedule::m)
      .def("total", &GolfingSchedule::total);

  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("v", &CertificateReport::v)
      .def_readonly("vanish_residual", &CertificateReport::vanish_residual)
      .def_readonly("sign_deviation", &CertificateReport::sign_deviation)
      .def_readonly("offsupport_max", &CertificateReport::offsupport_max)
      .def_readonly("local_isometry_dev",
                    &CertificateReport::local_isometry_dev)
      .def_readonly("sign_threshold", &CertificateReport::sign_threshold)
      .def_readonly("passed", &CertificateReport::passed)
      .def_readonly("omega_exhausted", &CertificateReport::omega_exhausted);

  m.def("golfing_schedule", &golfing_schedule, py::arg("s"), py::arg("n"),
        py::arg("big_n"), py::arg("beta"), py::arg("mu"),
        py::arg("norm_product"), py::arg("use_log2") = false);
  m.def("fit_schedule", &fit_schedule, py::arg("schedule"),
        py::arg("m_available"));
  m.def("build_certificate", &build_certificate, py::arg("t"), py::arg("tx"),
        py::arg("pattern"), py::arg("schedule"));
  m.def("local_isometry_deviation", &local_isometry_deviation, py::arg("t"),
        py::arg("pattern"), py::arg("j_support"));
  m.def("deviation_e2", &deviation_e2);
  m.def("deviation_e3", &deviation_e3);
  m.def("deviation_e3_group", &deviation_e3_group);

  m.def("phantom", [](std::size_t n1, std::size_t n2) {
    bench::Signal s = bench::phantom(n1, n2);
    return s.data;
  });
  m.def("reference_signal_1d", &bench::reference_signal_1d,
        py::arg("n") = 512);
  m.def("synthesize_sparse",
        [](const cvec& base, const TransformOperator& phi, std::size_t s,
           const GroupPartition* part) {
          return bench::synthesize_sparse(base, phi, s, part);
        },
        py::arg("base"), py::arg("phi_synth"), py::arg("s"),
        py::arg("partition") = nullptr);
  m.def("tv_synthesis_operator", &bench::tv_synthesis_operator, py::arg("n"));
  m.def("run_grid", [](const std::string& config_json) {
    bench::GridResult r =
        bench::run_grid(bench::config_from_json(config_json));
    return bench::grid_json(r);
  });
  m.def("grid_csv", [](const std::string& config_json) {
    bench::GridResult r =
        bench::run_grid(bench::config_from_json(config_json));
    return bench::grid_csv(r);
  });
}
