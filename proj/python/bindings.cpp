#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nmg/experiment.hpp"
#include "nmg/masks.hpp"

namespace py = pybind11;
using namespace nmg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["residual_history"] = r.residual_history;
  d["converged"] = r.converged;
  d["wall_time"] = r.wall_time;
  d["method"] = r.method;
  d["solution"] = to_array(r.solution);
  return d;
}

ProblemSpec make_spec(int dimension, std::size_t n, double alpha, double sigma, const std::string& regularization,
                      const std::string& boundary) {
  ProblemSpec s;
  s.dimension = dimension;
  s.n = n;
  s.alpha = alpha;
  s.kernel_sigma = sigma;
  s.regularization = regularization_from_string(regularization);
  s.boundary = kernel_boundary_from_string(boundary);
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural multigrid solvers for convolution-type integral equations";

  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_ValueError);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def(py::init(&make_spec), py::arg("dimension") = 1, py::arg("n") = 256, py::arg("alpha") = 1e-4,
           py::arg("kernel_sigma") = 1.5, py::arg("regularization") = "tikhonov", py::arg("boundary") = "circulant")
      .def_readonly("dimension", &ProblemSpec::dimension)
      .def_readonly("n", &ProblemSpec::n)
      .def_readonly("alpha", &ProblemSpec::alpha)
      .def_property_readonly("size", [](const ProblemSpec& s) { return s.dimension == 1 ? s.n : s.n * s.n; })
      .def("hash", &ProblemSpec::hash)
      .def("__repr__", &ProblemSpec::canonical);

  m.def(
      "apply", [](const ProblemSpec& s, const Array& x) { return to_array(build_problem(s)->apply(to_vec(x))); },
      py::arg("spec"), py::arg("x"), "y = A x (2D inputs are column-major flattened)");
  m.def(
      "dense", [](const ProblemSpec& s) {
        const auto d = build_problem(s)->densify();
        Array a({static_cast<py::ssize_t>(d.rows()), static_cast<py::ssize_t>(d.cols())});
        std::copy(d.data().begin(), d.data().end(), a.mutable_data());
        return a;
      },
      py::arg("spec"));
  m.def(
      "make_rhs",
      [](const ProblemSpec& s, std::uint64_t seed) {
        std::vector<double> x;
        const auto y = make_rhs(*build_problem(s), seed, &x);
        return py::make_tuple(to_array(x), to_array(y));
      },
      py::arg("spec"), py::arg("seed"), "(x_true, y) with x standard normal");

  m.def(
      "mg_solve",
      [](const ProblemSpec& s, const Array& y, int levels, int pre_smooth, double omega, int coarsest, double tol,
         int max_cycles) {
        SolverConfig c;
        c.method = "mg";
        c.levels = levels;
        c.mg.pre_smooth = pre_smooth;
        c.mg.omega = omega;
        c.coarsest = coarsest;
        c.tol = tol;
        c.max_cycles = max_cycles;
        return report_dict(run_solver(c, s, to_vec(y)));
      },
      py::arg("spec"), py::arg("y"), py::arg("levels") = 4, py::arg("pre_smooth") = 5, py::arg("omega") = 0.5,
      py::arg("coarsest") = 0, py::arg("tol") = 1e-6, py::arg("max_cycles") = 30000);
  m.def(
      "cg_solve",
      [](const ProblemSpec& s, const Array& y, double tol, int max_iter) {
        return report_dict(cg_solve(*build_problem(s), to_vec(y), tol, max_iter));
      },
      py::arg("spec"), py::arg("y"), py::arg("tol") = 1e-6, py::arg("max_iter") = 100000);

  m.def("jacobi_reduction_factor", &jacobi_reduction_factor, py::arg("phi"), py::arg("alpha"), py::arg("omega"));
  m.def(
      "mask",
      [](int level, int levels, std::size_t n, int dims, const std::string& variant) {
        const auto v = variant == "fine" ? MaskVariant::fine : MaskVariant::level;
        if (variant != "fine" && variant != "level") throw std::invalid_argument("variant must be fine or level");
        const auto mk = dims == 1 ? make_mask_1d(level, levels, n, v) : make_mask_2d(level, levels, n, n, v);
        return to_array(mk.values);
      },
      py::arg("level"), py::arg("levels"), py::arg("n"), py::arg("dims") = 1, py::arg("variant") = "fine",
      "mask values in centered order");

  py::class_<NeuralHierarchy>(m, "NeuralSolver")
      .def_property_readonly("levels", &NeuralHierarchy::levels)
      .def(
          "cycle",
          [](const NeuralHierarchy& nh, const Array& x, const Array& y, int coarsest) {
            return to_array(nmg_cycle(nh, to_vec(x), to_vec(y), 1, coarsest));
          },
          py::arg("x"), py::arg("y"), py::arg("coarsest") = 0)
      .def(
          "solve",
          [](const NeuralHierarchy& nh, const Array& y, int coarsest, double tol, int max_cycles) {
            return report_dict(nmg_solve(nh, to_vec(y), coarsest, tol, max_cycles));
          },
          py::arg("y"), py::arg("coarsest") = 0, py::arg("tol") = 1e-6, py::arg("max_cycles") = 1000)
      .def(
          "error_spectra",
          [](const NeuralHierarchy& nh, const Array& x, const Array& y) {
            const auto s = error_spectra(nh, to_vec(x), to_vec(y));
            py::list out;
            for (const auto& mag : s.magnitudes) out.append(to_array(mag));
            return out;
          },
          py::arg("x_true"), py::arg("y"))
      .def("save", [](const NeuralHierarchy& nh, const std::string& path, const ProblemSpec& spec) {
        save_checkpoint(path, make_checkpoint(nh, spec, TrainConfig{}));
      });

  m.def(
      "load_solver",
      [](const std::string& path, const ProblemSpec& spec) { return load_neural_hierarchy(path, spec); },
      py::arg("path"), py::arg("spec"));
  m.def(
      "untrained_solver",
      [](const ProblemSpec& spec, int levels, std::uint64_t seed) {
        return make_neural_hierarchy(build_hierarchy(spec, levels), default_smoother_config, seed);
      },
      py::arg("spec"), py::arg("levels") = 4, py::arg("seed") = 0);
  m.def(
      "train",
      [](const ProblemSpec& spec, const std::string& config_json, py::object on_epoch) {
        const auto cfg = train_config_from_json(nlohmann::json::parse(config_json));
        std::function<void(const EpochRecord&)> cb;
        if (!on_epoch.is_none())
          cb = [on_epoch](const EpochRecord& r) { on_epoch(py::str(to_json(r).dump())); };
        auto result = train(spec, cfg, cb);
        std::ostringstream log;
        result.log.write_jsonl(log);
        return py::make_tuple(result.hierarchy, log.str());
      },
      py::arg("spec"), py::arg("config_json") = "{}", py::arg("on_epoch") = py::none(),
      "train smoothers; returns (solver, JSON-lines log)");
}
