// pybind11 surface: the core field types and the main operations, with
// numpy-backed sample access. Heavy experiment drivers stay in the CLI.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fhartree/dynamics.hpp"
#include "fhartree/estimates.hpp"
#include "fhartree/illposedness.hpp"
#include "fhartree/littlewood_paley.hpp"
#include "fhartree/multipliers.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/step_atom.hpp"
#include "fhartree/transform.hpp"
#include "fhartree/version.hpp"

namespace py = pybind11;
using namespace fhartree;

namespace {

py::array_t<cplx> values_array(const std::vector<cplx>& v) {
  py::array_t<cplx> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<cplx> values_vector(const py::array_t<cplx>& a, std::size_t expected) {
  const auto buf = a.request();
  if (buf.ndim != 1 || static_cast<std::size_t>(buf.shape[0]) != expected)
    throw invalid_input("values must be a 1-D array with one sample per node");
  const cplx* p = static_cast<const cplx*>(buf.ptr);
  return std::vector<cplx>(p, p + expected);
}

template <class Field>
Field make_field(const RadialGrid& g, const py::array_t<cplx>& values) {
  return Field(g, values_vector(values, g.n_points));
}

py::array_t<double> nodes_array(const RadialGrid& g, bool spectral) {
  py::array_t<double> out(static_cast<py::ssize_t>(g.n_points));
  auto* p = out.mutable_data();
  for (std::size_t i = 1; i <= g.n_points; ++i)
    p[i - 1] = spectral ? g.freq(i) : g.radius(i);
  return out;
}

}  // namespace

PYBIND11_MODULE(_fhartree, m) {
  m.doc() = "radial pseudospectral workbench for the fractional Hartree equation";
  m.attr("__version__") = version_string;

  py::register_exception<invalid_input>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<numerical_failure>(m, "NumericalFailure", PyExc_RuntimeError);

  py::class_<RadialGrid>(m, "RadialGrid")
      .def(py::init<std::size_t, double>(), py::arg("n_points"), py::arg("r_max"))
      .def_readonly("n_points", &RadialGrid::n_points)
      .def_readonly("r_max", &RadialGrid::r_max)
      .def_property_readonly("spacing", &RadialGrid::spacing)
      .def_property_readonly("freq_max", &RadialGrid::freq_max)
      .def("radii", [](const RadialGrid& g) { return nodes_array(g, false); })
      .def("freqs", [](const RadialGrid& g) { return nodes_array(g, true); })
      .def("__repr__", [](const RadialGrid& g) {
        return "RadialGrid(n_points=" + std::to_string(g.n_points) +
               ", r_max=" + std::to_string(g.r_max) + ")";
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, double sigma) {
             return ModelParams{alpha, sigma};
           }),
           py::arg("alpha") = 1.5, py::arg("sigma") = 1.0)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("sigma", &ModelParams::sigma);

  py::class_<RadialField>(m, "RadialField")
      .def(py::init(&make_field<RadialField>), py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &RadialField::grid)
      .def_property_readonly(
          "values", [](const RadialField& f) { return values_array(f.values); });

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init(&make_field<SpectralField>), py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &SpectralField::grid)
      .def_property_readonly(
          "values", [](const SpectralField& f) { return values_array(f.values); });

  m.def("forward_transform", &forward_transform, py::arg("f"));
  m.def("inverse_transform", &inverse_transform, py::arg("F"));
  m.def("apply_fractional_laplacian_power", &apply_fractional_laplacian_power,
        py::arg("F"), py::arg("beta"));
  m.def("riesz_constant", &riesz_constant, py::arg("alpha"));
  m.def("riesz_convolution",
        py::overload_cast<const RadialField&, double>(&riesz_convolution),
        py::arg("density"), py::arg("alpha"));

  m.def("l2_norm", py::overload_cast<const RadialField&>(&l2_norm));
  m.def("spectral_l2_norm", py::overload_cast<const SpectralField&>(&l2_norm));
  m.def("lp_norm", &lp_norm, py::arg("f"), py::arg("p"));
  m.def("sobolev_norm", py::overload_cast<const RadialField&, double>(&sobolev_norm),
        py::arg("f"), py::arg("s"));
  m.def("spectral_sobolev_norm",
        py::overload_cast<const SpectralField&, double>(&sobolev_norm), py::arg("F"),
        py::arg("s"));

  m.def("project",
        py::overload_cast<const SpectralField&, DyadicIndex>(&project));
  m.def("project", py::overload_cast<const RadialField&, DyadicIndex>(&project));
  m.def("project_leq",
        py::overload_cast<const SpectralField&, DyadicIndex>(&project_leq));
  m.def("project_gt",
        py::overload_cast<const SpectralField&, DyadicIndex>(&project_gt));
  m.def("project_tilde",
        py::overload_cast<const SpectralField&, DyadicIndex>(&project_tilde));
  py::class_<DyadicIndex>(m, "DyadicIndex")
      .def(py::init<int>(), py::arg("exponent"))
      .def_readonly("exponent", &DyadicIndex::exponent)
      .def_property_readonly("value", &DyadicIndex::value);

  m.def("free_propagate",
        py::overload_cast<const RadialField&, double, const ModelParams&>(
            &free_propagate),
        py::arg("f"), py::arg("t"), py::arg("params"));
  m.def("energy", &energy, py::arg("f"), py::arg("params"));
  m.def("rescale", &rescale, py::arg("f"), py::arg("lam"), py::arg("params"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("mass", &Trajectory::mass)
      .def_readonly("energy", &Trajectory::energy)
      .def_property_readonly("final_state",
                             [](const Trajectory& t) { return t.states.back(); })
      .def("state", [](const Trajectory& t, std::size_t i) { return t.states.at(i); })
      .def("__len__", &Trajectory::size);

  m.def("evolve", &evolve, py::arg("phi"), py::arg("T"), py::arg("params"),
        py::arg("dt"), py::arg("record_stride") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<PicardResult>(m, "PicardResult")
      .def_readonly("diffs", &PicardResult::diffs)
      .def_readonly("converged", &PicardResult::converged)
      .def_readonly("diverged", &PicardResult::diverged)
      .def_property_readonly("final",
                             [](const PicardResult& r) { return r.last(); });
  m.def("picard_iterate", &picard_iterate, py::arg("phi"), py::arg("T"),
        py::arg("params"), py::arg("k_max") = 6, py::arg("n_mesh") = 256,
        py::arg("keep_iterates") = false, py::call_guard<py::gil_scoped_release>());

  py::class_<BumpProfile>(m, "BumpProfile")
      .def(py::init([](double center, double width) {
             return BumpProfile{center, width};
           }),
           py::arg("center"), py::arg("width"))
      .def("__call__", &BumpProfile::operator())
      .def_property_readonly("support_radius", &BumpProfile::support_radius);
  py::class_<BumpPair>(m, "BumpPair")
      .def(py::init([](const BumpProfile& a, const BumpProfile& b) {
             return BumpPair{a, b};
           }),
           py::arg("phi"), py::arg("psi"));
  m.def("vanishing_threshold", &vanishing_threshold);
  m.def("closed_form_I", &closed_form_I, py::arg("pair"), py::arg("tau"),
        py::arg("xi_mag"), py::arg("alpha"));
  m.def("brute_force_I", &brute_force_I, py::arg("pair"), py::arg("tau"),
        py::arg("xi_mag"), py::arg("alpha"), py::arg("mollifier_width"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<DyadicEntry>(m, "DyadicEntry")
      .def_readonly("mu", &DyadicEntry::mu)
      .def_readonly("lambda1", &DyadicEntry::lambda1)
      .def_readonly("lambda2", &DyadicEntry::lambda2)
      .def_readonly("lhs", &DyadicEntry::lhs)
      .def_readonly("rhs", &DyadicEntry::rhs)
      .def_readonly("ratio", &DyadicEntry::ratio);
  m.def("gaussian_band_profile", &gaussian_band_profile, py::arg("grid"),
        py::arg("center"), py::arg("width"));
  m.def("bilinear_scan", &bilinear_scan, py::arg("l1"), py::arg("l2"), py::arg("mu"),
        py::arg("f"), py::arg("g"), py::arg("alpha"), py::arg("t_window") = 0.0,
        py::call_guard<py::gil_scoped_release>());
  m.def("bilinear_scan_leq", &bilinear_scan_leq, py::arg("mu"), py::arg("l1"),
        py::arg("l2"), py::arg("f"), py::arg("g"), py::arg("alpha"),
        py::arg("t_window") = 0.0, py::call_guard<py::gil_scoped_release>());
  m.def("bernstein_scan", &bernstein_scan, py::arg("mu"), py::arg("l1"), py::arg("l2"),
        py::arg("f"), py::arg("g"), py::arg("alpha"), py::arg("t_window") = 0.0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<StrichartzResult>(m, "StrichartzResult")
      .def_readonly("ratio", &StrichartzResult::ratio)
      .def_readonly("main_norm", &StrichartzResult::main_norm)
      .def_readonly("tail_estimate", &StrichartzResult::tail_estimate)
      .def_readonly("theta", &StrichartzResult::theta)
      .def_readonly("zero_input", &StrichartzResult::zero_input);
  m.def("strichartz_theta", &strichartz_theta);
  m.def("strichartz_ratio", &strichartz_ratio, py::arg("f"), py::arg("q"), py::arg("r"),
        py::arg("alpha"), py::arg("t_window") = 24.0, py::arg("n_steps") = 768,
        py::call_guard<py::gil_scoped_release>());

  py::class_<StepAtom>(m, "StepAtom")
      .def_readonly("knots", &StepAtom::knots)
      .def("evaluate", &StepAtom::evaluate, py::arg("t"));
  m.def("random_band_atom", &random_band_atom, py::arg("grid"), py::arg("band"),
        py::arg("pieces"), py::arg("t_span"), py::arg("seed"), py::arg("params"));
  m.def("v2_norm_exact", &v2_norm_exact, py::arg("atom"));

  py::class_<AnnulusDatum>(m, "AnnulusDatum")
      .def_readonly("lambda_", &AnnulusDatum::lambda)
      .def_readonly("spectral", &AnnulusDatum::spectral)
      .def_readonly("field", &AnnulusDatum::field);
  m.def("build_annulus", &build_annulus, py::arg("lambda_"), py::arg("grid"));
  m.def("first_picard_term", &first_picard_term, py::arg("datum"), py::arg("t"),
        py::arg("params"), py::call_guard<py::gil_scoped_release>());

  py::class_<GrowthRow>(m, "GrowthRow")
      .def_readonly("lambda_", &GrowthRow::lambda)
      .def_readonly("norm_phi", &GrowthRow::norm_phi)
      .def_readonly("norm_big_phi", &GrowthRow::norm_big_phi)
      .def_readonly("ratio", &GrowthRow::ratio);
  py::class_<GrowthRecord>(m, "GrowthRecord")
      .def_readonly("rows", &GrowthRecord::rows)
      .def_readonly("slope_phi", &GrowthRecord::slope_phi)
      .def_readonly("slope_big_phi", &GrowthRecord::slope_big_phi)
      .def_readonly("slope_ratio", &GrowthRecord::slope_ratio);
  m.def("growth_experiment", &growth_experiment, py::arg("lambdas"), py::arg("s"),
        py::arg("params"), py::arg("eps"), py::arg("grid"),
        py::call_guard<py::gil_scoped_release>());
}
