#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <string>

#include "pairmrf/estimators.hpp"
#include "pairmrf/exact.hpp"
#include "pairmrf/hmrf.hpp"
#include "pairmrf/kernel.hpp"
#include "pairmrf/report.hpp"
#include "pairmrf/sampler.hpp"

namespace py = pybind11;
using namespace pairmrf;

namespace {

using Positions = std::vector<std::pair<int, int>>;
using IntGrid = py::array_t<int, py::array::c_style | py::array::forcecast>;
using RealGrid = py::array_t<double, py::array::c_style | py::array::forcecast>;

InteractionStructure to_structure(const Positions& p) {
  std::vector<Offset> v;
  v.reserve(p.size());
  for (auto [r1, r2] : p) v.push_back({r1, r2});
  return InteractionStructure(std::move(v));
}

Positions from_structure(const InteractionStructure& s) {
  Positions out;
  for (auto r : s.positions()) out.emplace_back(r.row, r.col);
  return out;
}

Dims grid_dims(const py::buffer_info& info) {
  if (info.ndim != 2) throw std::invalid_argument("expected a 2-d array");
  return {static_cast<int>(info.shape[0]), static_cast<int>(info.shape[1])};
}

DiscreteField to_field(const IntGrid& z, int max_label = -1) {
  const auto info = z.request();
  const Dims d = grid_dims(info);
  const int* p = static_cast<const int*>(info.ptr);
  return DiscreteField(d, std::vector<int>(p, p + d.size()), max_label);
}

IntGrid from_field(const DiscreteField& z) {
  IntGrid out({z.rows(), z.cols()});
  std::copy(z.labels().begin(), z.labels().end(), out.mutable_data());
  return out;
}

RealField to_real(const RealGrid& y) {
  const auto info = y.request();
  const Dims d = grid_dims(info);
  const double* p = static_cast<const double*>(info.ptr);
  return RealField(d, std::vector<double>(p, p + d.size()));
}

RealGrid from_real(const RealField& y) {
  RealGrid out({y.dims().rows, y.dims().cols});
  std::copy(y.values().begin(), y.values().end(), out.mutable_data());
  return out;
}

PixelRegion to_region(const py::array_t<bool, py::array::c_style | py::array::forcecast>& m) {
  const auto info = m.request();
  const Dims d = grid_dims(info);
  const bool* p = static_cast<const bool*>(info.ptr);
  return PixelRegion(d, std::vector<std::uint8_t>(p, p + d.size()));
}

py::array_t<double> potential_tensor(const PotentialArray& t) {
  const auto n = static_cast<py::ssize_t>(t.num_colors());
  py::array_t<double> out({static_cast<py::ssize_t>(t.n_positions()), n, n});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::array basis_tensor(const BasisSet& b) {
  py::array_t<double> out({static_cast<py::ssize_t>(b.size()), static_cast<py::ssize_t>(b.dims().rows),
                           static_cast<py::ssize_t>(b.dims().cols)});
  double* dst = out.mutable_data();
  for (std::size_t j = 0; j < b.size(); ++j) dst = std::copy(b.column(j).begin(), b.column(j).end(), dst);
  return out;
}

BasisSet to_basis(const RealGrid& arr) {
  const auto info = arr.request();
  if (info.ndim != 3) throw std::invalid_argument("basis must have shape (n, rows, cols)");
  const Dims d{static_cast<int>(info.shape[1]), static_cast<int>(info.shape[2])};
  const double* p = static_cast<const double*>(info.ptr);
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (py::ssize_t j = 0; j < info.shape[0]; ++j) {
    cols.emplace_back(p + j * d.size(), p + (j + 1) * d.size());
    names.push_back("b" + std::to_string(j + 1));
  }
  return BasisSet(d, std::move(cols), std::move(names));
}

SaOptions sa_options(const std::optional<std::vector<double>>& gamma, int cycles, int refresh_each, int refresh_cycles,
                     std::uint64_t seed) {
  SaOptions o;
  if (gamma) o.gamma_seq = *gamma;
  o.cycles = cycles;
  o.refresh_each = refresh_each;
  o.refresh_cycles = refresh_cycles;
  o.seed = seed;
  return o;
}

}  // namespace

PYBIND11_MODULE(_pairmrf, m) {
  m.doc() = "Pairwise-interaction Markov random fields on 2-d lattices.";

  static py::exception<ConvergenceError> convergence(m, "ConvergenceError", PyExc_RuntimeError);
  static py::exception<BoundaryError> boundary(m, "BoundaryError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConvergenceError& e) {
      PyErr_SetString(convergence.ptr(), e.what());
    } catch (const BoundaryError& e) {
      PyErr_SetString(boundary.ptr(), e.what());
    }
  });

  // Structures are lists of (r1, r2) tuples on the Python side.
  m.def(
      "mrfi",
      [](double max_norm, const std::string& norm, const Positions& extra) {
        std::vector<Offset> e;
        for (auto [a, b] : extra) e.push_back({a, b});
        return from_structure(build_structure(max_norm, parse_norm_type(norm), e));
      },
      py::arg("max_norm") = 1.0, py::arg("norm") = "L1", py::arg("extra") = Positions{},
      "Canonical positions with norm <= max_norm, then `extra`.");
  m.def("free_dimension", [](const std::string& family, std::size_t n, int c) {
    return free_dimension(parse_family(family), n, c);
  });

  py::class_<PotentialArray>(m, "Potentials")
      .def(py::init([](const std::vector<double>& vec, const std::string& family, const Positions& pos, int c) {
             return expand_array(vec, parse_family(family), to_structure(pos), c);
           }),
           py::arg("vector"), py::arg("family"), py::arg("positions"), py::arg("C") = 1)
      .def_static(
          "from_array",
          [](const RealGrid& arr, const std::string& family, const Positions& pos, double tolerance) {
            const auto info = arr.request();
            if (info.ndim != 3 || info.shape[1] != info.shape[2]) {
              throw std::invalid_argument("potentials must have shape (positions, C+1, C+1)");
            }
            const double* p = static_cast<const double*>(info.ptr);
            return validate_family(std::span<const double>(p, static_cast<std::size_t>(info.size)),
                                   parse_family(family), to_structure(pos), static_cast<int>(info.shape[1]) - 1,
                                   tolerance);
          },
          py::arg("array"), py::arg("family"), py::arg("positions"), py::arg("tolerance") = 1e-12)
      .def_property_readonly("family", [](const PotentialArray& t) { return std::string(to_string(t.family())); })
      .def_property_readonly("positions", [](const PotentialArray& t) { return from_structure(t.structure()); })
      .def_property_readonly("C", &PotentialArray::max_label)
      .def_property_readonly("vector", &summarize_array)
      .def_property_readonly("array", &potential_tensor)
      .def("__eq__", [](const PotentialArray& a, const PotentialArray& b) { return a == b; })
      .def("__repr__", [](const PotentialArray& t) {
        return "<Potentials " + std::string(to_string(t.family())) + " C=" + std::to_string(t.max_label()) + " |R|=" +
               std::to_string(t.n_positions()) + ">";
      });

  m.def(
      "cohist",
      [](const IntGrid& z, const Positions& pos, int c) {
        const auto h = cohist(to_field(z, c), to_structure(pos), c);
        const auto n = static_cast<py::ssize_t>(h.num_colors());
        py::array_t<std::int64_t> out({static_cast<py::ssize_t>(pos.size()), n, n});
        std::copy(h.counts().begin(), h.counts().end(), out.mutable_data());
        return out;
      },
      py::arg("z"), py::arg("positions"), py::arg("C") = -1, "Co-occurrence counts with shape (|R|, C+1, C+1).");
  m.def(
      "suff_stat",
      [](const IntGrid& z, const Positions& pos, const std::string& family, int c) {
        const auto f = to_field(z, c);
        return suff_stat(f, to_structure(pos), parse_family(family), f.max_label());
      },
      py::arg("z"), py::arg("positions"), py::arg("family"), py::arg("C") = -1);
  m.def(
      "energy", [](const IntGrid& z, const PotentialArray& t) { return energy(to_field(z, t.max_label()), t); },
      py::arg("z"), py::arg("theta"));
  m.def(
      "conditional_probs",
      [](const IntGrid& z, int row, int col, const PotentialArray& t) {
        return conditional_probs(to_field(z, t.max_label()), {row, col}, t);
      },
      py::arg("z"), py::arg("row"), py::arg("col"), py::arg("theta"));
  m.def(
      "pseudo_likelihood",
      [](const IntGrid& z, const PotentialArray& t, bool gradient, int threads) -> py::object {
        const auto v = evaluate_pl(to_field(z, t.max_label()), t, gradient, threads);
        if (!gradient) return py::float_(v.log_pl);
        return py::make_tuple(v.log_pl, v.gradient);
      },
      py::arg("z"), py::arg("theta"), py::arg("gradient") = false, py::arg("threads") = 1,
      "log PL, or (log PL, gradient) when gradient=True.");

  m.def(
      "sample",
      [](const PotentialArray& t, std::optional<std::pair<int, int>> shape, std::optional<IntGrid> init, int cycles,
         std::uint64_t seed, std::optional<py::array_t<bool, py::array::c_style | py::array::forcecast>> fixed) {
        SamplerConfig cfg;
        cfg.cycles = cycles;
        cfg.seed = seed;
        if (fixed) cfg.fixed_region = to_region(*fixed);
        if (shape.has_value() == init.has_value()) throw std::invalid_argument("give exactly one of shape and init");
        py::gil_scoped_release release;
        const auto z = shape ? sample_mrf(Dims{shape->first, shape->second}, t, cfg)
                             : sample_mrf(to_field(*init, t.max_label()), t, cfg);
        py::gil_scoped_acquire acquire;
        return from_field(z);
      },
      py::arg("theta"), py::arg("shape") = std::nullopt, py::arg("init") = std::nullopt, py::arg("cycles") = 60,
      py::arg("seed") = 0, py::arg("fixed") = std::nullopt,
      "Gibbs sampler from a uniform start (shape) or a given field (init).");

  py::class_<MrfFit>(m, "MrfFit")
      .def_readonly("theta", &MrfFit::theta)
      .def_property_readonly("method",
                             [](const MrfFit& f) { return f.method == FitMethod::PseudoLikelihood ? "pl" : "sa"; })
      .def_readonly("log_pl", &MrfFit::log_pl)
      .def_property_readonly("metrics",
                             [](const MrfFit& f) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& p : f.metrics) out.emplace_back(p.iteration, p.distance);
                               return out;
                             })
      .def_readonly("color_counts", &MrfFit::color_counts)
      .def_readonly("iterations", &MrfFit::iterations)
      .def_readonly("gradient_norm", &MrfFit::gradient_norm)
      .def("summary", [](const MrfFit& f) { return summary_report(f); });

  m.def(
      "fit_pl",
      [](const IntGrid& z, const Positions& pos, const std::string& family, double gtol, int max_iterations,
         std::optional<PotentialArray> init) {
        PlOptions o;
        o.gtol = gtol;
        o.max_iterations = max_iterations;
        return fit_pl(to_field(z), to_structure(pos), parse_family(family), o, init);
      },
      py::arg("z"), py::arg("positions"), py::arg("family") = "oneeach", py::arg("gtol") = 1e-5,
      py::arg("max_iterations") = 500, py::arg("init") = std::nullopt);
  m.def(
      "fit_sa",
      [](const IntGrid& z, const Positions& pos, const std::string& family, std::optional<std::vector<double>> gamma,
         int cycles, int refresh_each, int refresh_cycles, std::uint64_t seed, std::optional<PotentialArray> init) {
        return fit_sa(to_field(z), to_structure(pos), parse_family(family),
                      sa_options(gamma, cycles, refresh_each, refresh_cycles, seed), init);
      },
      py::arg("z"), py::arg("positions"), py::arg("family") = "oneeach", py::arg("gamma") = std::nullopt,
      py::arg("cycles") = 2, py::arg("refresh_each") = 0, py::arg("refresh_cycles") = 60, py::arg("seed") = 0,
      py::arg("init") = std::nullopt);
  m.def(
      "select_interactions",
      [](const IntGrid& z, const Positions& candidates, const std::string& family, double threshold,
         std::optional<std::vector<double>> gamma, int cycles, std::uint64_t seed) {
        const auto s = select_interactions(to_field(z), to_structure(candidates), parse_family(family),
                                           sa_options(gamma, cycles, 0, 60, seed), threshold);
        return py::make_tuple(from_structure(s.structure), s.fit, s.strength);
      },
      py::arg("z"), py::arg("candidates"), py::arg("family") = "oneeach", py::arg("threshold") = 0.1,
      py::arg("gamma") = std::nullopt, py::arg("cycles") = 2, py::arg("seed") = 0,
      "Returns (selected positions, candidate fit, per-candidate strength).");
  m.def("linear_sequence", &linear_sequence, py::arg("start"), py::arg("stop"), py::arg("length"));

  m.def(
      "log_partition",
      [](std::pair<int, int> shape, const PotentialArray& t) {
        return partition_function(Dims{shape.first, shape.second}, t);
      },
      py::arg("shape"), py::arg("theta"), "Exact log normalizing constant by enumeration.");
  m.def(
      "exact_conditional",
      [](const IntGrid& z, int row, int col, const PotentialArray& t) {
        return exact_conditional(to_field(z, t.max_label()), {row, col}, t);
      },
      py::arg("z"), py::arg("row"), py::arg("col"), py::arg("theta"));
  m.def(
      "exact_expected_stats",
      [](std::pair<int, int> shape, const PotentialArray& t) {
        return exact_expected_stats(Dims{shape.first, shape.second}, t);
      },
      py::arg("shape"), py::arg("theta"));
  m.def(
      "exact_mle",
      [](const IntGrid& z, const Positions& pos, const std::string& family) {
        return exact_mle(to_field(z), to_structure(pos), parse_family(family));
      },
      py::arg("z"), py::arg("positions"), py::arg("family"));

  m.def(
      "polynomial_basis",
      [](int d1, int d2, std::pair<int, int> shape) {
        return basis_tensor(polynomial_basis(d1, d2, Dims{shape.first, shape.second}));
      },
      py::arg("d1"), py::arg("d2"), py::arg("shape"));
  m.def(
      "fourier_basis",
      [](int k1, int k2, std::pair<int, int> shape) {
        return basis_tensor(fourier_basis(k1, k2, Dims{shape.first, shape.second}));
      },
      py::arg("k1"), py::arg("k2"), py::arg("shape"));

  py::class_<HmrfFit>(m, "HmrfFit")
      .def_property_readonly("mu", [](const HmrfFit& f) { return f.params.mu; })
      .def_property_readonly("sigma", [](const HmrfFit& f) { return f.params.sigma; })
      .def_property_readonly("beta", [](const HmrfFit& f) { return f.params.beta; })
      .def_property_readonly("z_pred", [](const HmrfFit& f) { return from_field(f.z_pred); })
      .def_property_readonly("fixed", [](const HmrfFit& f) { return from_real(f.fixed); })
      .def_property_readonly("predicted", [](const HmrfFit& f) { return from_real(f.predicted); })
      .def_readonly("iterations", &HmrfFit::iterations)
      .def_readonly("converged", &HmrfFit::converged)
      .def("summary", [](const HmrfFit& f) { return summary_report(f); });

  m.def(
      "fit_ghm",
      [](const RealGrid& y, const PotentialArray& t, std::optional<RealGrid> basis, bool equal_vars,
         std::optional<std::vector<double>> init_mus, std::optional<std::vector<double>> init_sigmas, int maxiter,
         double max_dist, int icm_cycles) {
        GhmOptions o;
        o.equal_vars = equal_vars;
        o.init_mus = std::move(init_mus);
        o.init_sigmas = std::move(init_sigmas);
        o.maxiter = maxiter;
        o.max_dist = max_dist;
        o.icm_cycles = icm_cycles;
        std::optional<BasisSet> b;
        if (basis) b = to_basis(*basis);
        return fit_ghm(to_real(y), t, b, o);
      },
      py::arg("y"), py::arg("theta"), py::arg("basis") = std::nullopt, py::arg("equal_vars") = false,
      py::arg("init_mus") = std::nullopt, py::arg("init_sigmas") = std::nullopt, py::arg("maxiter") = 100,
      py::arg("max_dist") = 1e-3, py::arg("icm_cycles") = 6,
      "EM for a Gaussian mixture with hidden MRF labels; basis has shape (n, rows, cols).");
}
