// Python bindings for the main operations: margins, envelopes, simulation,
// crossing curves and rightmost roots.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "delaymargin/constant_delay.hpp"
#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"
#include "delaymargin/model_io.hpp"
#include "delaymargin/sim.hpp"

namespace py = pybind11;
namespace dm = delaymargin;

namespace {

using NestedList = std::vector<std::vector<double>>;

dm::Matrix to_matrix(const NestedList& rows) { return dm::Matrix::from_rows(rows); }

dm::PlantModel make_model(const NestedList& a, const NestedList& b,
                          const NestedList& k, double r) {
    return dm::PlantModel(to_matrix(a), to_matrix(b), to_matrix(k), r);
}

dm::DelaySignal make_signal(const std::string& kind, double epsilon, double level,
                            std::uint64_t seed, double dwell, double freq,
                            double phase) {
    if (kind == "const") return dm::DelaySignal::constant(level, epsilon);
    if (kind == "pwc") return dm::DelaySignal::piecewise_constant(seed, dwell, epsilon);
    if (kind == "sin") return dm::DelaySignal::sinusoid(freq, phase, epsilon);
    throw dm::ValidationError("signal kind must be const | pwc | sin");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Predictor-feedback delay-robustness toolkit";

    py::register_exception<dm::Error>(m, "ToolkitError");

    py::class_<dm::DecayEnvelope>(m, "DecayEnvelope")
        .def(py::init<double, double>(), py::arg("theta"), py::arg("lambda_"))
        .def_readonly("theta", &dm::DecayEnvelope::theta)
        .def_readonly("lambda_", &dm::DecayEnvelope::lambda)
        .def("bound", &dm::DecayEnvelope::bound);

    py::class_<dm::PlantModel>(m, "PlantModel")
        .def(py::init(&make_model), py::arg("A"), py::arg("B"), py::arg("K"),
             py::arg("r"))
        .def_property_readonly("n", &dm::PlantModel::state_dim)
        .def_property_readonly("m", &dm::PlantModel::input_dim)
        .def_readonly("r", &dm::PlantModel::r)
        .def("closed_loop", [](const dm::PlantModel& p) {
            return p.closed_loop().to_rows();
        });

    py::class_<dm::MarginReport>(m, "MarginReport")
        .def_readonly("epsilon", &dm::MarginReport::epsilon)
        .def_readonly("lhs", &dm::MarginReport::lhs)
        .def_readonly("rhs", &dm::MarginReport::rhs)
        .def_readonly("feasible", &dm::MarginReport::feasible)
        .def_readonly("epsilon_max", &dm::MarginReport::epsilon_max)
        .def_readonly("sigma", &dm::MarginReport::sigma)
        .def_readonly("delta", &dm::MarginReport::delta)
        .def_readonly("scalar_path", &dm::MarginReport::scalar_path)
        .def_readonly("theta", &dm::MarginReport::theta)
        .def_readonly("lambda_", &dm::MarginReport::lambda)
        .def_readonly("capped_at_r", &dm::MarginReport::capped_at_r);

    py::class_<dm::StabilityWindow>(m, "StabilityWindow")
        .def_readonly("p", &dm::StabilityWindow::p)
        .def_readonly("tau_min", &dm::StabilityWindow::tau_min)
        .def_readonly("tau_max", &dm::StabilityWindow::tau_max)
        .def_readonly("open_below", &dm::StabilityWindow::open_below)
        .def_readonly("open_above", &dm::StabilityWindow::open_above)
        .def_property_readonly("boundary", [](const dm::StabilityWindow& w) {
            std::vector<std::pair<double, double>> out;
            for (const auto& b : w.boundary) out.emplace_back(b.omega, b.tau);
            return out;
        })
        .def_readonly("omega_roots", &dm::StabilityWindow::omega_roots);

    py::class_<dm::Figure1Row>(m, "Figure1Row")
        .def_readonly("p", &dm::Figure1Row::p)
        .def_readonly("red_tau_min", &dm::Figure1Row::red_tau_min)
        .def_readonly("red_tau_max", &dm::Figure1Row::red_tau_max)
        .def_readonly("blue_tau_min", &dm::Figure1Row::blue_tau_min)
        .def_readonly("blue_tau_max", &dm::Figure1Row::blue_tau_max);

    py::class_<dm::RootEstimate>(m, "RootEstimate")
        .def_readonly("root", &dm::RootEstimate::root)
        .def_readonly("collocation", &dm::RootEstimate::collocation)
        .def_readonly("residual", &dm::RootEstimate::residual)
        .def_readonly("refined", &dm::RootEstimate::refined);

    py::class_<dm::SimTrace>(m, "SimTrace")
        .def_readonly("dt", &dm::SimTrace::dt)
        .def_readonly("times", &dm::SimTrace::times)
        .def_readonly("x", &dm::SimTrace::x)
        .def_readonly("u", &dm::SimTrace::u)
        .def_readonly("p", &dm::SimTrace::p)
        .def_readonly("diverged", &dm::SimTrace::diverged);

    py::class_<dm::DecayFit>(m, "DecayFit")
        .def_readonly("sigma_hat", &dm::DecayFit::sigma_hat)
        .def_readonly("q_hat", &dm::DecayFit::q_hat)
        .def_readonly("estimate_holds", &dm::DecayFit::estimate_holds)
        .def_readonly("exact_zero", &dm::DecayFit::exact_zero);

    m.def("mat_exp",
          [](const NestedList& rows, double t) {
              return dm::mat_exp(to_matrix(rows), t).to_rows();
          },
          py::arg("M"), py::arg("t") = 1.0);
    m.def("spectral_norm",
          [](const NestedList& rows) { return dm::spectral_norm(to_matrix(rows)); });
    m.def("is_hurwitz", [](const NestedList& rows) {
        const auto res = dm::is_hurwitz(to_matrix(rows));
        return py::make_tuple(res.hurwitz, res.abscissa);
    });
    m.def("decay_envelope",
          [](const NestedList& rows, double mu) {
              return dm::decay_envelope(to_matrix(rows), mu);
          },
          py::arg("M"), py::arg("mu"));
    m.def("certify_envelope",
          [](const NestedList& rows, const dm::DecayEnvelope& env, std::size_t pts) {
              return dm::certify_envelope(to_matrix(rows), env, pts);
          },
          py::arg("M"), py::arg("env"), py::arg("points") = 200);

    m.def("scalar_bound", &dm::scalar_bound, py::arg("p"));
    m.def("example_plant", &dm::example_plant, py::arg("p"));
    m.def("closed_loop_margin",
          [](const dm::PlantModel& model, double eps, std::optional<double> mu) {
              return dm::closed_loop_margin(model, eps, mu);
          },
          py::arg("model"), py::arg("epsilon"), py::arg("mu") = std::nullopt);
    m.def("max_epsilon", &dm::max_epsilon, py::arg("model"));

    m.def("char_eval_scalar", &dm::char_eval_scalar, py::arg("p"), py::arg("tau"),
          py::arg("s"));
    m.def("crossing_curve", &dm::crossing_curve, py::arg("p"),
          py::arg("tau_cap") = 10.0);
    m.def("rightmost_root_scalar", &dm::rightmost_root_scalar, py::arg("p"),
          py::arg("tau"), py::arg("nodes") = 64);
    m.def("figure1_sweep", &dm::figure1_sweep, py::arg("p_grid"), py::arg("jobs") = 1);

    m.def("simulate",
          [](const dm::PlantModel& model, const std::string& kind, double epsilon,
             const std::vector<double>& x0, double t_final, double dt, double level,
             std::uint64_t seed, double dwell, double freq, double phase) {
              const dm::DelaySignal sig =
                  make_signal(kind, epsilon, level, seed, dwell, freq, phase);
              const dm::HistoryFunction hist = dm::make_compatible_history(
                  model, epsilon, x0,
                  [&](double) { return dm::Vector(model.input_dim(), 0.0); }, dt);
              return dm::simulate_closed_loop(model, sig, hist, t_final, dt);
          },
          py::arg("model"), py::arg("signal"), py::arg("epsilon"), py::arg("x0"),
          py::arg("t_final"), py::arg("dt"), py::arg("level") = 0.0,
          py::arg("seed") = 1, py::arg("dwell") = 0.25, py::arg("freq") = 0.5,
          py::arg("phase") = 0.0);
    m.def("fit_decay",
          [](const dm::SimTrace& trace, double burn_in) {
              return dm::fit_decay(trace, burn_in);
          },
          py::arg("trace"), py::arg("burn_in"));
    m.def("parse_model", &dm::parse_model, py::arg("json_text"));
    m.def("certificate_json", &dm::certificate_to_json, py::arg("report"));
}
