// Command-line front end: margin reports, closed-loop simulation, decay
// certificates, constant-delay analysis and the measurable-vs-constant
// delay-window sweep. Exit codes: 0 success, 1 input error, 2 infeasible,
// 3 divergence, 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaymargin/constant_delay.hpp"
#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"
#include "delaymargin/model_io.hpp"
#include "delaymargin/sim.hpp"

namespace dm = delaymargin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw dm::ValidationError("cannot parse number '" + token + "'");
        }
    }
    return out;
}

dm::DelaySignal parse_signal(const std::string& spec, double epsilon) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ':')) parts.push_back(token);
    try {
        if (parts.size() == 2 && parts[0] == "const")
            return dm::DelaySignal::constant(std::stod(parts[1]), epsilon);
        if (parts.size() == 3 && parts[0] == "pwc")
            return dm::DelaySignal::piecewise_constant(std::stoull(parts[1]),
                                                       std::stod(parts[2]), epsilon);
        if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "sin")
            return dm::DelaySignal::sinusoid(
                std::stod(parts[1]), parts.size() == 3 ? std::stod(parts[2]) : 0.0,
                epsilon);
    } catch (const dm::Error&) {
        throw;
    } catch (const std::exception&) {
        throw dm::ValidationError("bad signal spec '" + spec + "'");
    }
    throw dm::ValidationError(
        "signal spec must be const:c | pwc:seed:dwell | sin:freq[:phase]");
}

int run_margin(const std::string& model_path, std::optional<double> eps,
               bool find_max, std::optional<double> mu, bool as_json) {
    const dm::PlantModel model = dm::load_model(model_path);
    if (find_max) {
        const dm::MarginReport rep = dm::max_epsilon(model);
        if (as_json) {
            nlohmann::json j;
            j["epsilon_max"] = rep.epsilon_max;
            j["capped_at_r"] = rep.capped_at_r;
            j["scalar_path"] = rep.scalar_path;
            j["theta"] = rep.theta;
            j["lambda"] = rep.lambda;
            std::cout << j.dump(2) << "\n";
        } else {
            std::printf("epsilon_max = %.12g%s\n", rep.epsilon_max,
                        rep.capped_at_r ? "  (feasible up to epsilon = r)" : "");
        }
        return kExitOk;
    }
    const dm::MarginReport rep = dm::closed_loop_margin(model, eps.value_or(0.0), mu);
    if (as_json) {
        std::cout << dm::certificate_to_json(rep) << "\n";
    } else {
        std::printf("epsilon   = %.12g\n", rep.epsilon);
        std::printf("lhs       = %.12g\n", rep.lhs);
        std::printf("rhs       = %.12g\n", rep.rhs);
        std::printf("feasible  = %s\n", rep.feasible ? "true" : "false");
        std::printf("path      = %s\n", rep.scalar_path ? "scalar" : "general");
        if (rep.feasible) {
            std::printf("sigma     = %.12g\n", rep.sigma);
            std::printf("delta     = %.12g\n", rep.delta);
        }
    }
    return rep.feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const std::string& model_path, double eps, const std::string& signal_spec,
                 const std::string& x0_text, double t_final, double dt,
                 const std::string& out_path) {
    const dm::PlantModel model = dm::load_model(model_path);
    dm::Vector x0 = parse_number_list(x0_text);
    if (x0.size() == 1 && model.state_dim() > 1)
        x0.assign(model.state_dim(), x0.front());
    const dm::DelaySignal signal = parse_signal(signal_spec, eps);
    const dm::HistoryFunction history = dm::make_compatible_history(
        model, eps, x0, [&](double) { return dm::Vector(model.input_dim(), 0.0); }, dt);
    const dm::SimTrace trace =
        dm::simulate_closed_loop(model, signal, history, t_final, dt);
    dm::write_trace_csv(trace, out_path);

    nlohmann::json j;
    j["trace"] = out_path;
    j["diverged"] = trace.diverged;
    j["t_end"] = trace.times.back();
    if (!trace.diverged) {
        const dm::DecayFit fit = dm::fit_decay(trace, model.r + eps);
        j["sigma_hat"] = fit.sigma_hat;
        j["q_hat"] = fit.q_hat;
        j["estimate_holds"] = fit.estimate_holds;
        j["exact_zero"] = fit.exact_zero;
    }
    std::cout << j.dump(2) << "\n";
    return trace.diverged ? kExitDivergence : kExitOk;
}

int run_figure1(double pmin, double pmax, unsigned steps, unsigned jobs,
                const std::string& out_path) {
    if (!(pmin > 1.0) || pmax < pmin)
        throw dm::ValidationError("figure1 requires 1 < pmin <= pmax");
    std::vector<double> grid;
    if (steps <= 1) {
        grid.push_back(pmin);
    } else {
        for (unsigned i = 0; i < steps; ++i)
            grid.push_back(pmin + (pmax - pmin) * static_cast<double>(i) /
                                      static_cast<double>(steps - 1));
    }
    const auto rows = dm::figure1_sweep(grid, jobs);
    dm::write_figure1_csv(rows, out_path);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return kExitOk;
}

int run_certify(const std::string& model_path, double eps) {
    const dm::PlantModel model = dm::load_model(model_path);
    const dm::MarginReport rep = dm::closed_loop_margin(model, eps);
    if (!rep.feasible) {
        std::fprintf(stderr,
                     "infeasible at epsilon = %.12g: lhs = %.12g >= rhs = %.12g\n",
                     eps, rep.lhs, rep.rhs);
        return kExitInfeasible;
    }
    // re-verify the defining inequalities before emitting the certificate
    const dm::Matrix cl = model.closed_loop();
    const dm::DecayEnvelope env{rep.theta, rep.lambda};
    if (!dm::certify_envelope(cl, env))
        throw dm::NumericalError("certificate envelope failed re-validation");
    const dm::Matrix c = dm::mat_exp(model.a, model.r) * (model.b * model.k);
    const dm::ComparisonSystem sys(cl, c, model.r, env, false);
    if (!(rep.lhs < rep.rhs) ||
        !(dm::contraction_delta(sys, eps, rep.sigma, rep.scalar_path) < 1.0))
        throw dm::NumericalError("certificate failed re-validation");
    std::cout << dm::certificate_to_json(rep) << "\n";
    return kExitOk;
}

int run_analyze_constant(const std::optional<std::string>& model_path,
                         std::optional<double> gain, double tau, unsigned nodes) {
    std::optional<dm::PlantModel> model;
    if (model_path)
        model.emplace(dm::load_model(*model_path));
    else if (gain)
        model.emplace(dm::example_plant(*gain));
    else
        throw dm::ValidationError("analyze-constant needs a model file or --gain");
    const dm::RootEstimate est = dm::rightmost_root(*model, tau, nodes);
    const bool stable = est.root.real() < 0.0;
    std::printf("rightmost_root = %.12g %+.12gi\n", est.root.real(), est.root.imag());
    std::printf("residual       = %.3e%s\n", est.residual,
                est.refined ? "" : "  (collocation estimate, Newton not converged)");
    std::printf("verdict        = %s\n", stable ? "stable" : "unstable");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictor-feedback delay-robustness toolkit"};
    app.require_subcommand(1);

    std::string model_path, signal_spec = "const:0", x0_text = "0";
    std::string out_path = "trace.csv";
    std::optional<double> eps_opt, mu_opt;
    double eps = 0.0, t_final = 20.0, dt = 1e-3, tau = 1.0;
    double pmin = 1.5, pmax = 5.0;
    unsigned steps = 8, jobs = 1, nodes = 64;
    bool find_max = false, as_json = false;
    std::optional<std::string> model_opt;
    std::optional<double> gain_opt;

    auto* margin = app.add_subcommand("margin", "Evaluate the small-gain margin");
    margin->add_option("model", model_path, "model JSON file")->required();
    margin->add_option("--eps", eps_opt, "perturbation magnitude to check");
    margin->add_flag("--find-max", find_max, "bisect the maximal certified epsilon");
    margin->add_option("--mu", mu_opt, "decay-envelope rate (default: optimized)");
    margin->add_flag("--json", as_json, "JSON output");

    auto* simulate = app.add_subcommand("simulate", "Run the closed loop");
    simulate->add_option("model", model_path, "model JSON file")->required();
    simulate->add_option("--eps", eps, "perturbation magnitude");
    simulate->add_option("--signal", signal_spec,
                         "const:c | pwc:seed:dwell | sin:freq[:phase]");
    simulate->add_option("--x0", x0_text, "initial state, comma separated");
    simulate->add_option("--tfinal", t_final, "final time");
    simulate->add_option("--dt", dt, "step size");
    simulate->add_option("--out", out_path, "trace CSV path");

    auto* figure1 = app.add_subcommand("figure1",
                                       "Sweep delay windows over a gain grid");
    figure1->add_option("--pmin", pmin, "smallest gain (> 1)");
    figure1->add_option("--pmax", pmax, "largest gain");
    figure1->add_option("--steps", steps, "number of grid points");
    figure1->add_option("--jobs", jobs, "concurrent rows");
    figure1->add_option("--out", out_path, "output CSV path")->required();

    auto* certify = app.add_subcommand("certify", "Emit a decay certificate");
    certify->add_option("model", model_path, "model JSON file")->required();
    certify->add_option("--eps", eps, "perturbation magnitude")->required();
    certify->add_flag("--json", as_json, "JSON output (always on for certificates)");

    auto* analyze = app.add_subcommand("analyze-constant",
                                       "Rightmost root for a constant delay");
    analyze->add_option("model", model_opt, "model JSON file");
    analyze->add_option("--gain", gain_opt, "scalar example gain p > 1");
    analyze->add_option("--tau", tau, "actual constant delay")->required();
    analyze->add_option("--N", nodes, "collocation intervals");

    CLI11_PARSE(app, argc, argv);

    try {
        if (margin->parsed())
            return run_margin(model_path, eps_opt, find_max, mu_opt, as_json);
        if (simulate->parsed())
            return run_simulate(model_path, eps, signal_spec, x0_text, t_final, dt,
                                out_path);
        if (figure1->parsed()) return run_figure1(pmin, pmax, steps, jobs, out_path);
        if (certify->parsed()) return run_certify(model_path, eps);
        if (analyze->parsed())
            return run_analyze_constant(model_opt, gain_opt, tau, nodes);
    } catch (const dm::InfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const dm::NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const dm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitInput;
}
