#include "sdlab/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "sdlab/carleman.hpp"
#include "sdlab/control.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/hardy.hpp"
#include "sdlab/io.hpp"
#include "sdlab/parallel.hpp"

namespace sdlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Pending file writes; flushed only after every computation succeeded.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    void add(std::string name, std::function<void(const fs::path&)> writer) {
        pending_.emplace_back(std::move(name), std::move(writer));
    }

    std::vector<std::string> flush(const json& summary) {
        fs::create_directories(dir_);
        std::vector<std::string> names{"summary.json"};
        io::write_json(dir_ / "summary.json", summary);
        for (const auto& [name, writer] : pending_) {
            writer(dir_ / name);
            names.push_back(name);
        }
        return names;
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::function<void(const fs::path&)>>> pending_;
};

struct Setup {
    CoefficientPair pair;
    Mesh mesh;
};

Setup prepare(const ExperimentConfig& cfg) {
    CoefficientPair pair = make_pair(cfg);
    double grading = 1.0;
    if (cfg.mesh.grading) {
        grading = *cfg.mesh.grading;
    } else {
        grading = default_grading(effective_exponent(pair.a), effective_exponent(pair.b));
    }
    try {
        return {std::move(pair), build_mesh(cfg.mesh.n_cells, cfg.coefficients.x0, grading)};
    } catch (const sdlab::Error& e) {
        throw ConfigError(std::string("mesh: ") + e.what());
    }
}

/// Assembled operator with lambda resolved from lambda_factor when given.
DiscreteOperator working_operator(const ExperimentConfig& cfg, const Setup& s, json& summary) {
    DiscreteOperator op = assemble(s.pair, s.mesh);
    if (cfg.coefficients.lambda_factor) {
        const double cstar = best_constant(op).cstar_h;
        op = op.with_lambda(*cfg.coefficients.lambda_factor / cstar);
        summary["cstar_h"] = cstar;
    }
    summary["lambda"] = op.lambda;
    summary["n_dof"] = op.n_dof();
    return op;
}

std::vector<double> initial_data(const ExperimentConfig& cfg, const DiscreteOperator& op) {
    constexpr double pi = std::numbers::pi;
    if (cfg.data.u0 == "sine") return op.sample([](double x) { return std::sin(pi * x); });
    std::mt19937_64 rng(cfg.data.seed);
    std::normal_distribution<double> nd;
    std::vector<double> xi(8);
    for (double& c : xi) c = nd(rng);
    return op.sample([&](double x) {
        double s = 0.0;
        for (int k = 1; k <= 8; ++k) s += xi[k - 1] * std::sin(k * pi * x) / (k * k);
        return s;
    });
}

TimeGrid time_grid(const ExperimentConfig& cfg) { return TimeGrid::make(cfg.time.T, cfg.time.n_steps); }

ControlPattern pattern(const std::array<double, 2>& ab, double x0) { return ControlPattern::make(ab[0], ab[1], x0); }

std::vector<double> node_positions(const DiscreteOperator& op) { return op.mesh.nodes; }

RunResult run_audit(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "audit"}};
    std::optional<double> cstar;
    if (cfg.coefficients.lambda_factor || s.pair.lambda > 0.0) {
        const DiscreteOperator op = working_operator(cfg, s, summary);
        cstar = summary.contains("cstar_h") ? summary["cstar_h"].get<double>() : best_constant(op).cstar_h;
        summary["cstar_h"] = *cstar;
        const auto rep = audit(s.pair.with_lambda(op.lambda), cfg.mesh.audit_grid, cstar);
        summary["audit"] = io::to_json(rep);
    } else {
        summary["lambda"] = s.pair.lambda;
        summary["audit"] = io::to_json(audit(s.pair, cfg.mesh.audit_grid));
    }
    if (cfg.output.csv) {
        std::vector<double> x = s.mesh.nodes;
        std::vector<double> a(x.size()), b(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            a[i] = s.pair.a.value(x[i]);
            b[i] = s.pair.b.value(x[i]);
        }
        out.add("coefficients.csv", [x, a, b](const fs::path& p) { io::write_columns_csv(p, {"x", "a", "b"}, {x, a, b}); });
    }
    return {summary, {}, {}};
}

RunResult run_hardy(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "hardy"}};
    const DiscreteOperator op = working_operator(cfg, s, summary);
    const HardyReport hr = best_constant(op);
    summary["hardy"] = io::to_json(hr);
    if (op.lambda != 0.0) summary["coercivity"] = io::to_json(coercivity(op, hr.cstar_h));
    if (cfg.output.csv) {
        const auto x = node_positions(op);
        const auto v = hr.eigvec;
        out.add("extremal.csv", [x, v](const fs::path& p) { io::write_columns_csv(p, {"x", "u"}, {x, v}); });
        out.add("stiffness.coo", [k = op.stiffness](const fs::path& p) { io::write_coo(p, k); });
        out.add("singular_mass.coo", [m = op.singular_mass](const fs::path& p) { io::write_coo(p, m); });
    }
    return {summary, {}, {}};
}

RunResult run_solve(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "solve"}};
    const DiscreteOperator op = working_operator(cfg, s, summary);
    const TimeGrid tg = time_grid(cfg);
    const auto u0 = initial_data(cfg, op);
    const Trajectory fwd = solve_forward(op, tg, u0, cfg.time.scheme);
    const Trajectory adj = solve_adjoint(op, tg, u0, cfg.time.scheme);
    const auto norms = mass_norms(op, fwd);
    const auto e = energy(op, adj);

    bool contractive = true;
    for (std::size_t n = 0; n + 1 < norms.size(); ++n) contractive = contractive && norms[n + 1] <= norms[n] * (1 + 1e-12);
    double emax = 0.0;
    for (double v : e) emax = std::max(emax, std::abs(v));
    bool monotone = true;
    for (std::size_t n = 0; n + 1 < e.size(); ++n) monotone = monotone && e[n + 1] >= e[n] - 1e-9 * emax;

    summary["n_steps"] = tg.n_steps;
    summary["mass_norm_initial"] = norms.front();
    summary["mass_norm_final"] = norms.back();
    summary["energy_initial"] = e.front();
    summary["energy_final"] = e.back();
    summary["contractive"] = contractive;
    summary["energy_monotone"] = monotone;

    if (cfg.output.csv) {
        out.add("forward.csv", [op, tg, fwd](const fs::path& p) { io::write_trajectory_csv(p, op, tg, fwd, "u"); });
        out.add("adjoint.csv", [op, tg, adj](const fs::path& p) { io::write_trajectory_csv(p, op, tg, adj, "v"); });
        out.add("series.csv", [t = tg.times(), norms, e](const fs::path& p) {
            io::write_columns_csv(p, {"t", "mass_norm", "energy"}, {t, norms, e});
        });
    }
    if (cfg.output.binary) {
        out.add("forward.bin", [fwd](const fs::path& p) { io::write_trajectory_binary(p, fwd); });
        out.add("adjoint.bin", [adj](const fs::path& p) { io::write_trajectory_binary(p, adj); });
    }
    return {summary, {}, {}};
}

RunResult run_carleman(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "carleman"}};
    const DiscreteOperator op = working_operator(cfg, s, summary);
    const auto& c = cfg.carleman;
    CarlemanWeight w = make_weight(op.pair.with_lambda(op.lambda), op.mesh, c.c1, c.c2_margin, 1.0);
    const double s0 = default_s0(w);
    w = w.with_s(s0);
    const TimeGrid tg = time_grid(cfg);
    const ManufacturedSolution ms = manufactured_solution(op, tg);
    const std::vector<double> s_values = c.s_list.empty() ? default_s_values(s0, c.n_s) : c.s_list;
    const auto scan = s_scan(op, w, ms.v, ms.h, s_values);

    const auto omega = pattern(c.omega, op.mesh.x0);
    const auto inner = pattern(c.omega_prime, op.mesh.x0);
    std::vector<CaccioppoliValues> cacc(s_values.size());
    parallel_for(s_values.size(), [&](std::size_t i) { cacc[i] = caccioppoli(op, w.with_s(s_values[i]), ms.v, omega, inner); });

    summary["scan"] = io::carleman_summary(scan, s0, w);
    json cj = json::array();
    double cmax = 0.0;
    for (std::size_t i = 0; i < cacc.size(); ++i) {
        const double r = cacc[i].ratio();
        cmax = std::max(cmax, r);
        cj.push_back({{"s", s_values[i]},
                      {"weighted_gradient", cacc[i].weighted_gradient},
                      {"l2_omega", cacc[i].l2_omega},
                      {"ratio", std::isfinite(r) ? json(r) : json(nullptr)}});
    }
    summary["caccioppoli"] = {{"max_ratio", std::isfinite(cmax) ? json(cmax) : json(nullptr)}, {"reports", cj}};

    if (cfg.output.csv) {
        out.add("carleman_scan.csv", [scan](const fs::path& p) { io::write_carleman_csv(p, scan); });
        std::vector<double> wg, l2, ratio;
        for (const auto& v : cacc) {
            wg.push_back(v.weighted_gradient);
            l2.push_back(v.l2_omega);
            ratio.push_back(v.ratio());
        }
        out.add("caccioppoli.csv", [s_values, wg, l2, ratio](const fs::path& p) {
            io::write_columns_csv(p, {"s", "weighted_gradient", "l2_omega", "ratio"}, {s_values, wg, l2, ratio});
        });
        out.add("psi.csv", [x = op.mesh.nodes, psi = w.psi](const fs::path& p) {
            io::write_columns_csv(p, {"x", "psi"}, {x, psi});
        });
    }
    return {summary, {}, {}};
}

RunResult run_observability(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "observability"}};
    const DiscreteOperator op = working_operator(cfg, s, summary);
    const auto& c = cfg.control;
    const auto rep = observability_constant(op, time_grid(cfg), pattern(c.omega, op.mesh.x0), initial_data(cfg, op),
                                            c.observability_iters, c.observability_tol, cfg.time.scheme);
    summary["observability"] = io::to_json(rep);
    if (cfg.output.csv) {
        std::vector<double> it(rep.history.size());
        for (std::size_t i = 0; i < it.size(); ++i) it[i] = static_cast<double>(i + 1);
        out.add("history.csv", [it, h = rep.history](const fs::path& p) {
            io::write_columns_csv(p, {"iteration", "quotient"}, {it, h});
        });
        if (!rep.extremal_vT.empty()) {
            out.add("extremal.csv", [x = op.mesh.nodes, v = op.expand(rep.extremal_vT)](const fs::path& p) {
                io::write_columns_csv(p, {"x", "vT"}, {x, v});
            });
        }
    }
    return {summary, {}, {}};
}

RunResult run_control(const ExperimentConfig& cfg, Artifacts& out) {
    const Setup s = prepare(cfg);
    json summary{{"subcommand", "control"}};
    const DiscreteOperator op = working_operator(cfg, s, summary);
    const auto& c = cfg.control;
    const TimeGrid tg = time_grid(cfg);
    HUMProblem problem;
    problem.u0 = initial_data(cfg, op);
    problem.omega = pattern(c.omega, op.mesh.x0);
    problem.epsilon = c.epsilon;
    problem.cg_tol = c.cg_tol;
    problem.cg_max = c.cg_max;
    const ControlResult res = hum_control(op, tg, problem, cfg.time.scheme);
    const double u0_norm = std::sqrt(op.mass.quadratic(problem.u0));

    summary["control"] = io::to_json(res);
    summary["initial_norm"] = u0_norm;
    summary["terminal_ratio"] = u0_norm > 0.0 ? json(res.terminal_norm / u0_norm) : json(nullptr);

    if (cfg.output.csv) {
        out.add("control.csv", [op, tg, h = res.h](const fs::path& p) { io::write_trajectory_csv(p, op, tg, h, "h"); });
        out.add("terminal.csv", [x = op.mesh.nodes, u = op.expand(res.uT)](const fs::path& p) {
            io::write_columns_csv(p, {"x", "uT"}, {x, u});
        });
        std::vector<double> it(res.functional_history.size());
        for (std::size_t i = 0; i < it.size(); ++i) it[i] = static_cast<double>(i + 1);
        out.add("functional.csv", [it, j = res.functional_history](const fs::path& p) {
            io::write_columns_csv(p, {"iteration", "functional"}, {it, j});
        });
    }
    if (cfg.output.binary) {
        out.add("control.bin", [h = res.h](const fs::path& p) { io::write_trajectory_binary(p, h); });
    }
    RunResult r{summary, {}, {}};
    if (!res.converged) {
        r.failure = "HUM conjugate gradient stopped after " + std::to_string(res.cg_iters) + " iterations without reaching cg_tol";
    }
    return r;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"audit", "hardy", "solve", "carleman", "observability", "control"};
    return names;
}

std::string usage() {
    std::ostringstream os;
    os << "usage: sdlab <subcommand> <config.json> [--set key=value ...]\n\nsubcommands:\n"
       << "  audit          hypothesis audit of the coefficient pair\n"
       << "  hardy          discrete Hardy constant and coercivity\n"
       << "  solve          forward and adjoint trajectories with energy series\n"
       << "  carleman       Carleman s-scan and Caccioppoli ratios on a manufactured solution\n"
       << "  observability  observability constant estimate\n"
       << "  control        penalized HUM null control\n";
    return os.str();
}

RunResult execute(const std::string& subcommand, const ExperimentConfig& cfg) {
    Artifacts out(cfg.output.directory / subcommand);
    RunResult r;
    if (subcommand == "audit") {
        r = run_audit(cfg, out);
    } else if (subcommand == "hardy") {
        r = run_hardy(cfg, out);
    } else if (subcommand == "solve") {
        r = run_solve(cfg, out);
    } else if (subcommand == "carleman") {
        r = run_carleman(cfg, out);
    } else if (subcommand == "observability") {
        r = run_observability(cfg, out);
    } else if (subcommand == "control") {
        r = run_control(cfg, out);
    } else {
        throw ConfigError("unknown subcommand " + subcommand);
    }
    r.files = out.flush(r.summary);
    return r;
}

int run(const std::string& subcommand, const fs::path& config_path, const std::vector<std::string>& overrides,
        std::ostream& out, std::ostream& err) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
        err << "unknown subcommand '" << subcommand << "'\n" << usage();
        return kUsage;
    }
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return kInvalidConfig;
    }
    try {
        const RunResult r = execute(subcommand, cfg);
        out << r.summary.dump(2) << '\n';
        if (!r.failure.empty()) {
            err << "numerical failure: " << r.failure << '\n';
            return kNumericalFailure;
        }
        return kSuccess;
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const sdlab::Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace sdlab::cli
