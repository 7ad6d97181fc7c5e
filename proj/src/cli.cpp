#include "opidyn/cli.hpp"

#include "opidyn/analysis.hpp"
#include "opidyn/dynamics.hpp"
#include "opidyn/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace opidyn::cli {

namespace {

NetworkDocument load_document(const std::string& path, std::ostream& err) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) throw ParseError("cannot open input file: " + path);
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    NetworkDocument doc = load_network(buffer.str());
    for (const std::string& warning : doc.warnings) err << "warning: " << warning << "\n";
    return doc;
}

void emit(const std::string& content, const std::string& output_path, std::ostream& out) {
    if (output_path.empty()) {
        out << content;
    } else {
        write_file_atomic(output_path, content);
    }
}

std::string resolve_model(const std::string& requested, const NetworkDocument& doc) {
    if (requested != "auto") return requested;
    if (doc.lambda) return "fj";
    if (doc.gamma || doc.sources_b) return "taylor";
    return doc.stochastic ? "degroot" : "abelson";
}

TaylorModel taylor_from_document(const NetworkDocument& doc) {
    SquareNonnegativeMatrix a = doc.nonnegative();
    if (doc.sources_b) {
        return TaylorModel::from_sources(std::move(a), *doc.sources_b, *doc.sources_s);
    }
    if (!doc.gamma || !doc.u) {
        throw ParseError("taylor model needs either sources {B,s} or gamma plus u");
    }
    return TaylorModel(std::move(a), *doc.gamma, *doc.u);
}

Matrix initial_state(const NetworkDocument& doc) {
    if (doc.x0) return *doc.x0;
    if (doc.u) return *doc.u;  // the Friedkin-Johnsen tradition: u = x(0)
    throw ParseError("no initial state: the document provides neither x0 nor u");
}

Matrix rows_of(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
    return out;
}

// Long-run limit of x(k+1) = W x(k); caller guarantees regularity.
Matrix degroot_limit(const StochasticMatrix& w, const Matrix& x0) {
    Matrix x = x0;
    for (int k = 0; k < 1000000; ++k) {
        Matrix next = w.values() * x;
        const double diff = (next - x).lpNorm<Eigen::Infinity>();
        x = std::move(next);
        if (diff < 1e-13) break;
    }
    return x;
}

// P-infinity x0 for the Laplacian flow, by squaring e^{-L} until stationary.
Matrix laplacian_flow_limit(const LaplacianMatrix& l, const Matrix& x0) {
    Matrix propagator = matrix_exponential(-l.values(), 1.0);
    for (int k = 0; k < 80; ++k) {
        Matrix next = propagator * propagator;
        const double diff = (next - propagator).lpNorm<Eigen::Infinity>();
        propagator = std::move(next);
        if (diff < 1e-13) break;
    }
    return propagator * x0;
}

AnalysisReport structural_report(const DirectedWeightedGraph& g) {
    AnalysisReport report;
    report.n = g.node_count();
    const StrongComponentDecomposition scc = strong_components(g);
    report.components = scc.components;
    report.closed = scc.closed;
    report.periods = component_periods(g, scc);
    const RootReport roots = roots_and_quasi_strong(g);
    report.roots = roots.roots;
    report.quasi_strong = roots.quasi_strong;
    report.sources = source_nodes(g);
    return report;
}

// Shared by analyze (with numerics) and predict (graph-theoretic only).
AnalysisReport build_report(const NetworkDocument& doc, const std::string& model,
                            bool with_numerics) {
    const DirectedWeightedGraph g = graph_from_matrix(doc.matrix);
    AnalysisReport report = structural_report(g);
    report.model = model;

    if (model == "degroot") {
        const StochasticMatrix w = doc.require_stochastic();
        report.verdict = degroot_verdict(w);
        if (with_numerics && report.verdict->consensus) {
            report.social_power = french_social_power(w);
        }
    } else if (model == "abelson") {
        const SquareNonnegativeMatrix a = doc.nonnegative();
        report.verdict = abelson_verdict(a);
        if (with_numerics && report.verdict->consensus) {
            report.social_power = abelson_social_power(a);
        }
    } else if (model == "fj") {
        const StochasticMatrix w = doc.require_stochastic();
        if (!doc.lambda || !doc.u) throw ParseError("fj model needs lambda and u");
        if ((doc.lambda->array() == 1.0).all()) {
            report.model = "degroot";
            report.verdict = degroot_verdict(w);
            if (with_numerics && report.verdict->consensus) {
                report.social_power = french_social_power(w);
            }
            return report;
        }
        const PDependencePartition partition =
            classify_p_dependence(g, prejudiced_from_lambda(*doc.lambda));
        report.partition = partition;
        report.stable = partition.p_independent.empty();
        if (with_numerics) {
            std::optional<Matrix> x2;
            if (!partition.p_independent.empty()) {
                const Matrix x0 = doc.x0 ? *doc.x0 : *doc.u;
                const StochasticMatrix w22(
                    [&] {
                        Matrix sub(partition.p_independent.size(), partition.p_independent.size());
                        for (std::size_t i = 0; i < partition.p_independent.size(); ++i) {
                            for (std::size_t j = 0; j < partition.p_independent.size(); ++j) {
                                sub(i, j) = w.values()(partition.p_independent[i],
                                                       partition.p_independent[j]);
                            }
                        }
                        return sub;
                    }());
                if (degroot_verdict(w22).convergent) {
                    x2 = degroot_limit(w22, rows_of(x0, partition.p_independent));
                }
            }
            const Matrix* c_ptr = doc.c ? &*doc.c : nullptr;
            const FjOutcome outcome = fj_stability_and_final(w, *doc.lambda, *doc.u, c_ptr,
                                                             x2 ? &*x2 : nullptr);
            ConvergenceVerdict verdict;
            verdict.convergent = outcome.convergent;
            verdict.consensus = false;
            verdict.reason = outcome.convergent
                                 ? (outcome.stable ? "all-p-dependent"
                                                   : "p-independent-block-regular")
                                 : outcome.reason;
            report.verdict = verdict;
            if (outcome.final_available) report.final_opinions = outcome.final_opinions;
        } else {
            ConvergenceVerdict verdict;
            verdict.consensus = false;
            if (partition.p_independent.empty()) {
                verdict.convergent = true;
                verdict.reason = "all-p-dependent";
            } else {
                Matrix sub(partition.p_independent.size(), partition.p_independent.size());
                for (std::size_t i = 0; i < partition.p_independent.size(); ++i) {
                    for (std::size_t j = 0; j < partition.p_independent.size(); ++j) {
                        sub(i, j) =
                            w.values()(partition.p_independent[i], partition.p_independent[j]);
                    }
                }
                const ConvergenceVerdict block = degroot_verdict(StochasticMatrix(sub));
                verdict.convergent = block.convergent;
                verdict.reason = block.convergent ? "p-independent-block-regular"
                                                  : "p-independent-block-not-regular:" + block.reason;
            }
            report.verdict = verdict;
        }
    } else if (model == "taylor") {
        const TaylorModel taylor = taylor_from_document(doc);
        const PDependencePartition partition =
            classify_p_dependence(g, prejudiced_from_gamma(taylor.gamma));
        report.partition = partition;
        report.stable = partition.p_independent.empty() && !partition.p_dependent.empty();
        ConvergenceVerdict verdict;
        verdict.convergent = true;  // Hurwitz block driven by a convergent flow
        verdict.consensus = false;
        verdict.reason = *report.stable ? "all-p-dependent"
                                        : "p-independent-agents-follow-laplacian-flow";
        report.verdict = verdict;
        if (with_numerics && !partition.p_dependent.empty()) {
            std::optional<Matrix> x2;
            if (!partition.p_independent.empty()) {
                const Matrix x0 = doc.x0 ? *doc.x0 : taylor.u;
                Matrix sub(partition.p_independent.size(), partition.p_independent.size());
                for (std::size_t i = 0; i < partition.p_independent.size(); ++i) {
                    for (std::size_t j = 0; j < partition.p_independent.size(); ++j) {
                        sub(i, j) = taylor.a.values()(partition.p_independent[i],
                                                      partition.p_independent[j]);
                    }
                }
                x2 = laplacian_flow_limit(laplacian_of(SquareNonnegativeMatrix(sub)),
                                          rows_of(x0, partition.p_independent));
            }
            const TaylorOutcome outcome = taylor_stability_and_final(
                taylor.a, taylor.gamma, taylor.u, x2 ? &*x2 : nullptr);
            if (outcome.final_available) report.final_opinions = outcome.final_opinions;
        }
    } else {
        throw ParseError("unknown model '" + model + "'");
    }
    return report;
}

struct CommonOptions {
    std::string input;
    std::string output;
    std::string seed_note;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--input", options.input, "network document (JSON)")->required();
    cmd->add_option("--output", options.output, "output path (default: stdout)");
    cmd->add_option("--seed-note", options.seed_note, "free-form note copied into the output");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"opiniondyn: analysis and simulation of opinion-dynamics models"};
    app.require_subcommand(1);

    CommonOptions analyze_opts, predict_opts, simulate_opts, centrality_opts, containment_opts;
    std::string analyze_model = "auto";
    std::string predict_model = "auto";

    CLI::App* analyze = app.add_subcommand(
        "analyze", "structural facts, verdicts, social power and fixed points");
    add_common(analyze, analyze_opts);
    analyze->add_option("--model", analyze_model,
                        "degroot | abelson | taylor | fj | auto (default)");

    CLI::App* predict = app.add_subcommand(
        "predict", "graph-theoretic verdicts only; no linear solves");
    add_common(predict, predict_opts);
    predict->add_option("--model", predict_model,
                        "degroot | abelson | taylor | fj | auto (default)");

    CLI::App* simulate = app.add_subcommand("simulate", "integrate a trajectory, emit CSV");
    add_common(simulate, simulate_opts);
    std::string sim_model;
    int steps = 1000;
    double tol = kDefaultEarlyStopTol;
    double horizon = 10.0;
    double dt = kDefaultDt;
    std::string method = "exact";
    std::string coupling = "constant-1";
    simulate->add_option("--model", sim_model, "degroot | fj | abelson | abelson-nonlinear | taylor")
        ->required();
    simulate->add_option("--steps", steps, "discrete-time step budget (default 1000)");
    simulate->add_option("--tol", tol, "early-stop tolerance (default 1e-10)");
    simulate->add_option("--horizon", horizon, "continuous-time horizon (default 10)");
    simulate->add_option("--dt", dt, "continuous-time step (default 0.01)");
    simulate->add_option("--method", method, "exact | rk4 (continuous models)");
    simulate->add_option("--coupling", coupling,
                         "nonlinear coupling: constant-1 | inverse-quadratic");

    CLI::App* centrality = app.add_subcommand("centrality", "agent centrality vectors");
    add_common(centrality, centrality_opts);
    std::string cent_method;
    double damping = 0.15;
    double alpha = -1.0;
    centrality->add_option("--method", cent_method, "social-power | influence | pagerank")
        ->required();
    centrality->add_option("--damping", damping, "pagerank teleportation probability (default 0.15)");
    centrality->add_option("--alpha", alpha, "influence: override Lambda with alpha*I");

    CLI::App* containment = app.add_subcommand(
        "containment", "leader-follower hull certification for the sourced Taylor model");
    add_common(containment, containment_opts);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*analyze || *predict) {
            const bool with_numerics = static_cast<bool>(*analyze);
            const CommonOptions& options = with_numerics ? analyze_opts : predict_opts;
            const std::string& requested = with_numerics ? analyze_model : predict_model;
            const NetworkDocument doc = load_document(options.input, err);
            AnalysisReport report = build_report(doc, resolve_model(requested, doc), with_numerics);
            report.seed_note = options.seed_note;
            emit(render_report(report), options.output, out);
        } else if (*simulate) {
            const NetworkDocument doc = load_document(simulate_opts.input, err);
            const Matrix x0 = initial_state(doc);
            Trajectory traj;
            if (sim_model == "degroot") {
                traj = degroot_simulate(doc.require_stochastic(), x0, steps, tol);
            } else if (sim_model == "fj") {
                if (!doc.lambda || !doc.u) throw ParseError("fj model needs lambda and u");
                const Matrix* c_ptr = doc.c ? &*doc.c : nullptr;
                traj = fj_simulate(doc.require_stochastic(), *doc.lambda, *doc.u, x0, steps, tol,
                                   c_ptr);
            } else if (sim_model == "abelson") {
                const OdeMethod ode = method == "rk4" ? OdeMethod::kRk4 : OdeMethod::kExactExpm;
                traj = abelson_simulate_linear(doc.nonnegative(), x0, horizon, dt, ode);
            } else if (sim_model == "abelson-nonlinear") {
                if (x0.cols() != 1) throw ParseError("abelson-nonlinear supports d = 1 only");
                traj = abelson_simulate_nonlinear(doc.nonnegative(), coupling_by_name(coupling),
                                                  x0.col(0), horizon, dt);
            } else if (sim_model == "taylor") {
                const TaylorModel taylor = taylor_from_document(doc);
                const OdeMethod ode = method == "rk4" ? OdeMethod::kRk4 : OdeMethod::kExactExpm;
                traj = taylor_simulate(taylor.a, taylor.gamma, taylor.u, x0, horizon, dt, ode);
            } else {
                throw ParseError("unknown simulation model '" + sim_model + "'");
            }
            emit(save_trajectory(traj), simulate_opts.output, out);
            err << "stop reason: " << to_string(traj.stop_reason) << "\n";
            if (traj.used_rk4_fallback) err << "note: exact stepping unavailable, used rk4\n";
        } else if (*centrality) {
            const NetworkDocument doc = load_document(centrality_opts.input, err);
            CentralityResult result;
            if (cent_method == "social-power") {
                result = doc.stochastic ? french_social_power(doc.require_stochastic())
                                        : abelson_social_power(doc.nonnegative());
            } else if (cent_method == "influence") {
                Vector lambda;
                if (alpha >= 0.0) {
                    if (alpha >= 1.0) throw ParseError("--alpha must lie in [0,1)");
                    lambda = Vector::Constant(doc.n, alpha);
                } else if (doc.lambda) {
                    lambda = *doc.lambda;
                } else {
                    throw ParseError("influence centrality needs lambda in the document "
                                     "or --alpha");
                }
                result = influence_centrality(doc.require_stochastic(), lambda);
            } else if (cent_method == "pagerank") {
                result = pagerank(doc.require_stochastic(), damping);
            } else {
                throw ParseError("unknown centrality method '" + cent_method + "'");
            }
            emit(render_centrality(result, centrality_opts.seed_note), centrality_opts.output, out);
        } else if (*containment) {
            const NetworkDocument doc = load_document(containment_opts.input, err);
            if (!doc.sources_b) {
                throw ParseError("containment needs sources {B, s} (leader positions)");
            }
            const TaylorModel taylor = taylor_from_document(doc);
            const TaylorOutcome outcome =
                taylor_stability_and_final(taylor.a, taylor.gamma, taylor.u);
            if (!outcome.stable) {
                throw AnalyticalRefusal(
                    "containment not guaranteed: some agents are P-independent");
            }
            // x(inf) = M u = (M R) s with row-stochastic R built from B.
            const int n = taylor.a.size();
            const Eigen::Index m = doc.sources_b->cols();
            Matrix r(n, m);
            for (int i = 0; i < n; ++i) {
                if (taylor.gamma(i) > 0.0) {
                    r.row(i) = doc.sources_b->row(i) / taylor.gamma(i);
                } else {
                    r.row(i).setConstant(1.0 / static_cast<double>(m));
                }
            }
            const Matrix certificate = outcome.mixing * r;
            const ContainmentReport report =
                containment_check(outcome.final_opinions, *doc.sources_s, &certificate);
            emit(render_containment(report, outcome.final_opinions, *doc.sources_s,
                                    containment_opts.seed_note),
                 containment_opts.output, out);
        }
    } catch (const AnalyticalRefusal& e) {
        err << "refused: " << e.what() << "\n";
        return 3;
    } catch (const AmbiguityError& e) {
        err << "refused: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace opidyn::cli
