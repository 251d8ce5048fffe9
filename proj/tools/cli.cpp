#include "cli.hpp"

#include <koopq/csv.hpp>
#include <koopq/dynamics.hpp>
#include <koopq/errors.hpp>
#include <koopq/fock.hpp>
#include <koopq/qcirc.hpp>
#include <koopq/qmda.hpp>
#include <koopq/rkha.hpp>
#include <koopq/spectral.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace koopq::cli {

namespace fs = std::filesystem;
using dynamics::FourierObservable;
using dynamics::RotationSystem;
using dynamics::TorusPoint;

namespace {

std::ofstream open_csv(const fs::path& path, const std::string& command, const ExperimentConfig& cfg) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header_line(command, cfg) << '\n';
    return out;
}

void close_csv(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

qmda::ObservationModel observation_model(const ObservationConfig& o) {
    qmda::ObservationModel m;
    if (o.kernel == "gaussian") m.kernel = qmda::ObservationModel::Kernel::Gaussian;
    else if (o.kernel == "event") m.kernel = qmda::ObservationModel::Kernel::Event;
    else m.kernel = qmda::ObservationModel::Kernel::Uninformative;
    m.epsilon = o.epsilon;
    m.delta = o.delta;
    m.noise_sd = o.noise_sd;
    return m;
}

FourierObservable named_observable(const std::string& name, std::size_t dim) {
    if (name == "cos") return FourierObservable::cosine(dim);
    if (name == "one") return FourierObservable::constant(dim, 1.0);
    FourierObservable f(dim);
    MultiIndex j(dim, 0);
    j[0] = 1;
    f.set(j, cplx{0.0, -0.5});
    j[0] = -1;
    f.set(j, cplx{0.0, 0.5});
    return f;
}

double exact_value(const FourierObservable& f, const RotationSystem& sys, const TorusPoint& x, double t) {
    return dynamics::evaluate(dynamics::koopman_exact(f, sys, t), x).real();
}

void require_rotation(const ExperimentConfig& cfg, const std::string& command) {
    if (cfg.system.kind != "rotation")
        throw ConfigError("system.kind: " + command + " needs a rotation system");
}

}  // namespace

std::string header_line(const std::string& command, const ExperimentConfig& cfg) {
    return std::string("# koopq ") + KOOPQ_VERSION + " command=" + command +
           " config_hash=" + config_hash(cfg) + " schema_version=" + std::to_string(schema_version);
}

std::vector<fs::path> cmd_rotate(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.cfg;
    const fs::path path = ctx.out / "trajectory.csv";
    std::vector<TorusPoint> traj;
    double dt = cfg.system.dt;
    if (cfg.system.kind == "orbit") {
        const dynamics::PeriodicOrbitSystem sys(cfg.system.states);
        int i = cfg.system.initial_state;
        for (std::size_t n = 0; n < cfg.system.samples; ++n, i = sys.step(i)) traj.push_back(sys.point(i));
        dt = 1.0;
    } else {
        const RotationSystem sys(cfg.system.alpha);
        if (auto w = dynamics::near_rational_warning(sys)) log << "warning: " << *w << '\n';
        traj = dynamics::sample_trajectory(sys, TorusPoint(cfg.system.x0), dt, cfg.system.samples);
    }
    auto out = open_csv(path, "rotate", cfg);
    dynamics::write_trajectory_csv(out, traj, dt);
    close_csv(out, path);
    return {path};
}

std::vector<fs::path> cmd_filter(const RunContext& ctx, std::ostream&) {
    const auto& cfg = ctx.cfg;
    const auto model = observation_model(cfg.qmda.observation);

    qmda::FilterOptions base;
    base.rank = cfg.qmda.rank;
    base.steps = cfg.qmda.steps;
    base.grid = cfg.qmda.grid;
    base.seed = cfg.seed;
    if (!cfg.qmda.observations_csv.empty()) {
        std::ifstream in(cfg.qmda.observations_csv);
        if (!in) throw ConfigError("qmda.observations_csv: cannot open " + cfg.qmda.observations_csv);
        base.observations = qmda::read_observations_csv(in);
    }

    std::vector<qmda::FilterMode> modes;
    if (cfg.system.kind == "orbit")
        modes = {qmda::FilterMode::Classical, qmda::FilterMode::Quantum, qmda::FilterMode::QuantumProjected};
    else
        modes = {qmda::FilterMode::Classical, qmda::FilterMode::QuantumProjected};

    std::vector<std::optional<qmda::FilterTrace>> traces(modes.size());
    parallel_for(modes.size(), ctx.threads, [&](std::size_t k) {
        auto opt = base;
        opt.mode = modes[k];
        if (cfg.system.kind == "orbit") {
            const dynamics::PeriodicOrbitSystem sys(cfg.system.states);
            traces[k] = qmda::run_filter(sys, model, cfg.system.initial_state, opt);
        } else {
            if (cfg.dim() != 1) throw ConfigError("system.alpha: filtering on rotations needs d = 1");
            const RotationSystem sys(cfg.system.alpha);
            traces[k] = qmda::run_filter(sys, cfg.system.dt, model, TorusPoint(cfg.system.x0), opt);
        }
    });

    const fs::path path = ctx.out / "filter.csv";
    auto out = open_csv(path, "filter", cfg);
    qmda::write_filter_csv_header(out);
    for (const auto& tr : traces) qmda::write_filter_csv_rows(out, *tr);
    close_csv(out, path);
    return {path};
}

std::vector<fs::path> cmd_koopman(const RunContext& ctx, std::ostream&) {
    const auto& cfg = ctx.cfg;
    require_rotation(cfg, "koopman");
    const RotationSystem sys(cfg.system.alpha);
    const std::size_t d = cfg.dim();
    const auto& kc = cfg.kernel;
    const auto& fc = cfg.fock;
    const TorusPoint x(fc.x);
    const rkha::SubexpWeight w_tau(kc.tau, kc.p, d);

    const rkha::TruncatedLattice lat(d, kc.bandwidth);
    const auto gen = spectral::analytic_generator(sys, lat);

    // Data-driven generator on the Galerkin lattice.
    const rkha::TruncatedLattice small(d, kc.galerkin_bandwidth);
    const auto traj = dynamics::sample_trajectory(sys, TorusPoint(cfg.system.x0), cfg.system.dt,
                                                  cfg.system.samples);
    const auto dd = spectral::data_driven_generator(traj, cfg.system.dt, small);
    const auto dd_ref = spectral::analytic_generator(sys, small);

    std::vector<fs::path> written;
    {
        const fs::path path = ctx.out / "frequencies.csv";
        auto out = open_csv(path, "koopman", cfg);
        spectral::write_frequency_csv(out, dd, dd_ref);
        close_csv(out, path);
        written.push_back(path);
    }

    struct Row {
        std::string observable, method;
        double t;
        int order;
        double value, exact, truncation, smoothing;
    };
    const std::vector<std::string> names{"one", "cos"};

    // One task per (observable, t); rows inside a task follow sweep order.
    const std::size_t tasks = names.size() * fc.times.size();
    std::vector<std::vector<Row>> rows(tasks);
    parallel_for(tasks, ctx.threads, [&](std::size_t k) {
        const std::string& name = names[k / fc.times.size()];
        const double t = fc.times[k % fc.times.size()];
        const auto f = named_observable(name, d);
        const double exact = exact_value(f, sys, x, t);
        const double sr = spectral::smoothing_residual(w_tau, gen, f, t);
        auto& out = rows[k];

        const double galerkin = dynamics::evaluate(spectral::evolve(gen, f, t), x).real();
        out.push_back({name, "galerkin-analytic", t, kc.bandwidth, galerkin, exact, 0.0, sr});
        const double dd_val = dynamics::evaluate(spectral::evolve(dd, f, t), x).real();
        out.push_back({name, "galerkin-data-driven", t, kc.galerkin_bandwidth, dd_val, exact, 0.0, sr});

        if (d == 1) {
            fock::ForecastParams fp;
            fp.sigma = fc.sigma;
            fp.tau = kc.tau;
            fp.p = kc.p;
            fp.kernel_kappa = fc.kernel_kappa;
            fp.modes = fc.modes;
            fp.grid = fc.grid;
            fp.weight = fock::FockWeight(fc.sigma_w, fc.p_w, fc.nmax);
            for (int m : fc.m) {
                fp.m = m;
                const auto r = fock::second_quantization_forecast(f, gen, fp, x, t);
                out.push_back({name, "second-quantization", t, m, r.value, exact, r.truncation_mass, sr});
            }
            const rkha::TruncatedLattice tn_lat(1, fc.tn_bandwidth);
            const auto tn_gen = spectral::analytic_generator(sys, tn_lat);
            fock::TensorNetworkParams tp;
            tp.sigma = fc.tn_sigma;
            tp.p = kc.p;
            tp.kappa = fc.tn_kappa;
            for (int n : fc.tn_orders) {
                tp.n = n;
                const auto r = fock::tensor_network_expectation(f, tn_gen, x, tp, t);
                out.push_back({name, "tensor-network", t, n, r.value, exact, r.truncation_bound, sr});
            }
        }
    });

    const fs::path path = ctx.out / "forecast.csv";
    auto out = open_csv(path, "koopman", cfg);
    out << "observable,method,t,m_or_n,value,exact,abs_error,truncation_mass,smoothing_residual\n";
    for (const auto& task : rows)
        for (const auto& r : task)
            out << r.observable << ',' << r.method << ',' << csv::fmt(r.t) << ',' << r.order << ','
                << csv::fmt(r.value) << ',' << csv::fmt(r.exact) << ','
                << csv::fmt(std::abs(r.value - r.exact)) << ',' << csv::fmt(r.truncation) << ','
                << csv::fmt(r.smoothing) << '\n';
    close_csv(out, path);
    written.push_back(path);
    return written;
}

std::vector<fs::path> cmd_qcirc(const RunContext& ctx, std::ostream&) {
    const auto& cfg = ctx.cfg;
    require_rotation(cfg, "qcirc");
    const auto& qc = cfg.qcirc;
    const std::size_t d = cfg.dim();
    const RotationSystem sys(cfg.system.alpha);
    const rkha::SubexpWeight w(cfg.kernel.tau, cfg.kernel.p, d);
    const auto f = named_observable(qc.observable, d);
    const TorusPoint x(qc.x);

    struct Row {
        int q;
        double t, value, exact, sampled;
    };
    std::vector<std::vector<Row>> rows(qc.q.size());
    parallel_for(qc.q.size(), ctx.threads, [&](std::size_t k) {
        const qcirc::QubitEncoding enc(d, qc.q[k]);
        const auto c = qcirc::walsh_coefficients(qcirc::frequency_vector(enc, sys));
        const auto obs = qcirc::projected_observable(enc, w, f);
        const auto psi0 = qcirc::feature_state(enc, w, x);
        for (std::size_t i = 0; i < qc.t.size(); ++i) {
            const double t = qc.t[i];
            const auto psi = qcirc::evolve_statevector(c, psi0, -t);
            const double value = (psi.adjoint() * obs * psi)(0, 0).real();
            double sampled = 0.0;
            if (qc.shots > 0) {
                const std::uint64_t seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (k * qc.t.size() + i + 1));
                sampled = qcirc::sampled_expectation(obs, psi, qc.shots, seed);
            }
            rows[k].push_back({qc.q[k], t, value, exact_value(f, sys, x, t), sampled});
        }
    });

    std::vector<fs::path> written;
    {
        const fs::path path = ctx.out / "expectation.csv";
        auto out = open_csv(path, "qcirc", cfg);
        qcirc::write_expectation_csv_header(out);
        for (const auto& task : rows)
            for (const auto& r : task)
                out << r.q << ',' << csv::fmt(r.t) << ',' << csv::fmt(r.value) << ',' << csv::fmt(r.exact)
                    << ',' << csv::fmt(std::abs(r.value - r.exact)) << '\n';
        close_csv(out, path);
        written.push_back(path);
    }
    if (qc.shots > 0) {
        const fs::path path = ctx.out / "shots.csv";
        auto out = open_csv(path, "qcirc", cfg);
        out << "q,t,shots,sampled,value,abs_error\n";
        for (const auto& task : rows)
            for (const auto& r : task)
                out << r.q << ',' << csv::fmt(r.t) << ',' << qc.shots << ',' << csv::fmt(r.sampled) << ','
                    << csv::fmt(r.value) << ',' << csv::fmt(std::abs(r.sampled - r.value)) << '\n';
        close_csv(out, path);
        written.push_back(path);
    }
    {
        int q = qc.export_q;
        if (q < 0) q = *std::max_element(qc.q.begin(), qc.q.end());
        const qcirc::QubitEncoding enc(d, q);
        const auto c = qcirc::walsh_coefficients(qcirc::frequency_vector(enc, sys));
        const auto prep = qcirc::feature_state(enc, w, x);
        const fs::path path = ctx.out / "circuit.txt";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << header_line("qcirc", cfg) << '\n';
        out << qcirc::export_circuit(c, enc, -qc.t.back(), &prep);
        close_csv(out, path);
        written.push_back(path);
    }
    return written;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"koopq: Koopman, quantum data assimilation and circuit experiments"};
    app.set_version_flag("--version", std::string(KOOPQ_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    struct Command {
        const char* name;
        const char* help;
        std::vector<fs::path> (*fn)(const RunContext&, std::ostream&);
    };
    const Command commands[] = {
        {"rotate", "sample a trajectory of the configured system", cmd_rotate},
        {"filter", "classical, quantum and projected filters side by side", cmd_filter},
        {"koopman", "generator spectra and forecasts against the exact Koopman evolution", cmd_koopman},
        {"qcirc", "simulated circuit expectations and circuit export", cmd_qcirc},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "64-bit seed (overrides seed)");
        sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
        subs.push_back(sub);
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_validation;
    }

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Command& cmd = commands[which];

    try {
        RunContext ctx;
        if (!config_path.empty()) ctx.cfg = load_config(config_path);
        if (seed) ctx.cfg.seed = *seed;
        if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
        ctx.out = ctx.cfg.output_dir;
        ctx.threads = threads;
        fs::create_directories(ctx.out);
        for (const auto& p : cmd.fn(ctx, err)) out << p.string() << '\n';
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_validation;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_validation;
    } catch (const ZeroEvidenceError& e) {
        err << "degenerate: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const DegeneracyError& e) {
        err << "degenerate: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_internal;
    }
}

}  // namespace koopq::cli
