#include "koopq/qmda.hpp"

#include "koopq/csv.hpp"
#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace koopq::qmda {

namespace {

constexpr double evidence_floor = 1e-14;

double angular_distance(double a, double b) {
    const double d = wrap_angle(a - b);
    return std::min(d, two_pi - d);
}

Eigen::VectorXcd sqrt_vector(const ClassicalDensity& sigma) {
    const auto n = static_cast<double>(sigma.size());
    Eigen::VectorXcd v(sigma.values.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::sqrt(sigma.values(i) / n);
    return v;
}

Eigen::MatrixXcd embed(const Eigen::MatrixXcd& a, Eigen::Index n) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    out.topLeftCorner(a.rows(), a.cols()) = a;
    return out;
}

std::size_t argmax(const Eigen::VectorXd& v) {
    Eigen::Index k = 0;
    v.maxCoeff(&k);
    return static_cast<std::size_t>(k);
}

cplx expectation_complex(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& a) {
    return (rho * a).trace();
}

double circular_mean(const ClassicalDensity& sigma) {
    CompensatedSumC acc;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        acc += sigma.values(static_cast<Eigen::Index>(i)) * std::polar(1.0, sigma.node(i));
    return wrap_angle(std::arg(acc.value()));
}

Eigen::MatrixXcd diagonal_phases(const std::vector<int>& freqs, double shift) {
    const auto n = static_cast<Eigen::Index>(freqs.size());
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) p(k, k) = std::polar(1.0, -freqs[k] * shift);
    return p;
}

std::vector<std::vector<double>> observations_for(const ObservationModel& model,
                                                  const std::vector<TorusPoint>& truth,
                                                  const FilterOptions& opt) {
    if (!opt.observations.empty()) {
        if (opt.observations.size() < static_cast<std::size_t>(opt.steps))
            throw DomainError("run_filter: fewer observations than steps");
        return opt.observations;
    }
    return generate_observations(model, truth, opt.seed);
}

void check_options(const FilterOptions& opt, std::size_t dim) {
    if (opt.steps < 1) throw DomainError("run_filter: steps must be >= 1");
    if (opt.mode == FilterMode::QuantumProjected && (opt.rank < 1 || opt.rank > dim))
        throw DomainError("run_filter: projected rank L must lie in [1, dimension]");
}

}  // namespace

double ClassicalDensity::node(std::size_t i) const {
    return wrap_angle(two_pi * static_cast<double>(i) / static_cast<double>(size()) + offset);
}

ClassicalDensity ClassicalDensity::uniform(std::size_t n, double offset) {
    if (n < 1) throw DomainError("ClassicalDensity: empty grid");
    return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), wrap_angle(offset)};
}

ClassicalDensity ClassicalDensity::from_weights(Eigen::VectorXd w, double offset) {
    if (w.size() == 0) throw DomainError("ClassicalDensity: empty grid");
    if ((w.array() < 0.0).any() || !w.allFinite())
        throw DomainError("ClassicalDensity: weights must be finite and nonnegative");
    const double mean = w.mean();
    if (!(mean > 0.0)) throw DomainError("ClassicalDensity: zero density");
    return {w / mean, wrap_angle(offset)};
}

void validate(const ClassicalDensity& sigma, double tol) {
    if (sigma.values.size() == 0) throw DomainError("density: empty grid");
    if (!sigma.values.allFinite() || (sigma.values.array() < 0.0).any())
        throw DomainError("density: values must be finite and nonnegative");
    if (std::abs(sigma.values.mean() - 1.0) > tol)
        throw DomainError("density: does not integrate to 1");
}

bool is_density_operator(const Eigen::MatrixXcd& rho) {
    if (rho.rows() == 0 || rho.rows() != rho.cols()) return false;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return false;
    if (std::abs(rho.trace() - 1.0) > 1e-12) return false;
    return min_hermitian_eigenvalue(rho) >= -1e-10;
}

bool is_effect(const Eigen::MatrixXcd& e) {
    if (e.rows() == 0 || e.rows() != e.cols()) return false;
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(e), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-10 && es.eigenvalues().maxCoeff() <= 1.0 + 1e-10;
}

DensityOperator gamma_embed(const ClassicalDensity& sigma) {
    validate(sigma);
    Eigen::VectorXcd v = sqrt_vector(sigma);
    v /= v.norm();
    return v * v.adjoint();
}

ClassicalDensity classical_forecast(const PeriodicOrbitSystem& sys,
                                    const ClassicalDensity& sigma) {
    const auto m = static_cast<Eigen::Index>(sys.size());
    if (sigma.values.size() != m) throw DomainError("classical_forecast: size mismatch");
    ClassicalDensity out{Eigen::VectorXd(m), sigma.offset};
    for (Eigen::Index i = 0; i < m; ++i) out.values((i + 1) % m) = sigma.values(i);
    return out;
}

ClassicalDensity classical_forecast(const RotationSystem& sys, const ClassicalDensity& sigma,
                                    double dt) {
    if (sys.dim() != 1) throw DomainError("classical_forecast: circle rotations only");
    return {sigma.values, wrap_angle(sigma.offset + sys.frequencies()[0] * dt)};
}

Posterior classical_analysis(const ClassicalDensity& sigma, const Eigen::VectorXd& likelihood) {
    if (likelihood.size() != sigma.values.size())
        throw DomainError("classical_analysis: likelihood size mismatch");
    if ((likelihood.array() < 0.0).any()) throw DomainError("classical_analysis: negative likelihood");
    const Eigen::VectorXd prod = sigma.values.cwiseProduct(likelihood);
    CompensatedSum s;
    for (Eigen::Index i = 0; i < prod.size(); ++i) s += prod(i);
    const double evidence = s.value() / static_cast<double>(prod.size());
    if (!(evidence > evidence_floor))
        throw ZeroEvidenceError("classical_analysis: zero evidence");
    return {{prod / evidence, sigma.offset}, evidence};
}

Eigen::MatrixXcd transfer_matrix(const PeriodicOrbitSystem& sys) {
    return sys.koopman_matrix().adjoint();
}

DensityOperator quantum_forecast(const Eigen::MatrixXcd& u, const DensityOperator& rho) {
    if (u.rows() != rho.rows() || u.cols() != rho.cols())
        throw DomainError("quantum_forecast: size mismatch");
    if (unitarity_defect(u) > 1e-10) throw DomainError("quantum_forecast: U is not unitary");
    return hermitian_part(u * rho * u.adjoint());
}

QuantumPosterior quantum_analysis(const DensityOperator& rho, const Effect& e) {
    if (e.rows() != rho.rows() || e.cols() != rho.cols())
        throw DomainError("quantum_analysis: size mismatch");
    const Eigen::MatrixXcd s = psd_sqrt(e, 0.0, 1.0);
    const Eigen::MatrixXcd post = s * rho * s;
    const double evidence = post.trace().real();
    if (!(evidence > evidence_floor)) throw ZeroEvidenceError("quantum_analysis: zero evidence");
    return {hermitian_part(post / evidence), evidence};
}

double expectation(const DensityOperator& rho, const Eigen::MatrixXcd& a) {
    return (rho * a).trace().real();
}

Eigen::MatrixXcd multiplication_operator(const Eigen::VectorXd& f) {
    return f.cast<cplx>().asDiagonal();
}

std::vector<int> fourier_order(std::size_t n) {
    std::vector<int> out;
    out.reserve(n);
    for (int k = 0; out.size() < n; ++k) {
        if (k == 0) {
            out.push_back(0);
            continue;
        }
        out.push_back(-k);
        if (out.size() < n) out.push_back(k);
    }
    return out;
}

Eigen::MatrixXcd fourier_change_of_basis(std::size_t n, double offset,
                                         const std::vector<int>& freqs) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXcd f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(freqs.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = two_pi * static_cast<double>(i) / static_cast<double>(n) + offset;
        for (std::size_t k = 0; k < freqs.size(); ++k)
            f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                scale * std::polar(1.0, freqs[k] * x);
    }
    return f;
}

Eigen::MatrixXcd toeplitz_multiplication(const dynamics::FourierObservable& f,
                                         const std::vector<int>& freqs) {
    if (f.dim() != 1) throw DomainError("toeplitz_multiplication: circle observables only");
    const auto n = static_cast<Eigen::Index>(freqs.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) m(a, b) = f.coefficient({freqs[a] - freqs[b]});
    return m;
}

Eigen::MatrixXcd compress(const Eigen::MatrixXcd& a, std::size_t l) {
    if (a.rows() != a.cols()) throw DomainError("compress: matrix must be square");
    if (l < 1 || l > static_cast<std::size_t>(a.rows()))
        throw DomainError("compress: rank must lie in [1, dimension]");
    const auto k = static_cast<Eigen::Index>(l);
    return a.topLeftCorner(k, k);
}

DensityOperator compress_state(const DensityOperator& rho, std::size_t l) {
    Eigen::MatrixXcd c = compress(rho, l);
    const double tr = c.trace().real();
    if (!(tr > evidence_floor)) throw DegeneracyError("compress: compressed state has zero trace");
    return hermitian_part(c / tr);
}

std::vector<double> ObservationModel::observe(const TorusPoint& x) const {
    if (h) return h(x);
    std::vector<double> y;
    y.reserve(2 * x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
        y.push_back(std::cos(x[i]));
        y.push_back(std::sin(x[i]));
    }
    return y;
}

double ObservationModel::kappa(const std::vector<double>& y, const std::vector<double>& yp) const {
    if (y.size() != yp.size()) throw DomainError("observation: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) d2 += (y[i] - yp[i]) * (y[i] - yp[i]);
    switch (kernel) {
        case Kernel::Gaussian:
            if (!(epsilon > 0.0)) throw DomainError("observation: epsilon must be > 0");
            return std::exp(-d2 / (epsilon * epsilon));
        case Kernel::Event:
            if (!(delta > 0.0)) throw DomainError("observation: delta must be > 0");
            return std::sqrt(d2) <= 0.5 * delta ? 1.0 : 0.0;
        case Kernel::Uninformative:
            return 1.0;
    }
    return 1.0;
}

Eigen::VectorXd likelihood(const ObservationModel& model, const std::vector<double>& y,
                           const ClassicalDensity& grid) {
    Eigen::VectorXd out(grid.values.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = model.kappa(y, model.observe(TorusPoint({grid.node(i)})));
    return out;
}

Effect effect_from_observation(const ObservationModel& model, const std::vector<double>& y,
                               const ClassicalDensity& grid, EffectBasis basis,
                               const std::vector<int>& freqs) {
    const Eigen::VectorXd l = likelihood(model, y, grid);
    if (basis == EffectBasis::Point) return multiplication_operator(l);
    if (freqs.empty()) throw DomainError("effect_from_observation: empty Fourier basis");
    const Eigen::MatrixXcd f = fourier_change_of_basis(grid.size(), grid.offset, freqs);
    return hermitian_part(f.adjoint() * l.cast<cplx>().asDiagonal() * f);
}

std::string to_string(FilterMode m) {
    switch (m) {
        case FilterMode::Classical:
            return "classical";
        case FilterMode::Quantum:
            return "quantum";
        case FilterMode::QuantumProjected:
            return "quantum-projected";
    }
    return "unknown";
}

std::vector<std::vector<double>> generate_observations(const ObservationModel& model,
                                                       const std::vector<TorusPoint>& truth,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> out;
    out.reserve(truth.size());
    for (const auto& x : truth) {
        auto y = model.observe(x);
        if (model.noise_sd > 0.0)
            for (double& v : y) v += model.noise_sd * noise(rng);
        out.push_back(std::move(y));
    }
    return out;
}

FilterTrace run_filter(const PeriodicOrbitSystem& sys, const ObservationModel& model, int x0,
                       const FilterOptions& opt) {
    const int m = sys.size();
    check_options(opt, static_cast<std::size_t>(m));
    if (x0 < 0 || x0 >= m) throw DomainError("run_filter: initial state out of range");

    std::vector<TorusPoint> truth;
    std::vector<int> truth_index;
    for (int n = 1; n <= opt.steps; ++n) {
        truth_index.push_back((x0 + n) % m);
        truth.push_back(sys.point(truth_index.back()));
    }
    const auto obs = observations_for(model, truth, opt);

    ClassicalDensity sigma = opt.prior ? *opt.prior : ClassicalDensity::uniform(m);
    if (sigma.size() != static_cast<std::size_t>(m)) throw DomainError("run_filter: prior size");
    validate(sigma);

    const Eigen::MatrixXcd p = transfer_matrix(sys);
    const std::vector<int> freqs = fourier_order(static_cast<std::size_t>(m));
    const Eigen::MatrixXcd f = fourier_change_of_basis(static_cast<std::size_t>(m), 0.0, freqs);
    const Eigen::MatrixXcd p_l =
        opt.mode == FilterMode::QuantumProjected
            ? diagonal_phases({freqs.begin(), freqs.begin() + static_cast<long>(opt.rank)},
                              two_pi / m)
            : Eigen::MatrixXcd();

    DensityOperator rho;
    if (opt.mode == FilterMode::Quantum) rho = gamma_embed(sigma);
    if (opt.mode == FilterMode::QuantumProjected)
        rho = compress_state(f.adjoint() * gamma_embed(sigma) * f, opt.rank);

    FilterTrace trace{opt.mode, {}};
    for (int n = 1; n <= opt.steps; ++n) {
        FilterStep st{};
        st.step = n;
        const auto& y = obs[static_cast<std::size_t>(n - 1)];
        try {
            st.classical_prior = classical_forecast(sys, sigma);
            const Eigen::VectorXd l = likelihood(model, y, st.classical_prior);
            auto post = classical_analysis(st.classical_prior, l);
            st.classical_posterior = post.density;
            st.evidence = post.evidence;
            sigma = post.density;

            if (opt.mode == FilterMode::Quantum) {
                st.quantum_prior = quantum_forecast(p, rho);
                auto qp = quantum_analysis(st.quantum_prior, multiplication_operator(l));
                rho = qp.state;
                st.quantum_posterior = rho;
                st.evidence = qp.evidence;
            } else if (opt.mode == FilterMode::QuantumProjected) {
                st.quantum_prior = quantum_forecast(p_l, rho);
                const Eigen::MatrixXcd e =
                    compress(f.adjoint() * multiplication_operator(l) * f, opt.rank);
                auto qp = quantum_analysis(st.quantum_prior, hermitian_part(e));
                rho = qp.state;
                st.quantum_posterior = rho;
                st.evidence = qp.evidence;
            }
        } catch (const ZeroEvidenceError& e) {
            std::ostringstream msg;
            msg << "zero evidence at step " << n << ": " << e.what();
            throw ZeroEvidenceError(msg.str(), n);
        }

        st.classical_estimate = sys.point(static_cast<int>(argmax(sigma.values)))[0];
        st.estimate = st.classical_estimate;
        st.consistency = 0.0;
        if (opt.mode != FilterMode::Classical) {
            const Eigen::MatrixXcd point =
                opt.mode == FilterMode::Quantum ? rho : Eigen::MatrixXcd(f * embed(rho, m) * f.adjoint());
            st.consistency = trace_norm(hermitian_part(gamma_embed(sigma) - point));
            st.estimate = sys.point(static_cast<int>(argmax(point.diagonal().real())))[0];
        }
        st.estimate_error = angular_distance(st.estimate, truth[static_cast<std::size_t>(n - 1)][0]);
        trace.steps.push_back(std::move(st));
    }
    return trace;
}

FilterTrace run_filter(const RotationSystem& sys, double dt, const ObservationModel& model,
                       const TorusPoint& x0, const FilterOptions& opt) {
    if (sys.dim() != 1 || x0.dim() != 1)
        throw DomainError("run_filter: torus filtering is implemented for the circle only");
    if (!(dt > 0.0)) throw DomainError("run_filter: dt must be > 0");
    if (opt.mode == FilterMode::Quantum)
        throw DomainError("run_filter: exact quantum mode needs a finite system; use quantum-projected");
    const std::size_t n_grid = opt.grid;
    if (n_grid < 8) throw DomainError("run_filter: grid must have at least 8 nodes");
    check_options(opt, n_grid);

    std::vector<TorusPoint> truth;
    for (int n = 1; n <= opt.steps; ++n) truth.push_back(sys.flow(x0, n * dt));
    const auto obs = observations_for(model, truth, opt);

    ClassicalDensity sigma = opt.prior ? *opt.prior : ClassicalDensity::uniform(n_grid);
    if (sigma.size() != n_grid) throw DomainError("run_filter: prior size");
    validate(sigma);

    const double shift = sys.frequencies()[0] * dt;
    const std::vector<int> all = fourier_order(n_grid);
    const std::vector<int> freqs(all.begin(), all.begin() + static_cast<long>(opt.rank));
    const Eigen::MatrixXcd p_l =
        opt.mode == FilterMode::QuantumProjected ? diagonal_phases(freqs, shift) : Eigen::MatrixXcd();
    const Eigen::MatrixXcd first_moment =
        opt.mode == FilterMode::QuantumProjected
            ? toeplitz_multiplication(dynamics::FourierObservable::character({1}), freqs)
            : Eigen::MatrixXcd();

    DensityOperator rho;
    if (opt.mode == FilterMode::QuantumProjected) {
        const Eigen::MatrixXcd f_l = fourier_change_of_basis(n_grid, sigma.offset, freqs);
        const Eigen::VectorXcd c = f_l.adjoint() * sqrt_vector(sigma);
        if (!(c.squaredNorm() > evidence_floor))
            throw DegeneracyError("compress: compressed state has zero trace");
        rho = c * c.adjoint() / c.squaredNorm();
    }

    FilterTrace trace{opt.mode, {}};
    for (int n = 1; n <= opt.steps; ++n) {
        FilterStep st{};
        st.step = n;
        const auto& y = obs[static_cast<std::size_t>(n - 1)];
        try {
            st.classical_prior = classical_forecast(sys, sigma, dt);
            const Eigen::VectorXd l = likelihood(model, y, st.classical_prior);
            auto post = classical_analysis(st.classical_prior, l);
            st.classical_posterior = post.density;
            st.evidence = post.evidence;
            sigma = post.density;

            if (opt.mode == FilterMode::QuantumProjected) {
                st.quantum_prior = quantum_forecast(p_l, rho);
                const Eigen::MatrixXcd f_l = fourier_change_of_basis(n_grid, sigma.offset, freqs);
                const Effect e = hermitian_part(f_l.adjoint() * l.cast<cplx>().asDiagonal() * f_l);
                auto qp = quantum_analysis(st.quantum_prior, e);
                rho = qp.state;
                st.quantum_posterior = rho;
                st.evidence = qp.evidence;
            }
        } catch (const ZeroEvidenceError& e) {
            std::ostringstream msg;
            msg << "zero evidence at step " << n << ": " << e.what();
            throw ZeroEvidenceError(msg.str(), n);
        }

        st.classical_estimate = circular_mean(sigma);
        st.estimate = st.classical_estimate;
        st.consistency = 0.0;
        if (opt.mode == FilterMode::QuantumProjected) {
            const Eigen::MatrixXcd f_all = fourier_change_of_basis(n_grid, sigma.offset, all);
            const Eigen::VectorXcd c = f_all.adjoint() * sqrt_vector(sigma);
            const Eigen::MatrixXcd gamma = c * c.adjoint();
            st.consistency =
                trace_norm(hermitian_part(gamma - embed(rho, static_cast<Eigen::Index>(n_grid))));
            st.estimate = wrap_angle(std::arg(expectation_complex(rho, first_moment)));
        }
        st.estimate_error = angular_distance(st.estimate, truth[static_cast<std::size_t>(n - 1)][0]);
        trace.steps.push_back(std::move(st));
    }
    return trace;
}

void write_filter_csv_header(std::ostream& out) {
    out << "step,mode,evidence,consistency_trace_norm,estimate_error\n";
}

void write_filter_csv_rows(std::ostream& out, const FilterTrace& trace) {
    const std::string mode = to_string(trace.mode);
    for (const auto& st : trace.steps)
        out << st.step << ',' << mode << ',' << csv::fmt(st.evidence) << ','
            << csv::fmt(st.consistency) << ',' << csv::fmt(st.estimate_error) << '\n';
}

std::vector<std::vector<double>> read_observations_csv(std::istream& in) {
    std::vector<std::vector<double>> out;
    std::string line;
    bool header = false;
    std::size_t width = 0;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header) {
            if (cells.size() < 2 || cells[0] != "t")
                throw DomainError("observations csv: expected header t,y_0,...");
            width = cells.size();
            header = true;
            continue;
        }
        if (cells.size() != width) {
            std::ostringstream msg;
            msg << "observations csv: line " << lineno << " has " << cells.size() << " fields";
            throw DomainError(msg.str());
        }
        std::vector<double> y;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            try {
                y.push_back(std::stod(cells[k]));
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << "observations csv: bad number on line " << lineno;
                throw DomainError(msg.str());
            }
        }
        out.push_back(std::move(y));
    }
    if (!header) throw DomainError("observations csv: missing header");
    return out;
}

}  // namespace koopq::qmda
