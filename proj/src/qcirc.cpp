#include "koopq/qcirc.hpp"

#include "koopq/csv.hpp"
#include "koopq/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

namespace koopq::qcirc {

namespace {

std::size_t qubit_count(std::uint64_t size) {
    if (size == 0 || !std::has_single_bit(size))
        throw DomainError("length must be a power of two");
    return static_cast<std::size_t>(std::countr_zero(size));
}

void phase_block(const Eigen::VectorXcd& v, std::size_t n, double t, Statevector& psi,
                 std::uint64_t lo, std::uint64_t hi) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t mask = std::uint64_t{1} << (n - 1 - i);
        const cplx up = std::exp(t * v(static_cast<Eigen::Index>(i)));
        const cplx down = std::exp(-t * v(static_cast<Eigen::Index>(i)));
        for (std::uint64_t b = lo; b < hi; ++b) psi(static_cast<Eigen::Index>(b)) *= (b & mask) ? down : up;
    }
}

}  // namespace

QubitEncoding::QubitEncoding(std::size_t dim, int resolution) : d_(dim), q_(resolution) {
    if (dim < 1) throw DomainError("QubitEncoding: dimension must be >= 1");
    if (resolution < 0) throw DomainError("QubitEncoding: resolution must be >= 0");
    if (qubits() > 24) throw DomainError("QubitEncoding: more than 24 qubits requested");
}

std::uint64_t QubitEncoding::encode(const MultiIndex& j) const {
    if (j.size() != d_) throw DomainError("encode: dimension mismatch");
    const int top = 1 << q_;
    std::uint64_t b = 0;
    for (int ji : j) {
        if (ji == 0 || std::abs(ji) > top) throw DomainError("encode: index outside J_q");
        const int hat = ji < 0 ? ji + top : ji + top - 1;
        b = (b << (q_ + 1)) | static_cast<std::uint64_t>(hat);
    }
    return b;
}

MultiIndex QubitEncoding::decode(std::uint64_t b) const {
    if (b >= size()) throw DomainError("decode: basis index out of range");
    const int top = 1 << q_;
    const std::uint64_t digit = (std::uint64_t{1} << (q_ + 1)) - 1;
    MultiIndex j(d_);
    for (std::size_t i = d_; i-- > 0;) {
        const int hat = static_cast<int>(b & digit);
        j[i] = hat < top ? hat - top : hat - top + 1;
        b >>= (q_ + 1);
    }
    return j;
}

std::string QubitEncoding::bits(std::uint64_t b) const {
    const std::size_t n = qubits();
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
        if (b & (std::uint64_t{1} << (n - 1 - i))) s[i] = '1';
    return s;
}

Eigen::VectorXd frequency_vector(const QubitEncoding& enc, const dynamics::RotationSystem& sys) {
    if (sys.dim() != enc.dim()) throw DomainError("frequency_vector: dimension mismatch");
    const auto& alpha = sys.frequencies();
    Eigen::VectorXd out(static_cast<Eigen::Index>(enc.size()));
    for (std::uint64_t b = 0; b < enc.size(); ++b) {
        const MultiIndex j = enc.decode(b);
        double w = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) w += j[i] * alpha[i];
        out(static_cast<Eigen::Index>(b)) = w;
    }
    return out;
}

WalshSpectrum walsh_spectrum(const Eigen::VectorXd& freqs) {
    const auto size = static_cast<std::uint64_t>(freqs.size());
    qubit_count(size);
    Eigen::VectorXd a = freqs;
    for (std::uint64_t h = 1; h < size; h <<= 1)
        for (std::uint64_t i = 0; i < size; i += 2 * h)
            for (std::uint64_t k = i; k < i + h; ++k) {
                const double x = a(static_cast<Eigen::Index>(k));
                const double y = a(static_cast<Eigen::Index>(k + h));
                a(static_cast<Eigen::Index>(k)) = x + y;
                a(static_cast<Eigen::Index>(k + h)) = x - y;
            }
    a /= static_cast<double>(size);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < size; ++s)
        if (std::popcount(s) != 1) worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(s))));
    return {std::move(a), worst};
}

WalshCoefficients walsh_coefficients(const Eigen::VectorXd& freqs) {
    const std::size_t n = qubit_count(static_cast<std::uint64_t>(freqs.size()));
    const WalshSpectrum spec = walsh_spectrum(freqs);
    const double scale = freqs.size() ? freqs.cwiseAbs().maxCoeff() : 0.0;
    if (spec.max_nonaffine > 1e-10 * scale) {
        std::ostringstream msg;
        msg << "walsh_coefficients: frequencies are not affine in the bits (residual "
            << spec.max_nonaffine << ")";
        throw NotAffineError(msg.str());
    }
    WalshCoefficients c{Eigen::VectorXcd(static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i)
        c.v(static_cast<Eigen::Index>(i)) =
            cplx(0.0, spec.coeffs(static_cast<Eigen::Index>(std::uint64_t{1} << (n - 1 - i))));
    return c;
}

Eigen::VectorXcd reconstruct_diagonal(const WalshCoefficients& c) {
    const auto n = static_cast<std::size_t>(c.v.size());
    const std::uint64_t size = std::uint64_t{1} << n;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(size));
    for (std::uint64_t b = 0; b < size; ++b)
        for (std::size_t i = 0; i < n; ++i) {
            const bool one = b & (std::uint64_t{1} << (n - 1 - i));
            out(static_cast<Eigen::Index>(b)) += one ? -c.v(static_cast<Eigen::Index>(i))
                                                     : c.v(static_cast<Eigen::Index>(i));
        }
    return out;
}

Statevector evolve_statevector(const WalshCoefficients& c, const Statevector& psi, double t,
                               unsigned threads) {
    const auto n = static_cast<std::size_t>(c.v.size());
    if (static_cast<std::uint64_t>(psi.size()) != (std::uint64_t{1} << n))
        throw DomainError("evolve_statevector: state length does not match the qubit count");
    Statevector out = psi;
    const auto size = static_cast<std::uint64_t>(psi.size());
    threads = std::max(1u, threads);
    if (threads == 1 || size < 4096) {
        phase_block(c.v, n, t, out, 0, size);
        return out;
    }
    std::vector<std::thread> pool;
    const std::uint64_t block = (size + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
        const std::uint64_t lo = k * block;
        const std::uint64_t hi = std::min(size, lo + block);
        if (lo >= hi) break;
        pool.emplace_back(phase_block, std::cref(c.v), n, t, std::ref(out), lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

Statevector feature_amplitudes(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                               const dynamics::TorusPoint& x) {
    if (x.dim() != enc.dim() || w.dim() != enc.dim())
        throw DomainError("feature_state: dimension mismatch");
    Statevector out(static_cast<Eigen::Index>(enc.size()));
    for (std::uint64_t b = 0; b < enc.size(); ++b) {
        const MultiIndex j = enc.decode(b);
        double phase = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) phase += j[i] * x[i];
        out(static_cast<Eigen::Index>(b)) = std::sqrt(w(j)) * std::polar(1.0, -phase);
    }
    return out;
}

Statevector feature_state(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                          const dynamics::TorusPoint& x) {
    Statevector v = feature_amplitudes(enc, w, x);
    return v / v.norm();
}

Eigen::MatrixXcd projected_observable(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                                      const dynamics::FourierObservable& f) {
    if (f.dim() != enc.dim() || w.dim() != enc.dim())
        throw DomainError("projected_observable: dimension mismatch");
    if (!f.is_real()) throw DomainError("projected_observable: f must be real-valued");
    const auto size = static_cast<Eigen::Index>(enc.size());
    std::vector<MultiIndex> idx;
    std::vector<double> nl;
    for (std::uint64_t b = 0; b < enc.size(); ++b) {
        idx.push_back(enc.decode(b));
        nl.push_back(w.neg_log(idx.back()));
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(size, size);
    MultiIndex diff(enc.dim());
    for (Eigen::Index r = 0; r < size; ++r)
        for (Eigen::Index s = 0; s < size; ++s) {
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = idx[r][i] - idx[s][i];
            const cplx fc = f.coefficient(diff);
            if (fc == cplx{}) continue;
            a(r, s) = r == s ? fc : fc * std::exp(0.5 * (nl[r] - nl[s]));
        }
    Eigen::MatrixXcd sym(size, size);
    for (Eigen::Index r = 0; r < size; ++r)
        for (Eigen::Index s = 0; s < size; ++s) sym(r, s) = 0.5 * (a(r, s) + std::conj(a(s, r)));
    return sym;
}

double circuit_expectation(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                           const dynamics::RotationSystem& sys,
                           const dynamics::FourierObservable& f, const dynamics::TorusPoint& x,
                           double t) {
    const WalshCoefficients c = walsh_coefficients(frequency_vector(enc, sys));
    const Statevector psi = evolve_statevector(c, feature_state(enc, w, x), -t);
    const Eigen::MatrixXcd s = projected_observable(enc, w, f);
    return psi.dot(s * psi).real();
}

double sampled_expectation(const Eigen::MatrixXcd& obs, const Statevector& psi, std::size_t shots,
                           std::uint64_t seed) {
    if (obs.rows() != psi.size() || obs.cols() != psi.size())
        throw DomainError("sampled_expectation: size mismatch");
    if (shots < 1) throw DomainError("sampled_expectation: shots must be >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(obs));
    const Eigen::VectorXcd amp = es.eigenvectors().adjoint() * psi;
    std::vector<double> prob(static_cast<std::size_t>(amp.size()));
    for (Eigen::Index k = 0; k < amp.size(); ++k) prob[static_cast<std::size_t>(k)] = std::norm(amp(k));
    std::discrete_distribution<std::size_t> pick(prob.begin(), prob.end());
    std::mt19937_64 rng(seed);
    CompensatedSum s;
    for (std::size_t k = 0; k < shots; ++k) s += es.eigenvalues()(static_cast<Eigen::Index>(pick(rng)));
    return s.value() / static_cast<double>(shots);
}

std::string export_circuit(const WalshCoefficients& c, const QubitEncoding& enc, double t,
                           const Statevector* prep) {
    const auto n = static_cast<std::size_t>(c.v.size());
    if (n != enc.qubits()) throw DomainError("export_circuit: qubit count mismatch");
    std::ostringstream out;
    out << "// koopq circuit\n";
    out << "qubits " << n << "\n";
    out << "dims " << enc.dim() << "\n";
    out << "resolution " << enc.resolution() << "\n";
    out << "time " << csv::fmt(t) << "\n";
    if (prep) {
        if (static_cast<std::uint64_t>(prep->size()) != enc.size())
            throw DomainError("export_circuit: preparation state has the wrong length");
        out << "prep " << prep->size() << "\n";
        for (Eigen::Index b = 0; b < prep->size(); ++b)
            out << "amp " << enc.bits(static_cast<std::uint64_t>(b)) << ' '
                << csv::fmt((*prep)(b).real()) << ' ' << csv::fmt((*prep)(b).imag()) << "\n";
    }
    for (std::size_t i = 0; i < n; ++i)
        out << "rz(" << csv::fmt(-2.0 * t * c.v(static_cast<Eigen::Index>(i)).imag()) << ") q[" << i
            << "];\n";
    out << "measure expectation\n";
    return out.str();
}

std::vector<double> parse_rotation_angles(const std::string& text) {
    static const std::regex line(R"(^rz\(([^)]*)\) q\[(\d+)\];$)");
    std::vector<std::pair<std::size_t, double>> found;
    std::istringstream in(text);
    std::string s;
    while (std::getline(in, s)) {
        std::smatch m;
        if (std::regex_match(s, m, line)) found.emplace_back(std::stoul(m[2]), std::stod(m[1]));
    }
    std::vector<double> out(found.size());
    std::vector<bool> seen(found.size(), false);
    for (const auto& [q, theta] : found) {
        if (q >= out.size() || seen[q]) throw DomainError("parse_rotation_angles: bad qubit index");
        out[q] = theta;
        seen[q] = true;
    }
    return out;
}

Statevector apply_rotations(const std::vector<double>& angles, const Statevector& psi) {
    WalshCoefficients c{Eigen::VectorXcd(static_cast<Eigen::Index>(angles.size()))};
    for (std::size_t i = 0; i < angles.size(); ++i)
        c.v(static_cast<Eigen::Index>(i)) = cplx(0.0, -0.5 * angles[i]);
    return evolve_statevector(c, psi, 1.0);
}

void write_expectation_csv_header(std::ostream& out) { out << "q,t,value,exact,abs_error\n"; }

}  // namespace koopq::qcirc
