#include "qtasep/fredholm.hpp"

#include "qtasep/evolution.hpp"
#include "qtasep/moments.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qtasep {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);
constexpr int kMaxGrid = 1024;

}  // namespace

KernelGrid circle_grid(Complex center, double radius, int M) {
    if (M < 2 || M % 2) throw ParameterError("circle_grid: node count must be even and >= 2");
    if (!(radius > 0.0)) throw ParameterError("circle_grid: radius must be positive");
    KernelGrid g;
    g.center = center;
    g.radius = radius;
    g.nodes.resize(M);
    g.weights.resize(M);
    for (int j = 0; j < M; ++j) {
        const Complex e = std::polar(1.0, 2.0 * kPi * (j + 0.5) / M);
        g.nodes[j] = center + radius * e;
        g.weights[j] = kI * radius * e * (2.0 * kPi / M);
    }
    return g;
}

Eigen::MatrixXcd nystrom_matrix(const Kernel& K, const KernelGrid& grid) {
    const int M = grid.size();
    Eigen::MatrixXcd D(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) D(i, j) = K(grid.nodes[i], grid.nodes[j]) * grid.weights[j] / (2.0 * kPi * kI);
    return D;
}

Complex fredholm_det(const Eigen::MatrixXcd& D) {
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(D.rows(), D.cols()) + D;
    return A.partialPivLu().determinant();
}

Complex fredholm_det(const Kernel& K, const KernelGrid& grid) { return fredholm_det(nystrom_matrix(K, grid)); }

double c1_radius(QParam q) {
    const double sq = std::sqrt(q.value());
    return 0.9 * (1.0 - sq) / (1.0 + sq);
}

KernelGrid c1_grid(QParam q, int M) { return circle_grid(1.0, c1_radius(q), M); }

KernelGrid c01_grid(int M) { return circle_grid(0.5, 0.75, M); }

double effective_s_max(Complex zeta, const SQuadrature& sq) {
    if (sq.s_max > 0.0) return sq.s_max;
    const double margin = kPi - std::abs(std::arg(-zeta));
    return std::max(12.0, std::ceil(35.0 / margin));
}

namespace {

void check_zeta(Complex zeta) {
    if (zeta.imag() == 0.0 && zeta.real() >= 0.0 && zeta.real() != 0.0)
        throw ParameterError("zeta must avoid the positive real axis");
}

void check_unit_rates_spec(const Protocol& spec, int n) {
    if (n < 0) throw ParameterError("particle index n must be nonnegative");
    for (double al : spec.alpha)
        if (!(al > 0.0 && al < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    for (double b : spec.beta) {
        if (!(b > 0.0)) throw ParameterError("beta must be positive");
        // C_{0,1} reaches down to -1/4
        if (!(1.0 / b > 0.25)) throw ParameterError("Bernoulli pole -1/beta lies inside C_{0,1} (beta >= 4)");
    }
}

// log cosh(x) without overflow
double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

struct SNodes {
    std::vector<double> y, w;
};

SNodes s_nodes(double s_max, double panel) {
    using GL = boost::math::quadrature::gauss<double, 24>;
    const auto& x = GL::abscissa();
    const auto& wt = GL::weights();
    const int panels = static_cast<int>(std::ceil(2.0 * s_max / panel));
    const double h = 2.0 * s_max / panels;
    SNodes out;
    for (int p = 0; p < panels; ++p) {
        const double mid = -s_max + (p + 0.5) * h;
        for (std::size_t j = 0; j < x.size(); ++j) {
            for (int sign : {-1, 1}) {
                if (x[j] == 0.0 && sign > 0) continue;
                out.y.push_back(mid + sign * 0.5 * h * x[j]);
                out.w.push_back(0.5 * h * wt[j]);
            }
        }
    }
    return out;
}

template <class Fn>
DetResult converge(Fn&& at_nodes, int M0, double tol) {
    DetResult r;
    int M = std::max(4, M0 + (M0 % 2));
    Complex prev = at_nodes(M);
    for (M *= 2; M <= kMaxGrid; M *= 2) {
        const Complex cur = at_nodes(M);
        const double change = std::abs(cur - prev) / std::max(1.0, std::abs(cur));
        if (change < tol) {
            r.value = cur;
            r.nodes = M;
            r.doubling_change = change;
            return r;
        }
        prev = cur;
    }
    throw ConvergenceError("Fredholm determinant did not converge under node doubling up to M=" +
                           std::to_string(kMaxGrid));
}

}  // namespace

Complex h_ratio(const Protocol& spec, int n, Complex w, Complex s, QParam q) {
    const Complex qs = std::exp(s * std::log(q.value()));
    const Complex u = qs * w;
    Complex v = std::exp(spec.gamma * (u - w));
    if (n > 0) v *= std::pow(q_pochhammer_inf(u, q) / q_pochhammer_inf(w, q), n);
    for (double al : spec.alpha) v *= q_pochhammer_inf(al * w, q) / q_pochhammer_inf(al * u, q);
    for (double b : spec.beta) v *= (1.0 + b * u) / (1.0 + b * w);
    return v;
}

Complex mb_kernel(Complex w, Complex wp, const TransformPoint& p, const SQuadrature& sq) {
    check_zeta(p.zeta);
    check_unit_rates_spec(p.spec, p.n);
    if (p.zeta == 0.0) return 0.0;
    const double S = effective_s_max(p.zeta, sq);
    const auto nodes = s_nodes(S, sq.panel);
    const Complex L = std::log(-p.zeta);
    const double lq = std::log(p.q.value());
    Complex acc = 0.0;
    for (std::size_t l = 0; l < nodes.y.size(); ++l) {
        const Complex s(0.5, nodes.y[l]);
        // pi / sin(-pi s) = -pi / cosh(pi y) on Re s = 1/2
        const Complex pre = -kPi * std::exp(s * L - log_cosh(kPi * nodes.y[l]));
        acc += nodes.w[l] * pre * h_ratio(p.spec, p.n, w, s, p.q) / (std::exp(s * lq) * w - wp);
    }
    return acc / (2.0 * kPi);
}

Complex cauchy_kernel(Complex w, Complex wp, const TransformPoint& p) {
    check_unit_rates_spec(p.spec, p.n);
    const Complex den = p.q.value() * wp - w;
    if (std::abs(den) < 1e-14) throw ParameterError("Cauchy kernel: q w' = w on the contour");
    return std::pow(1.0 / (1.0 - w), p.n) * f_ratio(p.spec, w, p.q) / den;
}

Eigen::MatrixXcd mb_matrix(const TransformPoint& p, const KernelGrid& grid, const SQuadrature& sq) {
    check_zeta(p.zeta);
    check_unit_rates_spec(p.spec, p.n);
    const double r = grid.radius, sqq = std::sqrt(p.q.value());
    if (!(sqq * (std::abs(grid.center) + r) < 1.0 - r))
        throw ParameterError("C_1 too large: q^{1/2}(1+rho) must be < 1-rho");
    const int M = grid.size();
    if (p.zeta == 0.0) return Eigen::MatrixXcd::Zero(M, M);
    const auto nodes = s_nodes(effective_s_max(p.zeta, sq), sq.panel);
    const int Ls = static_cast<int>(nodes.y.size());
    const Complex L = std::log(-p.zeta);
    const double lq = std::log(p.q.value());
    Eigen::MatrixXcd A(Ls, M), U(Ls, M);
    for (int l = 0; l < Ls; ++l) {
        const Complex s(0.5, nodes.y[l]);
        const Complex pre = -kPi * std::exp(s * L - log_cosh(kPi * nodes.y[l])) * nodes.w[l] / (2.0 * kPi);
        const Complex qs = std::exp(s * lq);
        for (int i = 0; i < M; ++i) {
            A(l, i) = pre * h_ratio(p.spec, p.n, grid.nodes[i], s, p.q);
            U(l, i) = qs * grid.nodes[i];
        }
    }
    Eigen::MatrixXcd D(M, M);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            Complex acc = 0.0;
            const Complex wj = grid.nodes[j];
            for (int l = 0; l < Ls; ++l) acc += A(l, i) / (U(l, i) - wj);
            D(i, j) = acc * grid.weights[j] / (2.0 * kPi * kI);
        }
    }
    return D;
}

Eigen::MatrixXcd cauchy_matrix(const Protocol& spec, int n, QParam q, const KernelGrid& grid) {
    const TransformPoint p{0.0, spec, n, q};
    return nystrom_matrix([&](Complex w, Complex wp) { return cauchy_kernel(w, wp, p); }, grid);
}

DetResult q_laplace_mb(const TransformPoint& p, const SQuadrature& sq, int M0) {
    check_zeta(p.zeta);
    DetResult r = converge([&](int M) { return fredholm_det(mb_matrix(p, c1_grid(p.q, M), sq)); }, M0, kDetTolerance);
    r.s_max = effective_s_max(p.zeta, sq);
    return r;
}

DetResult q_laplace_cauchy(const TransformPoint& p, int M0) {
    check_zeta(p.zeta);
    DetResult r = converge(
        [&](int M) {
            const Eigen::MatrixXcd D = cauchy_matrix(p.spec, p.n, p.q, c01_grid(M));
            return fredholm_det(p.zeta * D);
        },
        M0, kDetTolerance);
    r.value /= q_pochhammer_inf(p.zeta, p.q);
    return r;
}

CauchyTransform::CauchyTransform(const Protocol& spec, int n, QParam q, int M0) : q_(q) {
    const std::vector<Complex> probes{-1.0, Complex(-10.0, 3.0), Complex(6.0, 8.0)};
    auto spectrum = [&](int M) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(cauchy_matrix(spec, n, q, c01_grid(M)), false);
        if (es.info() != Eigen::Success) throw ConvergenceError("Cauchy kernel eigenvalue solver failed");
        return Eigen::VectorXcd(es.eigenvalues());
    };
    auto product = [](const Eigen::VectorXcd& lam, Complex z) {
        Complex v = 1.0;
        for (Complex l : lam) v *= 1.0 + z * l;
        return v;
    };
    int M = std::max(4, M0 + (M0 % 2));
    Eigen::VectorXcd prev = spectrum(M);
    for (M *= 2; M <= kMaxGrid; M *= 2) {
        Eigen::VectorXcd cur = spectrum(M);
        double change = 0.0;
        for (Complex z : probes) {
            const Complex a = product(prev, z), b = product(cur, z);
            change = std::max(change, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
        if (change < kDetTolerance) {
            change_ = change;
            lambda_ = std::move(cur);
            return;
        }
        prev = std::move(cur);
    }
    throw ConvergenceError("Cauchy kernel discretization did not converge");
}

Complex CauchyTransform::det(Complex zeta) const {
    Complex v = 1.0;
    for (Complex l : lambda_) v *= 1.0 + zeta * l;
    return v;
}

Complex CauchyTransform::transform(Complex zeta) const { return det(zeta) / q_pochhammer_inf(zeta, q_); }

Complex q_laplace_direct(const std::vector<double>& pmf, Complex zeta, QParam q) {
    double mass = 0.0;
    for (double p : pmf) mass += p;
    if (std::abs(mass - 1.0) > 1e-10) throw ParameterError("q_laplace_direct: pmf must sum to 1");
    Complex total = 0.0;
    double qm = 1.0;
    for (std::size_t m = 0; m < pmf.size(); ++m, qm *= q.value()) {
        const Complex den = q_pochhammer_inf(zeta * qm, q);
        if (std::abs(den) < 1e-300) throw ParameterError("q_laplace_direct: singular input (zeta q^m hits a pole)");
        total += pmf[m] / den;
    }
    return total;
}

std::vector<double> pmf_from_moments(const std::vector<double>& mu, QParam q) {
    const int T = static_cast<int>(mu.size()) - 1;
    if (T < 0) throw ParameterError("pmf_from_moments: no moments");
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    MatL V(T + 1, T + 1);
    VecL b(T + 1);
    for (int j = 0; j <= T; ++j) {
        b(j) = mu[j];
        for (int m = 0; m <= T; ++m) V(j, m) = std::pow(static_cast<long double>(q.value()), static_cast<long double>(j) * m);
    }
    const VecL p = V.fullPivLu().solve(b);
    std::vector<double> out(T + 1);
    double total = 0.0;
    for (int m = 0; m <= T; ++m) {
        const double v = static_cast<double>(p(m));
        if (v < -1e-8 || v > 1.0 + 1e-8)
            throw ParameterError("pmf_from_moments: mass " + std::to_string(v) + " at " + std::to_string(m) +
                                 " violates the support bound");
        out[m] = std::clamp(v, 0.0, 1.0);
        total += out[m];
    }
    for (double& v : out) v /= total;
    return out;
}

std::vector<double> bernoulli_exact_pmf(int n, const std::vector<double>& betas, QParam q) {
    if (n < 1) throw ParameterError("particle index n must be >= 1");
    const int T = static_cast<int>(betas.size());
    const Protocol spec = Protocol::bernoulli(betas);
    const std::vector<double> a(n, 1.0);
    std::vector<double> mu(T + 1, 1.0);
    for (int j = 1; j <= T; ++j) {
        const ObservableVector h = evolve_true(step_init_data(n, j), spec, a, q);
        mu[j] = h.at_n(std::vector<int>(j, n));
    }
    return pmf_from_moments(mu, q);
}

InversionContour default_inversion_contour(int m, QParam q) {
    if (m < 0) throw ParameterError("inversion index m must be nonnegative");
    const double top = std::pow(q.value(), -(m + 1.0));
    const double next = std::pow(q.value(), -(m + 2.0));
    InversionContour c;
    c.center = 0.5 * (1.0 + top);
    const double lo = 0.5 * (top - 1.0), hi = next - c.center;
    if (!(hi > lo)) throw ParameterError("inversion contour cannot separate q^{-(m+1)} from q^{-(m+2)}");
    c.radius = 0.5 * (lo + hi);
    c.nodes = 32;
    return c;
}

namespace {

template <class Integrand>
InversionResult invert_with(Integrand&& g, int m, QParam q, const InversionContour& c) {
    InversionResult r;
    double prev = 0.0;
    for (int M = std::max(8, c.nodes + c.nodes % 2); M <= 2048; M *= 2) {
        Complex acc = 0.0;
        for (int j = 0; j < M; ++j) {
            const Complex e = std::polar(1.0, 2.0 * kPi * (j + 0.5) / M);
            acc += g(c.center + c.radius * e) * c.radius * e / double(M);
        }
        acc *= -std::pow(q.value(), m);
        if (M > c.nodes && std::abs(acc.real() - prev) < 1e-12) {
            r.probability = acc.real();
            r.im_part = acc.imag();
            r.nodes = M;
            r.doubling_change = std::abs(acc.real() - prev);
            return r;
        }
        prev = acc.real();
    }
    throw ConvergenceError("q-Laplace inversion did not converge");
}

}  // namespace

InversionResult invert_q_laplace(const std::function<Complex(Complex)>& G, int m, QParam q,
                                 std::optional<InversionContour> contour) {
    const InversionContour c = contour.value_or(default_inversion_contour(m, q));
    const double qm1 = std::pow(q.value(), m + 1);
    return invert_with([&](Complex z) { return q_pochhammer_inf(qm1 * z, q) * G(z); }, m, q, c);
}

InversionResult invert_q_laplace(const CauchyTransform& G, int m, std::optional<InversionContour> contour) {
    const QParam q = G.q();
    const InversionContour c = contour.value_or(default_inversion_contour(m, q));
    return invert_with([&](Complex z) { return G.det(z) / q_pochhammer(z, q, m + 1); }, m, q, c);
}

}  // namespace qtasep
