#include "qtasep/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace qtasep {

ContourFamily ContourFamily::doubled() const {
    ContourFamily out = *this;
    for (Circle& c : out.circles) c.nodes *= 2;
    return out;
}

std::string ContourFamily::describe() const {
    std::ostringstream os;
    os.precision(6);
    for (int A = 0; A < k(); ++A) {
        os << (A ? "; " : "") << "z_" << A + 1 << ": c=" << circles[A].center << " r=" << circles[A].radius
           << " M=" << circles[A].nodes;
    }
    return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxNodes = 4096;

struct Geometry {
    double c;  // common center
    double d;  // max |a_i - c|
};

Geometry geometry(const std::vector<double>& a) {
    if (a.empty()) throw ParameterError("rate vector a is empty");
    for (double ai : a)
        if (!(ai > 0.0)) throw ParameterError("rate parameters a_i must be positive");
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    const double c = 0.5 * (*lo + *hi);
    return {c, 0.5 * (*hi - *lo)};
}

int nodes_for(double rho, double tol, int floor_nodes) {
    int M = floor_nodes;
    if (std::isfinite(rho) && rho > 1.0) {
        const double need = std::ceil(std::log(1.0 / tol) / std::log(rho));
        if (need > kMaxNodes) throw ConvergenceError("contour convergence ratio too close to 1");
        M = std::max(M, static_cast<int>(need));
    }
    return M + (M % 2);
}

int floor_nodes(std::size_t N) { return std::max(16, 2 * (static_cast<int>(N) + 2)); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

std::vector<double> convergence_ratios(const ContourFamily& cf, QParam q, const std::vector<double>& a,
                                       const Protocol*) {
    const Geometry g = geometry(a);
    const double qv = q.value();
    std::vector<double> rho(cf.k());
    for (int A = 0; A < cf.k(); ++A) {
        const double r = cf.circles[A].radius;
        double inner = g.d;
        if (A + 1 < cf.k()) inner = std::max(inner, (1.0 - qv) * g.c + qv * cf.circles[A + 1].radius);
        double outer = g.c;  // 1/z at the origin; Bernoulli poles -1/beta lie farther out
        if (A > 0) outer = std::min(outer, (cf.circles[A - 1].radius - (1.0 - qv) * g.c) / qv);
        rho[A] = std::min(inner > 0.0 ? r / inner : kInf, outer / r);
    }
    return rho;
}

void validate_contours(const ContourFamily& cf, QParam q, const std::vector<double>& a, const Protocol* spec) {
    if (cf.k() < 1) throw ContourError("contour family is empty");
    const Geometry g = geometry(a);
    const double qv = q.value();
    const double c = cf.circles[0].center;
    for (int A = 0; A < cf.k(); ++A) {
        const Circle& C = cf.circles[A];
        if (C.center != c) throw ContourError("circles must share one center");
        if (!(C.radius > 0.0)) throw ContourError("radius of z_" + std::to_string(A + 1) + " must be positive");
        if (C.nodes < 2 || C.nodes % 2) throw ContourError("node counts must be even and >= 2");
    }
    for (int A = 0; A + 1 < cf.k(); ++A) {
        const double lhs = (1.0 - qv) * c + qv * cf.circles[A + 1].radius;
        if (!(lhs < cf.circles[A].radius)) {
            throw ContourError("nesting violated: (1-q)c + q r_" + std::to_string(A + 2) + " = " + fmt(lhs) +
                               " >= r_" + std::to_string(A + 1) + " = " + fmt(cf.circles[A].radius));
        }
    }
    const double rk = cf.circles.back().radius;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(std::abs(a[i] - c) < rk)) {
            throw ContourError("containment violated: |a_" + std::to_string(i + 1) + " - c| = " +
                               fmt(std::abs(a[i] - c)) + " >= r_" + std::to_string(cf.k()) + " = " + fmt(rk));
        }
    }
    const double r1 = cf.circles[0].radius;
    if (!(r1 < c)) throw ContourError("exclusion violated: r_1 = " + fmt(r1) + " >= c = " + fmt(c) + " (0 enclosed)");
    if (spec) {
        for (double b : spec->beta) {
            const double pole = -1.0 / b;
            if (!(std::abs(pole - c) > r1))
                throw ContourError("pole -1/beta = " + fmt(pole) + " lies inside z_1 contour");
        }
    }
    (void)g;
}

ContourFamily default_contours(int k, QParam q, const std::vector<double>& a, double margin, double gap, int M,
                               const Protocol* spec) {
    if (k < 1) throw ParameterError("default_contours: k must be >= 1");
    const Geometry g = geometry(a);
    ContourFamily cf;
    cf.circles.resize(k);
    double r = g.d + margin * g.c;
    for (int A = k - 1; A >= 0; --A) {
        if (A < k - 1) r = (1.0 - q.value()) * g.c + q.value() * r + gap * g.c;
        cf.circles[A] = {g.c, r, M > 0 ? M + (M % 2) : 2};
    }
    validate_contours(cf, q, a, spec);
    if (M <= 0) {
        const auto rho = convergence_ratios(cf, q, a, spec);
        for (int A = 0; A < k; ++A) cf.circles[A].nodes = nodes_for(rho[A], 1e-11, floor_nodes(a.size()));
    }
    return cf;
}

ContourFamily auto_contours(int k, QParam q, const std::vector<double>& a, const Protocol& spec, double tol) {
    if (k < 1) throw ParameterError("auto_contours: k must be >= 1");
    const Geometry g = geometry(a);
    const double qv = q.value();
    // The z_{A-1}/q constraint is implied by the inner chain, so only r_1 < c / rho binds.
    auto chain = [&](double rho) {
        std::vector<double> r(k);
        r[k - 1] = rho * std::max(g.d, 0.1 * g.c);
        for (int A = k - 2; A >= 0; --A) r[A] = rho * std::max(g.d, (1.0 - qv) * g.c + qv * r[A + 1]);
        return r;
    };
    double lo = 1.0, hi = 50.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chain(mid)[0] < g.c / mid ? lo : hi) = mid;
    }
    const auto r = chain(lo);
    ContourFamily cf;
    for (int A = 0; A < k; ++A) cf.circles.push_back({g.c, r[A], 2});
    validate_contours(cf, q, a, &spec);
    const auto rho = convergence_ratios(cf, q, a, &spec);
    for (int A = 0; A < k; ++A) cf.circles[A].nodes = nodes_for(rho[A], tol, floor_nodes(a.size()));
    return cf;
}

Complex f_ratio(const Protocol& spec, Complex z, QParam q) {
    const double qv = q.value();
    Complex v = std::exp((qv - 1.0) * spec.gamma * z);
    for (double al : spec.alpha) v *= 1.0 - al * z;
    for (double b : spec.beta) {
        const Complex den = 1.0 + b * z;
        if (std::abs(den) < 1e-300) throw ParameterError("f_ratio evaluated at a Bernoulli pole");
        v *= (1.0 + qv * b * z) / den;
    }
    return v;
}

namespace {

struct Dual {
    Complex v, d;
};
inline Dual operator*(const Dual& x, const Dual& y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
inline Dual operator*(const Complex& s, const Dual& y) { return {s * y.v, s * y.d}; }
inline Dual& operator+=(Dual& x, const Dual& y) {
    x.v += y.v;
    x.d += y.d;
    return x;
}

template <class S>
S make_scalar(Complex v, Complex d);
template <>
Complex make_scalar<Complex>(Complex v, Complex) { return v; }
template <>
Dual make_scalar<Dual>(Complex v, Complex d) { return {v, d}; }

template <class S>
class Evaluator {
public:
    Evaluator(const Protocol& spec, int k, int nmax, const std::vector<double>& a, QParam q, const ContourFamily& cf)
        : k_(k), width_(nmax + 1) {
        const double qv = q.value();
        z_.resize(k);
        G_.resize(k);
        for (int A = 0; A < k; ++A) {
            const Circle& C = cf.circles[A];
            const int M = C.nodes;
            z_[A].resize(M);
            G_[A].assign(static_cast<std::size_t>(width_) * M, S{});
            for (int m = 0; m < M; ++m) {
                // half-integer angles: nodes come in conjugate pairs and avoid the real axis
                const double th = 2.0 * std::numbers::pi * (m + 0.5) / M;
                const Complex e = std::polar(1.0, th);
                const Complex z = C.center + C.radius * e;
                z_[A][m] = z;
                const Complex w = C.radius * e / double(M);
                const Complex fr = f_ratio(spec, z, q);
                Complex g = w * fr / z;
                for (int n = 0; n <= nmax; ++n) {
                    if (n > 0) g *= a[n - 1] / (a[n - 1] - z);
                    G_[A][static_cast<std::size_t>(n) * M + m] = make_scalar<S>(g, g * (qv - 1.0) * z);
                }
            }
        }
        X_.resize(k * k);
        for (int B = 0; B < k; ++B) {
            for (int A = B + 1; A < k; ++A) {
                auto& X = X_[B * k + A];
                X.resize(z_[B].size() * z_[A].size());
                for (std::size_t i = 0; i < z_[B].size(); ++i)
                    for (std::size_t m = 0; m < z_[A].size(); ++m)
                        X[i * z_[A].size() + m] = (z_[B][i] - z_[A][m]) / (z_[B][i] - qv * z_[A][m]);
            }
        }
        prefactor_ = (k % 2 ? -1.0 : 1.0) * std::pow(qv, 0.5 * k * (k - 1));
    }

    std::vector<S> run() {
        const int M0 = static_cast<int>(z_[0].size());
        const std::size_t R = block(0);
        std::vector<std::vector<S>> partial(M0);
        const int workers = std::max(1, std::min<int>(M0, std::thread::hardware_concurrency()));
        auto work = [&](int w) {
            std::vector<int> chosen(k_);
            for (int m = w; m < M0; m += workers) {
                chosen[0] = m;
                partial[m] = top(m, chosen);
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        }
        std::vector<S> out(R, S{});
        for (int m = 0; m < M0; ++m)
            for (std::size_t r = 0; r < R; ++r) out[r] += partial[m][r];
        for (auto& v : out) v = Complex(prefactor_) * v;
        return out;
    }

private:
    std::size_t block(int A) const {
        std::size_t R = 1;
        for (int B = A; B < k_; ++B) R *= width_;
        return R;
    }

    // Contribution of outermost node m (already in chosen[0]) to all n.
    std::vector<S> top(int m, std::vector<int>& chosen) {
        const int M = static_cast<int>(z_[0].size());
        std::vector<S> out(block(0), S{});
        if (k_ == 1) {
            for (int n = 0; n < width_; ++n) out[n] = G_[0][static_cast<std::size_t>(n) * M + m];
            return out;
        }
        const auto child = level(1, chosen);
        const std::size_t R = block(1);
        for (int n = 0; n < width_; ++n) {
            const S coef = G_[0][static_cast<std::size_t>(n) * M + m];
            for (std::size_t r = 0; r < R; ++r) out[n * R + r] += coef * child[r];
        }
        return out;
    }

    std::vector<S> level(int A, std::vector<int>& chosen) {
        const int M = static_cast<int>(z_[A].size());
        std::vector<S> out(block(A), S{});
        std::vector<Complex> c(M, Complex(1.0));
        for (int B = 0; B < A; ++B) {
            const Complex* X = &X_[B * k_ + A][static_cast<std::size_t>(chosen[B]) * M];
            for (int m = 0; m < M; ++m) c[m] *= X[m];
        }
        if (A == k_ - 1) {
            for (int n = 0; n < width_; ++n) {
                const S* G = &G_[A][static_cast<std::size_t>(n) * M];
                S acc{};
                for (int m = 0; m < M; ++m) acc += c[m] * G[m];
                out[n] = acc;
            }
            return out;
        }
        const std::size_t R = block(A + 1);
        for (int m = 0; m < M; ++m) {
            chosen[A] = m;
            const auto child = level(A + 1, chosen);
            for (int n = 0; n < width_; ++n) {
                const S coef = c[m] * G_[A][static_cast<std::size_t>(n) * M + m];
                for (std::size_t r = 0; r < R; ++r) out[n * R + r] += coef * child[r];
            }
        }
        return out;
    }

    int k_;
    int width_;
    std::vector<std::vector<Complex>> z_;
    std::vector<std::vector<S>> G_;
    std::vector<std::vector<Complex>> X_;
    double prefactor_ = 1.0;
};

void evaluate_into(MomentTable& t, const Protocol& spec, const std::vector<double>& a, QParam q,
                   bool time_derivative) {
    double cost = t.nmax + 1.0;
    for (const Circle& C : t.contours.circles) cost *= C.nodes;
    if (cost > 4e10) throw ConvergenceError("nested contour quadrature exceeds the work cap: " + t.contours.describe());
    if (time_derivative) {
        Evaluator<Dual> ev(spec, t.k, t.nmax, a, q, t.contours);
        const auto out = ev.run();
        t.values.resize(out.size());
        t.time_derivative.resize(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            t.values[i] = out[i].v;
            t.time_derivative[i] = out[i].d;
        }
    } else {
        Evaluator<Complex> ev(spec, t.k, t.nmax, a, q, t.contours);
        t.values = ev.run();
        t.time_derivative.clear();
    }
}

double max_change(const MomentTable& x, const MomentTable& y) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) d = std::max(d, std::abs(x.values[i] - y.values[i]));
    for (std::size_t i = 0; i < x.time_derivative.size(); ++i)
        d = std::max(d, std::abs(x.time_derivative[i] - y.time_derivative[i]));
    return d;
}

}  // namespace

std::size_t MomentTable::flat(const std::vector<int>& n) const {
    if (static_cast<int>(n.size()) != k) throw ParameterError("moment table: wrong number of indices");
    std::size_t idx = 0;
    for (int v : n) {
        if (v < 0 || v > nmax) throw ParameterError("moment table: index out of range");
        idx = idx * (nmax + 1) + v;
    }
    return idx;
}

MomentTable moment_table(const Protocol& spec, int k, int nmax, const std::vector<double>& a, QParam q,
                         const ContourFamily& cf, bool time_derivative, bool certify) {
    if (k < 1) throw ParameterError("moment_table: k must be >= 1");
    if (cf.k() != k) throw ParameterError("contour family has the wrong number of circles");
    if (nmax < 0 || nmax > static_cast<int>(a.size())) throw ParameterError("moment_table: nmax exceeds N");
    for (double al : spec.alpha)
        for (double ai : a)
            if (!(ai * al < 1.0)) throw ParameterError("a_i * alpha must be < 1");
    validate_contours(cf, q, a, &spec);
    MomentTable cur;
    cur.k = k;
    cur.nmax = nmax;
    cur.contours = cf;
    evaluate_into(cur, spec, a, q, time_derivative);
    if (!certify) return cur;
    for (int round = 0; round < 4; ++round) {
        MomentTable fine = cur;
        fine.contours = cur.contours.doubled();
        evaluate_into(fine, spec, a, q, time_derivative);
        fine.doubling_change = max_change(cur, fine);
        if (fine.doubling_change < kDoublingTolerance) return fine;
        cur = std::move(fine);
    }
    throw ConvergenceError("nested contour integral did not converge under node doubling (change " +
                           fmt(cur.doubling_change) + "): " + cur.contours.describe());
}

MomentTable moment_table(const Protocol& spec, int k, int nmax, const std::vector<double>& a, QParam q,
                         bool time_derivative) {
    return moment_table(spec, k, nmax, a, q, auto_contours(k, q, a, spec), time_derivative, true);
}

namespace {

void check_sorted(const std::vector<int>& n, std::size_t N) {
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0 || n[j] > static_cast<int>(N)) throw ParameterError("n entries must lie in 0..N");
        if (j > 0 && n[j] > n[j - 1]) throw ParameterError("n must be weakly decreasing");
    }
}

MomentResult to_result(const MomentTable& t, const std::vector<int>& n) {
    MomentResult r;
    const Complex v = t.at(n);
    r.value = v.real();
    r.im_part = v.imag();
    r.doubling_change = t.doubling_change;
    for (const Circle& C : t.contours.circles) r.nodes.push_back(C.nodes);
    return r;
}

}  // namespace

MomentResult nested_moment(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                           QParam q, const ContourFamily& cf) {
    check_sorted(n, a.size());
    if (n.empty()) return {1.0, 0.0, 0.0, {}};
    return to_result(moment_table(spec, static_cast<int>(n.size()), n.front(), a, q, cf), n);
}

MomentResult nested_moment(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                           QParam q) {
    check_sorted(n, a.size());
    if (n.empty()) return {1.0, 0.0, 0.0, {}};
    const int k = static_cast<int>(n.size());
    return to_result(moment_table(spec, k, n.front(), a, q, auto_contours(k, q, a, spec), false, true), n);
}

double moment_k1_residues(const Protocol& spec, int n, const std::vector<double>& a, QParam q) {
    if (n < 0 || n > static_cast<int>(a.size())) throw ParameterError("moment_k1_residues: n out of range");
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < i; ++l)
            if (a[i] == a[l]) throw ParameterError("moment_k1_residues needs distinct a_1..a_n");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double term = f_ratio(spec, a[i], q).real();
        for (int l = 0; l < n; ++l)
            if (l != i) term *= a[l] / (a[l] - a[i]);
        total += term;
    }
    return total;
}

namespace {

// prod_i [grad_{x_i}]_i u at n, expanded over the subsets of shifted coordinates.
Complex apply_grad_x(const MomentTable& t, const std::vector<int>& n, const std::vector<double>& x) {
    const int k = static_cast<int>(n.size());
    Complex total = 0.0;
    std::vector<int> m(k);
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        double coef = 1.0;
        for (int i = 0; i < k; ++i) {
            const bool shift = mask & (1u << i);
            coef *= shift ? -x[i] : 1.0 + x[i];
            m[i] = n[i] - (shift ? 1 : 0);
        }
        total += coef * t.at(m);
    }
    return total;
}

Protocol drop_last(Protocol p, Stage::Kind kind) {
    if (kind == Stage::Kind::geometric) p.alpha.pop_back();
    else p.beta.pop_back();
    return p;
}

void check_grid_point(const std::vector<int>& n, std::size_t N) {
    if (n.empty()) throw ParameterError("n must be nonempty");
    for (int v : n)
        if (v < 1 || v > static_cast<int>(N)) throw ParameterError("free-equation points need entries in 1..N");
}

}  // namespace

double free_equation_residual(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                              QParam q) {
    check_grid_point(n, a.size());
    const int k = static_cast<int>(n.size());
    const int nmax = *std::max_element(n.begin(), n.end());
    const double qv = q.value();
    const bool poisson_form = spec.flavor == Flavor::poisson || spec.flavor == Flavor::combined;
    if (poisson_form) {
        const MomentTable t = moment_table(spec, k, nmax, a, q, true);
        Complex rhs = 0.0;
        std::vector<int> m = n;
        for (int i = 0; i < k; ++i) {
            --m[i];
            rhs += a[n[i] - 1] * (1.0 - qv) * (t.at(m) - t.at(n));
            ++m[i];
        }
        return std::abs(t.dt_at(n) - rhs);
    }
    if (spec.flavor == Flavor::geometric) {
        if (spec.alpha.empty()) throw ParameterError("free-equation check needs at least one geometric step");
        const double al = spec.alpha.back();
        const MomentTable next = moment_table(spec, k, nmax, a, q);
        const MomentTable prev = moment_table(drop_last(spec, Stage::Kind::geometric), k, nmax, a, q);
        std::vector<double> x(k);
        for (int i = 0; i < k; ++i) x[i] = -a[n[i] - 1] * al;
        return std::abs(next.at(n) - apply_grad_x(prev, n, x));
    }
    if (spec.beta.empty()) throw ParameterError("free-equation check needs at least one Bernoulli step");
    const double b = spec.beta.back();
    const MomentTable next = moment_table(spec, k, nmax, a, q);
    const MomentTable prev = moment_table(drop_last(spec, Stage::Kind::bernoulli), k, nmax, a, q);
    std::vector<double> x(k), xq(k);
    for (int i = 0; i < k; ++i) {
        x[i] = a[n[i] - 1] * b;
        xq[i] = qv * x[i];
    }
    return std::abs(apply_grad_x(next, n, x) - apply_grad_x(prev, n, xq));
}

double boundary_residual(const Protocol& spec, const std::vector<int>& n, int i, const std::vector<double>& a,
                         QParam q) {
    const int k = static_cast<int>(n.size());
    if (i < 1 || i >= k) throw ParameterError("boundary_residual: need 1 <= i < k");
    if (n[i - 1] != n[i]) throw ParameterError("boundary_residual: requires n_i = n_{i+1}");
    check_grid_point(n, a.size());
    const int nmax = *std::max_element(n.begin(), n.end());
    const MomentTable t = moment_table(spec, k, nmax, a, q);
    std::vector<int> mi = n, mj = n;
    --mi[i - 1];
    --mj[i];
    const double qv = q.value();
    return std::abs((t.at(mi) - t.at(n)) - qv * (t.at(mj) - t.at(n)));
}

Complex symmetrization_integral(const Circle& c, QParam q, Complex (*G)(Complex)) {
    const int M = c.nodes;
    std::vector<Complex> z(M), w(M);
    for (int m = 0; m < M; ++m) {
        const Complex e = std::polar(1.0, 2.0 * std::numbers::pi * (m + 0.5) / M);
        z[m] = c.center + c.radius * e;
        w[m] = c.radius * e / double(M) * G(z[m]);
    }
    Complex total = 0.0;
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;  // removable: (z_1 - q z_2) cancels, leaving (z_1 - z_2) = 0
            const Complex cross = (z[i] - z[j]) / (z[i] - q.value() * z[j]);
            total += (z[i] - q.value() * z[j]) * cross * w[i] * w[j];
        }
    }
    return total;
}

}  // namespace qtasep
