#include "qtasep/verify.hpp"

#include "qtasep/dynamics.hpp"
#include "qtasep/evolution.hpp"
#include "qtasep/fredholm.hpp"
#include "qtasep/macdonald.hpp"
#include "qtasep/moments.hpp"
#include "qtasep/monte_carlo.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace qtasep {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    double residual = 0.0;
    std::string detail;
    bool extra_ok = true;  // additional pass condition beyond residual <= tolerance
};

class Recorder {
public:
    explicit Recorder(SuiteReport& r) : r_(r) {}

    void check(std::string name, int criterion, double tol, const std::function<Outcome()>& fn) {
        CheckReport c;
        c.name = std::move(name);
        c.criterion = criterion;
        c.tolerance = tol;
        const auto t0 = Clock::now();
        try {
            const Outcome o = fn();
            c.residual = o.residual;
            c.detail = o.detail;
            c.pass = o.extra_ok && std::isfinite(o.residual) && o.residual <= tol;
        } catch (const std::exception& e) {
            c.residual = kInf;
            c.detail = e.what();
            c.pass = false;
        }
        c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        r_.checks.push_back(std::move(c));
    }

private:
    SuiteReport& r_;
};

std::string vec_str(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

/// Weakly decreasing vectors of length k with entries in [lo, N].
std::vector<std::vector<int>> sorted_vectors(int N, int k, int lo) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int hi) {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int v = hi; v >= lo; --v) {
            cur.push_back(v);
            rec(v);
            cur.pop_back();
        }
    };
    rec(N);
    return out;
}

McOptions mc_opts(const VerifyOptions& opt, std::uint64_t tag) {
    McOptions m;
    m.trials = opt.trials;
    m.seed = stream_seed(opt.seed, tag);
    m.workers = opt.workers;
    return m;
}

// fixed batteries shared by several suites
const std::vector<double> kPoissonTimes{0.25, 0.5, 1.0};
const std::vector<double> kAlphaSchedule{0.3, 0.5, 0.2};
const std::vector<double> kBetaSchedule{0.7, 1.2, 0.4};
const std::vector<double> kFredholmBetas{1.0, 0.5, 2.0, 0.8, 1.5, 0.6};

Protocol battery_protocol(Flavor f, int ti) {
    switch (f) {
        case Flavor::poisson: return Protocol::poisson(kPoissonTimes[ti - 1]);
        case Flavor::geometric: return Protocol::geometric(std::vector<double>(kAlphaSchedule.begin(), kAlphaSchedule.begin() + ti));
        case Flavor::bernoulli: return Protocol::bernoulli(std::vector<double>(kBetaSchedule.begin(), kBetaSchedule.begin() + ti));
        default: throw ParameterError("battery_protocol: pure flavors only");
    }
}

std::vector<Stage> battery_stages(Flavor f) {
    if (f == Flavor::poisson)
        return {{Stage::Kind::poisson, 0.25}, {Stage::Kind::poisson, 0.25}, {Stage::Kind::poisson, 0.5}};
    return stages_of(battery_protocol(f, 3));
}

struct ClosedForm {
    Protocol spec;
    double value;
};

// N = 1 with rate a: e^{-a(1-q)t}, (1 - a alpha)^t, ((1 + q a beta)/(1 + a beta))^t
std::vector<ClosedForm> closed_forms(double a, double q) {
    return {
        {Protocol::poisson(1.0), std::exp(-a * (1 - q) * 1.0)},
        {Protocol::geometric(0.3, 3), std::pow(1 - a * 0.3, 3)},
        {Protocol::bernoulli(0.7, 3), std::pow((1 + q * a * 0.7) / (1 + a * 0.7), 3)},
    };
}
constexpr double kClosedFormRate = 1.3;

double true_value(const Protocol& spec, int N, const std::vector<int>& n, double q,
                  StageOrder order = StageOrder::canonical) {
    const std::vector<double> a(N, 1.0);
    const ObservableVector h = evolve_true(step_init_data(N, static_cast<int>(n.size())), spec, a, QParam(q), order);
    return h.at_n(n);
}

// ---------------------------------------------------------------- identities

void suite_identities(Recorder& rec, const VerifyOptions&) {
    const std::vector<double> qs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    rec.check("p_{m,alpha} normalization, m <= 40 and m = inf", 1, 1e-12, [&] {
        double worst = 0.0;
        for (double qv : qs)
            for (int ai = 1; ai <= 19; ++ai)
                for (int m = 0; m <= 41; ++m) {
                    const auto d = jump_pmf(m == 41 ? std::nullopt : std::optional<int>(m), 0.05 * ai, QParam(qv));
                    worst = std::max(worst, std::abs(d.raw_sum - 1.0));
                }
        return Outcome{worst, "9 q x 19 alpha x 42 m"};
    });

    const std::vector<double> as{0.2, 0.7, 1.5, 3.0, -0.3, -0.8};
    auto cid = [&](int which) {
        double worst = 0.0;
        for (double qv : qs) {
            const QParam q(qv);
            for (double a : as)
                for (int y = 0; y <= 12; ++y)
                    for (int s = 0; s <= y + 1; ++s) {
                        const double c = coeff_C(a, y, s, q), cm = coeff_C(a, y, s - 1, q);
                        double lhs = 0, rhs = 0, scale = 1.0;
                        if (which == 1) {
                            lhs = (std::pow(qv, s) - 1) * (1 + a * std::pow(qv, y - s)) * c;
                            rhs = a * (1 - std::pow(qv, y + 1 - s)) * cm;
                            scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
                        } else if (which == 2) {
                            lhs = coeff_C(a, y + 1, s, q);
                            const double t1 = (1 + a * std::pow(qv, y - s)) * c, t2 = a * std::pow(qv, y + 1 - s) * cm;
                            rhs = t1 - t2;
                            scale = std::max({1.0, std::abs(t1), std::abs(t2)});
                        } else {
                            lhs = coeff_C(qv * a, y, s, q);
                            const double t1 = (1 + a * std::pow(qv, y - s)) * c, t2 = a * (1 - std::pow(qv, y + 1 - s)) * cm;
                            rhs = (t1 + t2) / (1 + a);
                            scale = std::max({1.0, std::abs(t1 / (1 + a)), std::abs(t2 / (1 + a))});
                        }
                        worst = std::max(worst, std::abs(lhs - rhs) / scale);
                    }
        }
        return Outcome{worst, "q in 0.1..0.9, a in {0.2,0.7,1.5,3,-0.3,-0.8}, y <= 12, 0 <= s <= y+1"};
    };
    rec.check("C_a identity (i): (q^s-1)(1+aq^{y-s})C_a(y,s) = a(1-q^{y+1-s})C_a(y,s-1)", 1, 1e-12, [&] { return cid(1); });
    rec.check("C_a identity (ii): C_a(y+1,s) recursion", 1, 1e-12, [&] { return cid(2); });
    rec.check("C_a identity (iii): C_{qa}(y,s) from C_a(y,s), C_a(y,s-1)", 1, 1e-12, [&] { return cid(3); });

    const std::vector<double> alphas{0.1, 0.3, 0.5, 0.7, 0.9};
    rec.check("sum_j p_{m,a}(j) q^{jy} = sum_s C_{-a}(y,s) q^{sm}, m <= 20, y <= 8", 1, 1e-12, [&] {
        double worst = 0.0;
        for (double qv : qs)
            for (double a : alphas)
                for (int m = 0; m <= 20; ++m) {
                    const QParam q(qv);
                    const auto d = jump_pmf(m, a, q);
                    for (int y = 0; y <= 8; ++y) {
                        double lhs = 0, rhs = 0;
                        for (int j = 0; j <= m; ++j) lhs += d.pmf[j] * std::pow(qv, j * y);
                        for (int s = 0; s <= y; ++s) rhs += coeff_C(-a, y, s, q) * std::pow(qv, s * m);
                        worst = std::max(worst, std::abs(lhs - rhs));
                    }
                }
        return Outcome{worst, ""};
    });
    rec.check("sum_j p_{inf,a}(j) q^{jy} = C_{-a}(y,0), y <= 8", 1, 1e-10, [&] {
        double worst = 0.0;
        for (double qv : qs)
            for (double a : alphas) {
                const QParam q(qv);
                const auto d = jump_pmf(std::nullopt, a, q);
                for (int y = 0; y <= 8; ++y) {
                    double lhs = 0;
                    for (std::size_t j = 0; j < d.pmf.size(); ++j) lhs += d.pmf[j] * std::pow(qv, double(j) * y);
                    worst = std::max(worst, std::abs(lhs - coeff_C(-a, y, 0, q)));
                }
            }
        return Outcome{worst, ""};
    });
    rec.check("sum_r (-1)^r q^{r(r-1)/2} / ((q;q)_r (q;q)_{n-r}) = delta_{n,0}, n <= 12", 1, 1e-12, [&] {
        double worst = 0.0;
        for (double qv : qs) {
            const QParam q(qv);
            for (int n = 0; n <= 12; ++n) {
                double sum = 0, scale = 1.0;
                for (int r = 0; r <= n; ++r) {
                    const double term = (r % 2 ? -1.0 : 1.0) * std::pow(qv, r * (r - 1) / 2.0) /
                                        (q_pochhammer(qv, q, r) * q_pochhammer(qv, q, n - r));
                    sum += term;
                    scale = std::max(scale, std::abs(term));
                }
                worst = std::max(worst, std::abs(sum - (n == 0 ? 1.0 : 0.0)) / scale);
            }
        }
        return Outcome{worst, "residual relative to the largest term"};
    });
}

// ---------------------------------------------------------------- contour

ContourFamily family_from_radii(const std::vector<double>& radii, const std::vector<double>& a) {
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    ContourFamily cf;
    for (double r : radii) cf.circles.push_back({0.5 * (*lo + *hi), r, 256});
    return cf;
}

void suite_contour(Recorder& rec, const VerifyOptions& opt) {
    const QParam q(opt.q);

    if (opt.contour_radii) {
        const std::vector<double> radii = *opt.contour_radii;
        rec.check("user contour family", 4, 1e-10, [&] {
            const int k = static_cast<int>(radii.size());
            const std::vector<double> a(3, 1.0);
            const Protocol spec = Protocol::poisson(0.5);
            const ContourFamily cf = family_from_radii(radii, a);
            validate_contours(cf, q, a, &spec);
            std::vector<int> n(k);
            for (int i = 0; i < k; ++i) n[i] = std::max(1, 3 - i);
            const double v = nested_moment(spec, n, a, q, cf).value;
            const double t = true_value(spec, 3, n, opt.q);
            return Outcome{std::abs(v - t), "n=" + vec_str(n) + " radii accepted"};
        });
        return;
    }

    // criterion 2: k = 1 closed forms and the residue oracle
    for (const auto& cfm : closed_forms(kClosedFormRate, opt.q)) {
        const std::string fl(flavor_name(cfm.spec.flavor));
        rec.check("k=1 nested vs closed form, N=1, " + fl, 2, 1e-10, [&] {
            const double v = nested_moment(cfm.spec, {1}, {kClosedFormRate}, q).value;
            return Outcome{std::abs(v - cfm.value), "closed form " + num(cfm.value)};
        });
        rec.check("k=1 nested vs residues, n=3, distinct a, " + fl, 2, 1e-10, [&] {
            const std::vector<double> a{1.3, 0.8, 1.1};
            const double v = nested_moment(cfm.spec, {3}, a, q).value;
            return Outcome{std::abs(v - moment_k1_residues(cfm.spec, 3, a, q)), ""};
        });
    }

    // criterion 3: nested vs true evolution, N <= 3, k <= 3, step initial data
    for (Flavor f : {Flavor::poisson, Flavor::geometric, Flavor::bernoulli}) {
        for (int ti = 1; ti <= 3; ++ti) {
            const Protocol spec = battery_protocol(f, ti);
            const std::string label = std::string(flavor_name(f)) + " t=" + num(spec.time());
            rec.check("nested vs true evolution, N<=3, k<=3, " + label, 3, 1e-8, [&] {
                double worst = 0.0;
                int count = 0;
                for (int k = 1; k <= 3; ++k) {
                    const MomentTable tab = moment_table(spec, k, 3, std::vector<double>(3, 1.0), q);
                    for (int N = 1; N <= 3; ++N)
                        for (const auto& n : sorted_vectors(N, k, 0)) {
                            worst = std::max(worst, std::abs(tab.at(n).real() - true_value(spec, N, n, opt.q)));
                            ++count;
                        }
                }
                return Outcome{worst, std::to_string(count) + " (N, n) pairs"};
            });
        }
    }

    // criterion 4
    rec.check("m(0; n) = 1", 4, 1e-10, [&] {
        double worst = 0.0;
        const std::vector<double> a{1.0, 0.8, 1.25};
        for (const Protocol& spec : {Protocol::poisson(0.0), Protocol::geometric({}), Protocol::bernoulli({})})
            for (const std::vector<int>& n : std::vector<std::vector<int>>{{1}, {3}, {2, 1}, {3, 3}, {3, 2, 1}, {2, 2, 2}})
                worst = std::max(worst, std::abs(nested_moment(spec, n, a, q).value - 1.0));
        return Outcome{worst, "3 flavors x 6 n-vectors"};
    });
    rec.check("m(t; n) = 0 when n_k = 0", 4, 1e-10, [&] {
        double worst = 0.0;
        const std::vector<double> a{1.0, 0.8, 1.25};
        for (const Protocol& spec : {Protocol::poisson(0.7), Protocol::geometric({0.3, 0.4}), Protocol::bernoulli({0.8, 0.5})})
            for (const std::vector<int>& n : std::vector<std::vector<int>>{{0}, {1, 0}, {3, 0}, {2, 1, 0}, {3, 0, 0}})
                worst = std::max(worst, std::abs(nested_moment(spec, n, a, q).value));
        return Outcome{worst, "3 flavors x 5 n-vectors"};
    });

    struct FreeCase {
        Protocol spec;
        std::vector<int> n;
        std::vector<double> a;
    };
    const std::vector<double> a1{1.0, 1.0, 1.0}, a2{1.0, 0.8, 1.25};
    const std::vector<FreeCase> free_cases{
        {Protocol::poisson(0.5), {1}, a1},
        {Protocol::poisson(1.0), {3}, a2},
        {Protocol::poisson(0.7), {2, 1}, a1},
        {Protocol::poisson(1.2), {1, 3}, a2},
        {Protocol::poisson(0.4), {3, 2, 1}, a2},
        {Protocol::poisson(0.9), {1, 2, 3}, a1},
        {Protocol::poisson(0.6), {3, 1, 2}, a2},
        {Protocol::geometric({0.3}), {2}, a1},
        {Protocol::geometric({0.3, 0.5}), {3}, a2},
        {Protocol::geometric({0.4, 0.2}), {2, 1}, a1},
        {Protocol::geometric({0.2, 0.3, 0.4}), {1, 3}, a2},
        {Protocol::geometric({0.5, 0.3}), {3, 2, 1}, a1},
        {Protocol::geometric({0.3, 0.3, 0.3}), {2, 3, 1}, a2},
        {Protocol::geometric({0.6}), {1, 2}, a1},
        {Protocol::bernoulli({0.7}), {1}, a1},
        {Protocol::bernoulli({0.7, 1.2}), {3}, a2},
        {Protocol::bernoulli({0.5, 0.9}), {2, 1}, a1},
        {Protocol::bernoulli({1.5, 0.4, 0.8}), {1, 3}, a2},
        {Protocol::bernoulli({0.6, 1.1}), {3, 2, 1}, a1},
        {Protocol::bernoulli({0.9, 0.9, 0.9}), {2, 1, 3}, a2},
    };
    rec.check("free evolution residuals, 20 instances", 4, 1e-10, [&] {
        double worst = 0.0;
        for (const auto& c : free_cases) worst = std::max(worst, free_equation_residual(c.spec, c.n, c.a, q));
        return Outcome{worst, "7 poisson, 7 geometric, 6 bernoulli"};
    });

    struct BoundaryCase {
        Protocol spec;
        std::vector<int> n;
        int i;
        std::vector<double> a;
    };
    const std::vector<BoundaryCase> boundary_cases{
        {Protocol::poisson(0.8), {1, 1}, 1, a1},
        {Protocol::poisson(0.8), {3, 3}, 1, a2},
        {Protocol::poisson(1.1), {2, 2, 1}, 1, a2},
        {Protocol::poisson(1.1), {3, 1, 1}, 2, a1},
        {Protocol::geometric({0.3, 0.4}), {2, 2}, 1, a2},
        {Protocol::geometric({0.3, 0.4}), {3, 3, 3}, 2, a1},
        {Protocol::geometric({0.5}), {3, 2, 2}, 2, a2},
        {Protocol::bernoulli({0.7, 1.2}), {1, 1}, 1, a1},
        {Protocol::bernoulli({0.7, 1.2}), {2, 2, 2}, 1, a2},
        {Protocol::bernoulli({1.3}), {3, 3, 1}, 1, a2},
    };
    rec.check("boundary residuals at n_i = n_{i+1}, 10 instances", 4, 1e-9, [&] {
        double worst = 0.0;
        for (const auto& c : boundary_cases) worst = std::max(worst, boundary_residual(c.spec, c.n, c.i, c.a, q));
        return Outcome{worst, ""};
    });

    // criterion 9: combined protocol
    rec.check("combined nested vs true composition (both orders), N<=3, k<=2", 9, 1e-8, [&] {
        const Protocol spec = Protocol::combined(0.5, {0.3, 0.2}, {0.6});
        double worst = 0.0;
        for (int k = 1; k <= 2; ++k) {
            const MomentTable tab = moment_table(spec, k, 3, std::vector<double>(3, 1.0), q);
            for (int N = 1; N <= 3; ++N)
                for (const auto& n : sorted_vectors(N, k, 0))
                    for (StageOrder o : {StageOrder::canonical, StageOrder::reversed})
                        worst = std::max(worst, std::abs(tab.at(n).real() - true_value(spec, N, n, opt.q, o)));
        }
        return Outcome{worst, "gamma=0.5, alpha=(0.3,0.2), beta=(0.6)"};
    });
}

// ---------------------------------------------------------------- true vs Monte Carlo

void suite_truevsmc(Recorder& rec, const VerifyOptions& opt) {
    const QParam q(opt.q);

    // criterion 2
    for (const auto& cfm : closed_forms(kClosedFormRate, opt.q)) {
        const std::string fl(flavor_name(cfm.spec.flavor));
        rec.check("k=1 true evolution vs closed form, N=1, " + fl, 2, 1e-11, [&] {
            const ObservableVector h = evolve_true(step_init_data(1, 1), cfm.spec, {kClosedFormRate}, q);
            return Outcome{std::abs(h.at_n({1}) - cfm.value), ""};
        });
        rec.check("k=1 Monte Carlo vs closed form, N=1, " + fl + " (z)", 2, 3.0, [&] {
            ProcessParams p{{kClosedFormRate}, q};
            const Estimate e = mc_expectation(cfm.spec, {1}, p, step_initial(1), mc_opts(opt, 100 + int(cfm.spec.flavor)));
            return Outcome{z_score(e.mean, e.stderr_, cfm.value),
                           "mean " + num(e.mean) + " stderr " + num(e.stderr_) + " exact " + num(cfm.value)};
        });
    }

    // criterion 3
    const int N = opt.N > 0 ? opt.N : 3;
    const int kmax = opt.k > 0 ? opt.k : 3;
    std::vector<std::vector<int>> obs;
    for (int k = 1; k <= kmax; ++k)
        for (auto& n : sorted_vectors(N, k, 1)) obs.push_back(n);
    for (Flavor f : {Flavor::poisson, Flavor::geometric, Flavor::bernoulli}) {
        std::vector<std::vector<Estimate>> est;
        auto ensure = [&] {
            if (est.empty())
                est = mc_moments(step_initial(N), unit_rates(N, opt.q), battery_stages(f), {1, 2, 3}, obs,
                                 mc_opts(opt, 200 + int(f)));
        };
        for (int ti = 1; ti <= 3; ++ti) {
            const Protocol spec = battery_protocol(f, ti);
            for (std::size_t o = 0; o < obs.size(); ++o) {
                rec.check("MC vs true, " + std::string(flavor_name(f)) + " t=" + num(spec.time()) + " N=" +
                              std::to_string(N) + " n=" + vec_str(obs[o]) + " (z)",
                          3, 3.0, [&] {
                              ensure();
                              const double exact = true_value(spec, N, obs[o], opt.q);
                              const Estimate& e = est[ti - 1][o];
                              return Outcome{z_score(e.mean, e.stderr_, exact),
                                             "mean " + num(e.mean) + " exact " + num(exact)};
                          });
            }
        }
    }

    // criterion 9
    {
        const Protocol spec = Protocol::combined(0.5, {0.3, 0.2}, {0.6});
        std::vector<std::vector<int>> obs9;
        for (int k = 1; k <= 2; ++k)
            for (auto& n : sorted_vectors(3, k, 1)) obs9.push_back(n);
        std::vector<Estimate> e1, e2;
        auto ensure = [&] {
            if (!e2.empty()) return;
            for (StageOrder o : {StageOrder::canonical, StageOrder::reversed}) {
                const auto stages = stages_of(spec, o);
                auto r = mc_moments(step_initial(3), unit_rates(3, opt.q), stages, {stages.size()}, obs9,
                                    mc_opts(opt, o == StageOrder::canonical ? 301 : 302));
                (o == StageOrder::canonical ? e1 : e2) = r[0];
            }
        };
        for (std::size_t o = 0; o < obs9.size(); ++o)
            rec.check("combined MC, two stage orders, n=" + vec_str(obs9[o]) + " (z)", 9, 3.0, [&] {
                ensure();
                const double se = std::hypot(e1[o].stderr_, e2[o].stderr_);
                return Outcome{z_score(e1[o].mean, se, e2[o].mean),
                               "canonical " + num(e1[o].mean) + " reversed " + num(e2[o].mean)};
            });
    }
}

// ---------------------------------------------------------------- fredholm

const std::vector<Complex>& zeta_grid() {
    static const std::vector<Complex> g{-0.3, -1.0, -3.0, -10.0, {-1.0, 1.0}, {-1.0, -1.0}, {-4.0, 2.0}, {-4.0, -2.0}};
    return g;
}

void suite_fredholm(Recorder& rec, const VerifyOptions& opt) {
    const QParam q(opt.q);
    std::map<std::pair<int, int>, std::shared_ptr<CauchyTransform>> transforms;
    std::map<std::pair<int, int>, std::vector<double>> pmfs;
    auto betas = [](int t) { return std::vector<double>(kFredholmBetas.begin(), kFredholmBetas.begin() + t); };
    auto transform = [&](int n, int t) {
        auto& slot = transforms[{n, t}];
        if (!slot) slot = std::make_shared<CauchyTransform>(Protocol::bernoulli(betas(t)), n, q);
        return slot;
    };
    auto pmf = [&](int n, int t) -> const std::vector<double>& {
        auto it = pmfs.find({n, t});
        if (it == pmfs.end()) it = pmfs.emplace(std::make_pair(n, t), bernoulli_exact_pmf(n, betas(t), q)).first;
        return it->second;
    };

    // criterion 5
    for (int n = 1; n <= 4; ++n)
        for (int t = 1; t <= 6; ++t) {
            Complex mb[8], ca[8];
            bool ready = false;
            const std::string label = "n=" + std::to_string(n) + " t=" + std::to_string(t);
            rec.check("MB vs Cauchy determinant, 8 zeta, " + label, 5, 1e-7, [&] {
                const auto ct = transform(n, t);
                const Protocol spec = Protocol::bernoulli(betas(t));
                double worst = 0.0;
                for (int z = 0; z < 8; ++z) {
                    mb[z] = q_laplace_mb({zeta_grid()[z], spec, n, q}).value;
                    ca[z] = ct->transform(zeta_grid()[z]);
                    worst = std::max(worst, std::abs(mb[z] - ca[z]));
                }
                ready = true;
                return Outcome{worst, "Cauchy nodes " + std::to_string(ct->nodes())};
            });
            rec.check("determinants vs direct transform of exact pmf, " + label, 5, 1e-6, [&] {
                if (!ready) throw ConvergenceError("determinants unavailable");
                double worst = 0.0;
                for (int z = 0; z < 8; ++z) {
                    const Complex d = q_laplace_direct(pmf(n, t), zeta_grid()[z], q);
                    worst = std::max({worst, std::abs(mb[z] - d), std::abs(ca[z] - d)});
                }
                return Outcome{worst, ""};
            });
        }

    // criterion 6
    for (int n = 1; n <= 3; ++n)
        for (int t = 1; t <= 4; ++t) {
            const std::string label = "n=" + std::to_string(n) + " t=" + std::to_string(t);
            std::vector<double> rec_pmf;
            rec.check("inverted pmf vs exact pmf, " + label, 6, 1e-6, [&] {
                const auto ct = transform(n, t);
                double worst = 0.0;
                for (int m = 0; m <= t; ++m) {
                    rec_pmf.push_back(invert_q_laplace(*ct, m).probability);
                    worst = std::max(worst, std::abs(rec_pmf[m] - pmf(n, t)[m]));
                }
                return Outcome{worst, ""};
            });
            rec.check("inverted pmf total mass, " + label, 6, 1e-6, [&] {
                if (static_cast<int>(rec_pmf.size()) != t + 1) throw ConvergenceError("inversion unavailable");
                double s = 0.0;
                for (double v : rec_pmf) s += v;
                return Outcome{std::abs(s - 1.0), ""};
            });
            rec.check("inverted pmf vs MC histogram, max bin z, " + label, 6, 3.0, [&] {
                if (static_cast<int>(rec_pmf.size()) != t + 1) throw ConvergenceError("inversion unavailable");
                const auto h = mc_histogram(step_initial(n), unit_rates(n, opt.q), stages_of(Protocol::bernoulli(betas(t))), n,
                                            t, mc_opts(opt, 600 + 10 * n + t));
                double worst = 0.0;
                for (int m = 0; m <= t; ++m) worst = std::max(worst, z_score(h[m].mean, h[m].stderr_, rec_pmf[m]));
                return Outcome{worst, ""};
            });
        }
}

// ---------------------------------------------------------------- duality

void suite_duality(Recorder& rec, const VerifyOptions& opt) {
    struct Case {
        std::vector<std::int64_t> x;
        std::vector<int> y;
        std::vector<Stage> stages;
        std::vector<double> a;
    };
    auto P = [](double t) { return std::vector<Stage>{{Stage::Kind::poisson, t}}; };
    auto G = [](std::vector<double> al) { return stages_of(Protocol::geometric(std::move(al))); };
    const std::vector<Case> cases{
        {{-1}, {0, 1}, P(1.0), {1.0}},
        {{-1, -2}, {0, 1, 1}, P(0.5), {1.0, 1.0}},
        {{2, 0}, {0, 0, 2}, P(1.0), {1.0, 1.0}},
        {{-1, -2, -3}, {0, 1, 0, 2}, P(0.75), {1.0, 1.0, 1.0}},
        {{3, 1, -1}, {0, 2, 1, 0}, P(1.5), {1.0, 1.0, 1.0}},
        {{0, -2, -3}, {0, 0, 1, 1}, P(1.0), {1.0, 0.7, 1.3}},
        {{-1}, {0, 2}, G({0.4, 0.4}), {1.0}},
        {{-1, -2}, {0, 1, 1}, G({0.3, 0.5, 0.2}), {1.0, 1.0}},
        {{2, 0}, {0, 0, 2}, G({0.5}), {1.0, 1.0}},
        {{-1, -2, -3}, {0, 1, 0, 1}, G({0.3, 0.3, 0.3}), {1.0, 1.0, 1.0}},
        {{3, 1, -1}, {0, 1, 1, 1}, G({0.2, 0.6}), {1.0, 1.0, 1.0}},
        {{-1, -2, -3}, {0, 0, 2, 1}, G({0.4, 0.2, 0.3}), {1.0, 0.7, 1.3}},
    };
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& cs = cases[c];
        const bool poisson = cs.stages.front().kind == Stage::Kind::poisson;
        std::string label = std::string(poisson ? "poisson" : "geometric") + " #" + std::to_string(c + 1) + " y0=" +
                            vec_str(cs.y) + (poisson ? " t=" + num(cs.stages.front().value)
                                                     : " steps=" + std::to_string(cs.stages.size()));
        rec.check("duality " + label + " (z)", 7, 4.0, [&] {
            const DualityResult d = duality_check(ParticleState{cs.x}, ZeroRangeState{cs.y}, cs.stages,
                                                  ProcessParams{cs.a, QParam(opt.q)}, mc_opts(opt, 700 + c));
            return Outcome{d.z, "particle side " + num(d.lhs.mean) + " zero-range side " + num(d.rhs.mean)};
        });
    }
}

// ---------------------------------------------------------------- macdonald

void suite_macdonald(Recorder& rec, const VerifyOptions& opt) {
    const QParam q(opt.q);
    const std::vector<std::pair<std::string, ScalarFn>> fns{
        {"exp(x)", [](double v) { return std::exp(v); }},
        {"1/(1-x/5)", [](double v) { return 1.0 / (1.0 - v / 5.0); }},
    };
    for (int n : {2, 3})
        for (int k : {1, 2})
            for (const auto& [fname, f] : fns) {
                const std::vector<double> x = n == 2 ? std::vector<double>{1.0, 0.7} : std::vector<double>{1.0, 0.6, 0.3};
                rec.check("D commutation with p_1, n=" + std::to_string(n) + " k=" + std::to_string(k) + " f=" + fname, 8,
                          1e-9, [&] { return Outcome{std::abs(verify_commutation(n, k, x, f, q)), ""}; });
            }
    for (int N : {1, 2})
        for (int k : {1, 2})
            rec.check("Macdonald moment equality, poisson, N=" + std::to_string(N) + " k=" + std::to_string(k), 8, 1e-8,
                      [&] {
                          const std::vector<double> a = N == 1 ? std::vector<double>{1.0} : std::vector<double>{1.0, 0.7};
                          return Outcome{verify_moment_equality(N, k, 0.7, a, q), "gamma=0.7"};
                      });
}

// ---------------------------------------------------------------- scaling

void suite_scaling(Recorder& rec, const VerifyOptions& opt) {
    const QParam q(opt.q);
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    for (int N : {1, 2})
        for (double tau : {1.0, 2.0}) {
            rec.check("geometric -> poisson, N=" + std::to_string(N) + " n=" + std::to_string(N) + " tau=" + num(tau), 10,
                      2 * eps.back() * tau * (1 - opt.q) * (1 - opt.q), [&] {
                          const std::vector<double> a(N, 1.0);
                          const double target = solve_poisson_true(step_init_data(N, 1), tau, a, q).at_n({N});
                          std::vector<double> errs;
                          for (double e : eps) {
                              const int t = static_cast<int>(std::ceil(tau / e - 1e-9));
                              const Protocol spec = Protocol::geometric((1 - opt.q) * e, t);
                              errs.push_back(std::abs(evolve_true(step_init_data(N, 1), spec, a, q).at_n({N}) - target));
                          }
                          Outcome o;
                          o.residual = errs.back();
                          for (std::size_t i = 0; i < errs.size(); ++i) {
                              o.detail += (i ? ", " : "errors ") + num(errs[i]);
                              if (i && !(errs[i] < errs[i - 1])) o.extra_ok = false;
                          }
                          if (!o.extra_ok) o.detail += " (not monotone)";
                          return o;
                      });
        }

    rec.check("10^6 geometric steps, N=100 (seconds)", 11, 60.0, [&] {
        ProcessParams p = unit_rates(100, opt.q);
        ParticleState s = step_initial(100);
        Rng rng = trajectory_rng(opt.seed, 0);
        const auto t0 = Clock::now();
        for (int i = 0; i < 1000000; ++i) step_geometric(s, 0.3, p, rng);
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        return Outcome{secs, "x_1 = " + std::to_string(s.x[0]) + ", x_100 = " + std::to_string(s.x[99])};
    });
    rec.check("mc_expectation bit-identical for 1, 4 and max workers", 11, 0.0, [&] {
        const Protocol spec = Protocol::geometric({0.3, 0.5, 0.2});
        McOptions m = mc_opts(opt, 1100);
        m.trials = std::min<std::uint64_t>(opt.trials, 200000);
        std::vector<Estimate> es;
        for (int w : {1, 4, resolve_workers(0)}) {
            m.workers = w;
            es.push_back(mc_expectation(spec, {3, 2}, unit_rates(3, opt.q), step_initial(3), m));
        }
        bool same = true;
        for (const auto& e : es)
            same = same && std::memcmp(&e.mean, &es[0].mean, sizeof(double)) == 0 &&
                   std::memcmp(&e.stderr_, &es[0].stderr_, sizeof(double)) == 0;
        return Outcome{same ? 0.0 : 1.0, "max workers = " + std::to_string(resolve_workers(0))};
    });
}

}  // namespace

bool SuiteReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"identities", "truevsmc", "contour", "fredholm",
                                                "duality", "macdonald", "scaling"};
    return names;
}

double z_score(double mean, double stderr_, double exact) {
    const double d = std::abs(mean - exact);
    if (stderr_ == 0.0) return d <= 1e-12 * std::max(1.0, std::abs(exact)) ? 0.0 : kInf;
    return d / stderr_;
}

SuiteReport run_suite(const std::string& suite, const VerifyOptions& opt) {
    static const std::map<std::string, void (*)(Recorder&, const VerifyOptions&)> table{
        {"identities", suite_identities}, {"truevsmc", suite_truevsmc}, {"contour", suite_contour},
        {"fredholm", suite_fredholm},     {"duality", suite_duality},   {"macdonald", suite_macdonald},
        {"scaling", suite_scaling},
    };
    const auto it = table.find(suite);
    if (it == table.end()) throw ParameterError("unknown suite '" + suite + "'");
    (void)QParam(opt.q);
    SuiteReport r;
    r.suite = suite;
    Recorder rec(r);
    const auto t0 = Clock::now();
    it->second(rec, opt);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

std::string to_json(const SuiteReport& r, int indent) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["pass"] = r.pass();
    j["seconds"] = r.seconds;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["criterion"] = c.criterion;
        e["residual"] = std::isfinite(c.residual) ? nlohmann::ordered_json(c.residual) : nlohmann::ordered_json("inf");
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        e["seconds"] = c.seconds;
        if (!c.detail.empty()) e["detail"] = c.detail;
        j["checks"].push_back(std::move(e));
    }
    return j.dump(indent);
}

}  // namespace qtasep
