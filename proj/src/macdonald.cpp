#include "qtasep/macdonald.hpp"

#include "qtasep/evolution.hpp"
#include "qtasep/moments.hpp"

#include <cmath>
#include <map>
#include <string>

namespace qtasep {

namespace {

struct Coincident {};

class WordEvaluator {
public:
    WordEvaluator(const std::vector<MacOp>& word, const ScalarFn& f, const std::vector<double>& x, QParam q)
        : word_(word), f_(f), x0_(x), q_(q.value()) {
        const int n = static_cast<int>(x.size());
        for (const MacOp& op : word) {
            if (op.index < 1 || op.index > n) throw ParameterError("operator index out of range 1.." + std::to_string(n));
        }
        for (int i = 0; i < n; ++i) {
            if (x[i] == 0.0) throw ParameterError("difference operators need nonzero x entries");
            for (int j = 0; j < i; ++j)
                if (x[i] == x[j]) throw ParameterError("difference operators need distinct x entries");
        }
    }

    double value() {
        std::vector<int> shifts(x0_.size(), 0);
        return eval(0, shifts);
    }

private:
    double point(const std::vector<int>& e, int i) const { return x0_[i] * std::pow(q_, e[i]); }

    double eval(std::size_t depth, std::vector<int>& e) {
        if (depth == word_.size()) {
            double v = 1.0;
            for (std::size_t i = 0; i < e.size(); ++i) v *= f_(point(e, i));
            return v;
        }
        auto key = std::make_pair(depth, e);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (memo_.size() >= kMacdonaldTreeCap) throw ParameterError("difference-operator evaluation tree exceeds cap");
        const MacOp& op = word_[depth];
        double v = 0.0;
        switch (op.kind) {
            case MacOp::Kind::power_sum: {
                double p = 0.0;
                for (int i = 0; i < op.index; ++i) p += point(e, i);
                v = p * eval(depth + 1, e);
                break;
            }
            case MacOp::Kind::coordinate:
                v = point(e, op.index - 1) * eval(depth + 1, e);
                break;
            case MacOp::Kind::D:
                for (int i = 0; i < op.index; ++i) {
                    const double xi = point(e, i);
                    double coef = 1.0;
                    for (int j = 0; j < op.index; ++j) {
                        if (j == i) continue;
                        const double xj = point(e, j);
                        if (std::abs(xi - xj) <= 1e-12 * std::max(std::abs(xi), std::abs(xj))) throw Coincident{};
                        coef *= -xj / (xi - xj);
                    }
                    ++e[i];
                    v += coef * eval(depth + 1, e);
                    --e[i];
                }
                break;
        }
        memo_.emplace(std::move(key), v);
        return v;
    }

    const std::vector<MacOp>& word_;
    const ScalarFn& f_;
    std::vector<double> x0_;
    double q_;
    std::map<std::pair<std::size_t, std::vector<int>>, double> memo_;
};

std::vector<MacOp> repeat(MacOp op, int times) { return std::vector<MacOp>(std::max(times, 0), op); }

std::vector<MacOp> concat(std::initializer_list<std::vector<MacOp>> parts) {
    std::vector<MacOp> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace

double apply_difference_word(const std::vector<MacOp>& word, const ScalarFn& f, const std::vector<double>& x,
                             QParam q) {
    try {
        return WordEvaluator(word, f, x, q).value();
    } catch (const Coincident&) {
    }
    // Some q-shifted points coincide. The value is analytic in x there, so take the limit
    // from symmetric perturbations along a generic direction with Richardson extrapolation.
    const double h = 2e-3;
    auto pair_mean = [&](double d) {
        std::vector<double> up = x, down = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = x[i] * std::sqrt(2.0 + 1.7 * static_cast<double>(i));
            up[i] += d * u;
            down[i] -= d * u;
        }
        return 0.5 * (WordEvaluator(word, f, up, q).value() + WordEvaluator(word, f, down, q).value());
    };
    try {
        return (4.0 * pair_mean(h) - pair_mean(2.0 * h)) / 3.0;
    } catch (const Coincident&) {
        throw ParameterError("difference operators hit coincident shifted points");
    }
}

double macdonald_apply_D(int n, int power, const ScalarFn& f, const std::vector<double>& x, QParam q) {
    if (n < 1 || n > static_cast<int>(x.size())) throw ParameterError("macdonald_apply_D: n out of range");
    if (power < 0) throw ParameterError("macdonald_apply_D: negative power");
    return apply_difference_word(repeat(MacOp::D(n), power), f, x, q);
}

double verify_commutation(int n, int k, const std::vector<double>& x, const ScalarFn& f, QParam q) {
    if (n < 2) throw ParameterError("verify_commutation: D_{n-1} requires n >= 2");
    if (k < 1) throw ParameterError("verify_commutation: k must be >= 1");
    if (n > static_cast<int>(x.size())) throw ParameterError("verify_commutation: n exceeds the number of variables");
    const auto Dn = [&](int p) { return repeat(MacOp::D(n), p); };
    const double lhs = apply_difference_word(concat({Dn(k), {MacOp::p1(n)}}), f, x, q) -
                       apply_difference_word(concat({{MacOp::p1(n)}, Dn(k)}), f, x, q);
    const double rhs =
        (1.0 - std::pow(q.value(), k)) *
        (apply_difference_word(concat({{MacOp::x(n), MacOp::D(n - 1)}, Dn(k - 1)}), f, x, q) -
         apply_difference_word(concat({{MacOp::x(n)}, Dn(k)}), f, x, q));
    return std::abs(lhs - rhs);
}

double macdonald_moment(const std::vector<int>& y, double gamma, const std::vector<double>& a, QParam q) {
    const int N = static_cast<int>(y.size()) - 1;
    if (N < 1 || static_cast<int>(a.size()) < N) throw ParameterError("macdonald_moment: size mismatch");
    if (y[0] != 0) return 0.0;
    std::vector<MacOp> word;
    for (int i = 1; i <= N; ++i) {
        const auto part = repeat(MacOp::D(i), y[i]);
        word.insert(word.end(), part.begin(), part.end());
    }
    const std::vector<double> x(a.begin(), a.begin() + N);
    const ScalarFn f = [gamma](double v) { return std::exp(gamma * v); };
    const double Pi = apply_difference_word({}, f, x, q);
    return apply_difference_word(word, f, x, q) / Pi;
}

double verify_moment_equality(int N, int k, double gamma, const std::vector<double>& a, QParam q) {
    double worst = 0.0;
    const Protocol spec = Protocol::poisson(gamma);
    const std::vector<double> rates(a.begin(), a.begin() + N);
    for (const YVec& y : enumerate_Yk(N, k)) {
        if (y[0] != 0) continue;
        const double lhs = macdonald_moment(y, gamma, rates, q);
        const double rhs = k == 0 ? 1.0 : nested_moment(spec, y_to_n(y), rates, q).value;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace qtasep
