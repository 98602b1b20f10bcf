#include "qtasep/qcalc.hpp"

#include <cmath>
#include <iostream>
#include <string>

namespace qtasep {

QParam::QParam(double q) : q_(q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw ParameterError("q must lie strictly inside (0,1), got " + std::to_string(q));
    }
}

namespace {

template <class T>
T pochhammer_finite(T a, double q, int n) {
    if (n < 0) throw ParameterError("q_pochhammer: negative length");
    T prod(1.0);
    T term = a;
    for (int i = 0; i < n; ++i) {
        prod *= T(1.0) - term;
        term *= q;
    }
    return prod;
}

template <class T>
T pochhammer_infinite(T a, double q, double tol) {
    if (!(tol > 0.0)) throw ParameterError("q_pochhammer_inf: tol must be positive");
    constexpr int kMaxIter = 1000000;
    const double threshold = tol * (1.0 - q);
    T prod(1.0);
    T term = a;
    for (int i = 0; i < kMaxIter; ++i) {
        if (std::abs(term) < threshold) return prod;
        prod *= T(1.0) - term;
        term *= q;
    }
    throw ConvergenceError("q_pochhammer_inf: factors did not decay below threshold");
}

}  // namespace

double q_pochhammer(double a, QParam q, int n) { return pochhammer_finite(a, q.value(), n); }
Complex q_pochhammer(Complex a, QParam q, int n) { return pochhammer_finite(a, q.value(), n); }

double q_pochhammer_inf(double a, QParam q, double tol) {
    return pochhammer_infinite(a, q.value(), tol);
}
Complex q_pochhammer_inf(Complex a, QParam q, double tol) {
    return pochhammer_infinite(a, q.value(), tol);
}

double q_binomial(int m, int j, QParam q) {
    if (j < 0 || j > m || m < 0) return 0.0;
    // Product form avoids forming (q;q)_m for large m.
    const int r = std::min(j, m - j);
    double value = 1.0;
    for (int i = 1; i <= r; ++i) {
        value *= (1.0 - std::pow(q.value(), m - r + i)) / (1.0 - std::pow(q.value(), i));
    }
    return value;
}

double elementary_sym_q(int r, int y, QParam q) {
    if (r < 0 || r > y) return 0.0;
    return std::pow(q.value(), 0.5 * r * (r - 1)) * q_binomial(y, r, q);
}

double coeff_C(double a, int y, int s, QParam q) {
    if (s < 0 || s > y) return 0.0;
    return std::pow(-a, s) * q_pochhammer(-a, q, y - s) * q_binomial(y, s, q);
}

std::vector<double> coeff_C_row(double a, int y, QParam q) {
    if (y < 0) return {};
    std::vector<double> poch(y + 1), qq(y + 1), pw(y + 1);
    poch[0] = qq[0] = pw[0] = 1.0;
    double qi = 1.0;  // q^{j-1}
    for (int j = 1; j <= y; ++j) {
        poch[j] = poch[j - 1] * (1.0 + a * qi);
        qi *= q.value();
        qq[j] = qq[j - 1] * (1.0 - qi);
        pw[j] = pw[j - 1] * (-a);
    }
    std::vector<double> row(y + 1);
    for (int s = 0; s <= y; ++s) {
        row[s] = pw[s] * poch[y - s] * qq[y] / (qq[y - s] * qq[s]);
    }
    return row;
}

namespace {

void finish_distribution(JumpDistribution& d) {
    double sum = 0.0;
    for (double p : d.pmf) sum += p;
    d.raw_sum = sum;
    if (std::abs(sum - 1.0) > 1e-12 + d.tail_bound) {
        d.renormalized = true;
        std::clog << "qtasep: jump_pmf raw sum deviates from 1 by " << (sum - 1.0)
                  << "; renormalizing\n";
        for (double& p : d.pmf) p /= sum;
    }
    d.cdf.resize(d.pmf.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < d.pmf.size(); ++j) {
        acc += d.pmf[j];
        d.cdf[j] = acc;
    }
}

}  // namespace

JumpDistribution jump_pmf(std::optional<int> m, double alpha, QParam q) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ParameterError("jump_pmf: alpha must lie in (0,1), got " + std::to_string(alpha));
    }
    const double qv = q.value();
    JumpDistribution d;
    d.m = m;
    d.alpha = alpha;
    if (m) {
        if (*m < 0) throw ParameterError("jump_pmf: negative gap");
        const int mm = *m;
        d.pmf.resize(mm + 1);
        double p = q_pochhammer(alpha, q, mm);
        d.pmf[0] = p;
        for (int j = 0; j < mm; ++j) {
            const double ratio = alpha * (1.0 - std::pow(qv, mm - j)) /
                                 ((1.0 - alpha * std::pow(qv, mm - j - 1)) *
                                  (1.0 - std::pow(qv, j + 1)));
            p *= ratio;
            d.pmf[j + 1] = p;
        }
    } else {
        double p = q_pochhammer_inf(alpha, q);
        d.pmf.push_back(p);
        double qj = qv;  // q^{j+1}
        for (int j = 0;; ++j) {
            const double ratio = alpha / (1.0 - qj);
            if (ratio < 1.0) {
                const double bound = p * ratio / (1.0 - ratio);
                if (bound < kTailThreshold) {
                    d.tail_bound = bound;
                    break;
                }
            }
            p *= ratio;
            d.pmf.push_back(p);
            qj *= qv;
        }
    }
    finish_distribution(d);
    return d;
}

int jump_sample_u(const JumpDistribution& dist, double u) {
    const auto& cdf = dist.cdf;
    // linear scan for small supports
    const int n = static_cast<int>(cdf.size());
    for (int j = 0; j < n; ++j) {
        if (u < cdf[j]) return j;
    }
    return n - 1;
}

JumpSampler::JumpSampler(double alpha, QParam q, int table_cap) : alpha_(alpha), q_(q) {
    finite_.reserve(table_cap + 1);
    for (int m = 0; m <= table_cap; ++m) finite_.push_back(jump_pmf(m, alpha, q));
    infinite_ = jump_pmf(std::nullopt, alpha, q);
}

int JumpSampler::sample(std::optional<int> m, double u) const {
    if (!m) return jump_sample_u(infinite_, u);
    if (*m < static_cast<int>(finite_.size())) return jump_sample_u(finite_[*m], u);
    return sample_large(*m, u);
}

int JumpSampler::sample_large(int m, double u) const {
    const double qv = q_.value();
    const int cap = static_cast<int>(finite_.size()) - 1;
    double p = finite_.back().pmf.front();  // (alpha;q)_cap
    double term = alpha_ * std::pow(qv, cap);
    for (int i = cap; i < m && term > 1e-18; ++i) {
        p *= 1.0 - term;
        term *= qv;
    }
    double cdf = p;
    int j = 0;
    while (u >= cdf && j < m) {
        p *= alpha_ * (1.0 - std::pow(qv, m - j)) /
             ((1.0 - alpha_ * std::pow(qv, m - j - 1)) * (1.0 - std::pow(qv, j + 1)));
        ++j;
        cdf += p;
    }
    return j;
}

}  // namespace qtasep
