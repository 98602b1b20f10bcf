#include "qtasep/evolution.hpp"

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

namespace qtasep {

YVec n_to_y(const std::vector<int>& n, int N) {
    if (N < 1) throw ParameterError("n_to_y: N must be positive");
    YVec y(N + 1, 0);
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0 || n[j] > N) throw ParameterError("n_to_y: entry out of range 0..N");
        if (j > 0 && n[j] > n[j - 1]) throw ParameterError("n_to_y: n must be weakly decreasing");
        ++y[n[j]];
    }
    return y;
}

std::vector<int> y_to_n(const YVec& y) {
    std::vector<int> n;
    for (int i = static_cast<int>(y.size()) - 1; i >= 0; --i) {
        if (y[i] < 0) throw ParameterError("y_to_n: negative multiplicity");
        n.insert(n.end(), y[i], i);
    }
    return n;
}

namespace {

void compositions(int sites, int k, YVec& cur, int pos, std::vector<YVec>& out) {
    if (pos == sites - 1) {
        cur[pos] = k;
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= k; ++v) {
        cur[pos] = v;
        compositions(sites, k - v, cur, pos + 1, out);
    }
}

long suffix_key(const YVec& y) {
    long key = 0, suffix = 0;
    for (int i = static_cast<int>(y.size()) - 1; i >= 0; --i) {
        suffix += y[i];
        key += suffix;
    }
    return key;
}

}  // namespace

std::vector<YVec> enumerate_Yk(int N, int k) {
    if (N < 1 || k < 0) throw ParameterError("enumerate_Yk: need N >= 1, k >= 0");
    std::vector<YVec> out;
    YVec cur(N + 1, 0);
    compositions(N + 1, k, cur, 0, out);
    std::vector<std::pair<long, YVec>> keyed;
    keyed.reserve(out.size());
    for (auto& y : out) keyed.emplace_back(suffix_key(y), std::move(y));
    std::sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first < r.first;
        return std::lexicographical_compare(r.second.rbegin(), r.second.rend(), l.second.rbegin(),
                                            l.second.rend());
    });
    out.clear();
    for (auto& [key, y] : keyed) out.push_back(std::move(y));
    return out;
}

YLattice::YLattice(int N, int k) : N_(N), k_(k), elems_(enumerate_Yk(N, k)) {
    for (int idx = 0; idx < size(); ++idx) index_.emplace(elems_[idx], idx);
    move1_.assign(size(), std::vector<int>(N + 1, -1));
    for (int idx = 0; idx < size(); ++idx) {
        for (int i = 1; i <= N; ++i) {
            if (elems_[idx][i] == 0) continue;
            YVec y = elems_[idx];
            --y[i];
            ++y[i - 1];
            move1_[idx][i] = index_.at(y);
        }
    }
}

int YLattice::index_of(const YVec& y) const {
    auto it = index_.find(y);
    if (it == index_.end()) throw ParameterError("multiplicity vector not in Y^N_k");
    return it->second;
}

int YLattice::moved(int idx, int i, int s) const {
    if (i < 1 || i > N_) throw ParameterError("site index out of range 1..N");
    for (int r = 0; r < s; ++r) {
        idx = move1_[idx][i];
        if (idx < 0) throw ParameterError("cannot move more particles than present");
    }
    return idx;
}

std::shared_ptr<const YLattice> lattice(int N, int k) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const YLattice>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{N, k}];
    if (!slot) {
        // C(N+k, k) without overflow for the sizes we accept
        double count = 1.0;
        for (int j = 1; j <= k; ++j) count = count * (N + j) / j;
        if (count > kMaxLatticeSize) {
            cache.erase({N, k});
            throw ParameterError("Y^N_k too large: C(N+k,k) = " + std::to_string(count) + " exceeds " +
                                 std::to_string(kMaxLatticeSize));
        }
        slot = std::make_shared<const YLattice>(N, k);
    }
    return slot;
}

namespace {

void check_site(int i, const ObservableVector& h) {
    if (i < 1 || i > h.N) throw ParameterError("site index out of range 1..N");
    if (static_cast<int>(h.values.size()) != h.lat().size())
        throw ParameterError("observable vector length does not match Y^N_k");
}

std::vector<std::vector<double>> c_rows(double a, int k, QParam q) {
    std::vector<std::vector<double>> rows(k + 1);
    for (int y = 0; y <= k; ++y) rows[y] = coeff_C_row(a, y, q);
    return rows;
}

}  // namespace

ObservableVector apply_L(double a, int i, const ObservableVector& h, QParam q) {
    check_site(i, h);
    const YLattice& lat = h.lat();
    ObservableVector out{h.N, h.k, std::vector<double>(h.values.size(), 0.0)};
    for (int idx = 0; idx < lat.size(); ++idx) {
        const int yi = lat[idx][i];
        if (yi == 0) continue;
        out.values[idx] = a * (1.0 - std::pow(q.value(), yi)) * (h.values[lat.moved(idx, i, 1)] - h.values[idx]);
    }
    return out;
}

ObservableVector apply_A(double a, int i, const ObservableVector& h, QParam q) {
    check_site(i, h);
    const YLattice& lat = h.lat();
    const auto rows = c_rows(a, h.k, q);
    ObservableVector out{h.N, h.k, std::vector<double>(h.values.size(), 0.0)};
    for (int idx = 0; idx < lat.size(); ++idx) {
        const auto& row = rows[lat[idx][i]];
        double acc = 0.0;
        int target = idx;
        for (std::size_t s = 0; s < row.size(); ++s) {
            if (s > 0) target = lat.moved(target, i, 1);
            acc += row[s] * h.values[target];
        }
        out.values[idx] = acc;
    }
    return out;
}

Eigen::MatrixXd L_matrix(double a, int i, const YLattice& lat, QParam q) {
    if (i < 1 || i > lat.N()) throw ParameterError("site index out of range 1..N");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(lat.size(), lat.size());
    for (int idx = 0; idx < lat.size(); ++idx) {
        const int yi = lat[idx][i];
        if (yi == 0) continue;
        const double rate = a * (1.0 - std::pow(q.value(), yi));
        M(idx, lat.moved(idx, i, 1)) += rate;
        M(idx, idx) -= rate;
    }
    return M;
}

Eigen::MatrixXd A_matrix(double a, int i, const YLattice& lat, QParam q) {
    if (i < 1 || i > lat.N()) throw ParameterError("site index out of range 1..N");
    const auto rows = c_rows(a, lat.k(), q);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(lat.size(), lat.size());
    for (int idx = 0; idx < lat.size(); ++idx) {
        const auto& row = rows[lat[idx][i]];
        int target = idx;
        for (std::size_t s = 0; s < row.size(); ++s) {
            if (s > 0) target = lat.moved(target, i, 1);
            M(idx, target) += row[s];
        }
    }
    return M;
}

Eigen::MatrixXd poisson_generator(const std::vector<double>& a, const YLattice& lat, QParam q) {
    if (static_cast<int>(a.size()) < lat.N()) throw ParameterError("rate vector shorter than N");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(lat.size(), lat.size());
    for (int i = 1; i <= lat.N(); ++i) M += L_matrix(a[i - 1], i, lat, q);
    return M;
}

Eigen::MatrixXd geometric_step_matrix(double alpha, const std::vector<double>& a, const YLattice& lat, QParam q) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(lat.size(), lat.size());
    for (int i = 1; i <= lat.N(); ++i) M = M * A_matrix(-a[i - 1] * alpha, i, lat, q);
    return M;
}

Eigen::MatrixXd bernoulli_step_matrix(double beta, const std::vector<double>& a, const YLattice& lat, QParam q) {
    const int d = lat.size();
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(d, d), rhs = lhs;
    for (int i = 1; i <= lat.N(); ++i) {
        lhs = lhs * A_matrix(a[i - 1] * beta, i, lat, q);
        rhs = rhs * A_matrix(q.value() * a[i - 1] * beta, i, lat, q);
    }
    return lhs.triangularView<Eigen::Lower>().solve(rhs);
}

void zero_absorbed(ObservableVector& h) {
    const YLattice& lat = h.lat();
    for (int idx = 0; idx < lat.size(); ++idx)
        if (lat[idx][0] > 0) h.values[idx] = 0.0;
}

namespace {

void check_rates(const std::vector<double>& a, int N) {
    if (static_cast<int>(a.size()) < N) throw ParameterError("rate vector shorter than N");
    for (int i = 0; i < N; ++i)
        if (!(a[i] > 0.0)) throw ParameterError("rate parameters a_i must be positive");
}

}  // namespace

ObservableVector solve_poisson_true(const ObservableVector& h0, double t, const std::vector<double>& a, QParam q) {
    check_rates(a, h0.N);
    if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
    ObservableVector out = h0;
    if (t > 0.0 && h0.k > 0) {
        const YLattice& lat = h0.lat();
        const Eigen::MatrixXd E = (t * poisson_generator(a, lat, q)).exp();
        const Eigen::VectorXd v = E * Eigen::Map<const Eigen::VectorXd>(h0.values.data(), lat.size());
        out.values.assign(v.data(), v.data() + v.size());
    }
    zero_absorbed(out);
    return out;
}

ObservableVector step_geometric_true(const ObservableVector& h, double alpha, const std::vector<double>& a, QParam q) {
    check_rates(a, h.N);
    ObservableVector out = h;
    for (int i = h.N; i >= 1; --i) {
        const double b = a[i - 1] * alpha;
        if (!(b > 0.0 && b < 1.0)) throw ParameterError("geometric step needs 0 < a_i alpha < 1");
        out = apply_A(-b, i, out, q);
    }
    zero_absorbed(out);
    return out;
}

ObservableVector step_bernoulli_true(const ObservableVector& h, double beta, const std::vector<double>& a, QParam q) {
    check_rates(a, h.N);
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    ObservableVector u = h;
    for (int i = h.N; i >= 1; --i) u = apply_A(q.value() * a[i - 1] * beta, i, u, q);
    // Invert A_1 first, A_N last: each is lower triangular, so forward substitution.
    const YLattice& lat = h.lat();
    for (int i = 1; i <= h.N; ++i) {
        const auto rows = c_rows(a[i - 1] * beta, h.k, q);
        for (int idx = 0; idx < lat.size(); ++idx) {
            const auto& row = rows[lat[idx][i]];
            double acc = u.values[idx];
            int target = idx;
            for (std::size_t s = 1; s < row.size(); ++s) {
                target = lat.moved(target, i, 1);
                acc -= row[s] * u.values[target];
            }
            u.values[idx] = acc / row[0];
        }
    }
    zero_absorbed(u);
    return u;
}

ObservableVector evolve_true(const ObservableVector& h0, const Protocol& protocol, const std::vector<double>& a,
                             QParam q, StageOrder order) {
    ObservableVector h = h0;
    for (const Stage& st : stages_of(protocol, order)) {
        switch (st.kind) {
            case Stage::Kind::poisson: h = solve_poisson_true(h, st.value, a, q); break;
            case Stage::Kind::geometric: h = step_geometric_true(h, st.value, a, q); break;
            case Stage::Kind::bernoulli: h = step_bernoulli_true(h, st.value, a, q); break;
        }
    }
    return h;
}

ObservableVector step_init_data(int N, int k) {
    const YLattice& lat = *lattice(N, k);
    ObservableVector h{N, k, std::vector<double>(lat.size(), 1.0)};
    zero_absorbed(h);
    return h;
}

ObservableVector initial_data(const ParticleState& x, int k, QParam q) {
    x.validate();
    const int N = x.size();
    const YLattice& lat = *lattice(N, k);
    ObservableVector h{N, k, std::vector<double>(lat.size(), 0.0)};
    for (int idx = 0; idx < lat.size(); ++idx) {
        const YVec& y = lat[idx];
        if (y[0] > 0) continue;
        double e = 0.0;
        for (int i = 1; i <= N; ++i) e += double(x.x[i - 1] + i) * y[i];
        h.values[idx] = std::pow(q.value(), e);
    }
    return h;
}

std::string to_json(const ObservableVector& h) {
    nlohmann::json j;
    j["N"] = h.N;
    j["k"] = h.k;
    j["order"] = kOrderTag;
    j["values"] = h.values;
    return j.dump();
}

ObservableVector observable_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("order").get<std::string>() != kOrderTag)
        throw ParameterError("unsupported observable order tag '" + j.at("order").get<std::string>() + "'");
    ObservableVector h{j.at("N").get<int>(), j.at("k").get<int>(), j.at("values").get<std::vector<double>>()};
    if (static_cast<int>(h.values.size()) != h.lat().size())
        throw ParameterError("observable vector length does not match Y^N_k");
    return h;
}

}  // namespace qtasep
