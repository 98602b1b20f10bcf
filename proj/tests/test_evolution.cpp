#include <doctest.h>

#include "qtasep/evolution.hpp"
#include "qtasep/moments.hpp"

#include <cmath>

using namespace qtasep;

namespace {
long binom(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void sorted_vectors(int N, int k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    int top = cur.empty() ? N : cur.back();
    for (int v = top; v >= 0; --v) {
        cur.push_back(v);
        sorted_vectors(N, k, cur, out);
        cur.pop_back();
    }
}

// y' <= y when every suffix sum of y' is at most that of y
bool below(const YVec& a, const YVec& b) {
    int sa = 0, sb = 0;
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
        sa += a[i];
        sb += b[i];
        if (sa > sb) return false;
    }
    return true;
}
}  // namespace

TEST_CASE("n <-> y bijection") {
    CHECK(n_to_y({4, 4, 2, 1}, 4) == YVec{0, 1, 1, 0, 2});
    CHECK(n_to_y({}, 3) == YVec{0, 0, 0, 0});
    for (int N = 1; N <= 4; ++N)
        for (int k = 0; k <= 4; ++k) {
            std::vector<std::vector<int>> all;
            std::vector<int> cur;
            sorted_vectors(N, k, cur, all);
            CHECK(static_cast<long>(all.size()) == binom(N + k, k));
            for (auto& n : all) CHECK(y_to_n(n_to_y(n, N)) == n);
        }
}

TEST_CASE("lattice order") {
    YLattice l11(1, 1);
    REQUIRE(l11.size() == 2);
    CHECK(l11[0] == YVec{1, 0});
    CHECK(l11[1] == YVec{0, 1});
    CHECK(YLattice(2, 2).size() == 6);
    for (int N = 1; N <= 4; ++N)
        for (int k = 0; k <= 4; ++k) {
            YLattice lat(N, k);
            CHECK(lat.size() == binom(N + k, k));
            for (int i = 0; i < lat.size(); ++i)
                for (int j = i + 1; j < lat.size(); ++j)
                    CHECK_FALSE((below(lat[j], lat[i]) && lat[j] != lat[i]));
        }
}

TEST_CASE("operators are lower triangular") {
    QParam q(0.5);
    for (int N = 1; N <= 4; ++N)
        for (int k = 1; k <= 4; ++k) {
            YLattice lat(N, k);
            for (int i = 1; i <= N; ++i) {
                auto L = L_matrix(1.3, i, lat, q);
                auto A = A_matrix(-0.4, i, lat, q);
                CHECK(L.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
                CHECK(A.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
            }
        }
}

TEST_CASE("apply_L and apply_A actions") {
    QParam q(0.5);
    auto lat = lattice(3, 2);
    ObservableVector h{3, 2, std::vector<double>(lat->size())};
    for (int i = 0; i < lat->size(); ++i) h.values[i] = 0.1 * (i + 1) * (i % 3 + 1);

    auto L = apply_L(0.8, 2, h, q);
    auto A = apply_A(0.8, 2, h, q);
    for (int idx = 0; idx < lat->size(); ++idx) {
        const auto& y = (*lat)[idx];
        if (y[2] == 0) {
            CHECK(L.values[idx] == 0.0);
            CHECK(A.values[idx] == doctest::Approx(h.values[idx]));
        } else if (y[2] == 1) {
            YVec m = y;
            --m[2];
            ++m[1];
            double moved = h.at(m);
            CHECK(A.values[idx] == doctest::Approx(1.8 * h.values[idx] - 0.8 * moved));
            CHECK(L.values[idx] == doctest::Approx(0.8 * 0.5 * (moved - h.values[idx])));
        }
    }

    // f vanishing on y_0 > 0: A_1 acts diagonally
    auto f = h;
    zero_absorbed(f);
    auto A1 = apply_A(0.8, 1, f, q);
    for (int idx = 0; idx < lat->size(); ++idx) {
        const auto& y = (*lat)[idx];
        if (y[0] == 0) CHECK(A1.values[idx] == doctest::Approx(coeff_C(0.8, y[1], 0, q) * f.values[idx]));
    }
}

TEST_CASE("step initial data vector") {
    auto h = step_init_data(1, 1);
    CHECK(h.at(YVec{1, 0}) == 0.0);
    CHECK(h.at(YVec{0, 1}) == 1.0);
    auto h2 = step_init_data(3, 2);
    double sum = 0;
    for (double v : h2.values) sum += v;
    CHECK(sum == doctest::Approx(static_cast<double>(binom(3 + 2 - 1, 2))));
    auto same = solve_poisson_true(h2, 0.0, {1, 1, 1}, QParam(0.5));
    CHECK(same.values == h2.values);
}

TEST_CASE("single-particle true evolution") {
    QParam q(0.5);
    auto h = step_init_data(1, 1);
    CHECK(solve_poisson_true(h, 0.9, {1.3}, q).at_n({1}) == doctest::Approx(std::exp(-1.3 * 0.5 * 0.9)).epsilon(1e-13));
    CHECK(step_geometric_true(h, 0.3, {1.3}, q).at_n({1}) == doctest::Approx(1 - 1.3 * 0.3).epsilon(1e-14));
    CHECK(step_bernoulli_true(h, 0.7, {1.3}, q).at_n({1}) ==
          doctest::Approx((1 + 0.5 * 1.3 * 0.7) / (1 + 1.3 * 0.7)).epsilon(1e-14));
    auto h0 = step_init_data(2, 0);
    CHECK(step_geometric_true(h0, 0.3, {1, 1}, q).values == h0.values);
    CHECK(step_bernoulli_true(h0, 0.3, {1, 1}, q).values == h0.values);
}

TEST_CASE("Poisson semigroup") {
    QParam q(0.4);
    std::vector<double> a{1.0, 0.7, 1.2};
    auto h = step_init_data(3, 3);
    auto once = solve_poisson_true(h, 0.9, a, q);
    auto twice = solve_poisson_true(solve_poisson_true(h, 0.4, a, q), 0.5, a, q);
    for (std::size_t i = 0; i < once.values.size(); ++i) CHECK(std::abs(once.values[i] - twice.values[i]) < 1e-11);
}

TEST_CASE("true evolution matches the contour formula") {
    QParam q(0.5);
    std::vector<double> a{1, 1};
    auto h = step_init_data(2, 2);
    for (const auto& spec : {Protocol::poisson(0.3), Protocol::geometric(0.3, 3), Protocol::bernoulli(0.8, 2)}) {
        auto ev = evolve_true(h, spec, a, q);
        for (const auto& n : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {2, 2}}) {
            auto m = nested_moment(spec, n, a, q);
            CHECK(std::abs(ev.at_n(n) - m.value) < 1e-8);
        }
    }
}

TEST_CASE("observable JSON round trip") {
    auto h = solve_poisson_true(step_init_data(2, 3), 0.7, {1, 0.5}, QParam(0.5));
    auto text = to_json(h);
    CHECK(text.find(kOrderTag) != std::string::npos);
    auto back = observable_from_json(text);
    CHECK(back.N == 2);
    CHECK(back.k == 3);
    CHECK(back.values == h.values);
}
