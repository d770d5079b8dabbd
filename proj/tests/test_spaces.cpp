#include <twistlab/rng.hpp>
#include <twistlab/spaces.hpp>

#include <doctest.h>

#include <cmath>

using namespace twistlab;

namespace {

Vec make_vec(std::initializer_list<double> vals) {
    Vec v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

} // namespace

TEST_SUITE("spaces") {

    TEST_CASE("p-norm evaluation on known points") {
        CHECK(NormedSpace::l2(2).norm(make_vec({3, 4})) == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(NormedSpace::l1(3).norm(make_vec({1, -2, 0})) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(NormedSpace::linf(3).norm(make_vec({1, -2, 0})) == doctest::Approx(2.0).epsilon(1e-14));

        // weighted l2 with weights (4, 1) at (1, 1): direct arithmetic oracle
        Vec w = make_vec({4, 1});
        double expected = std::sqrt(4.0 * 1.0 + 1.0 * 1.0);
        CHECK(NormedSpace::weighted_lp(2.0, w).norm(make_vec({1, 1})) ==
              doctest::Approx(expected).epsilon(1e-14));
    }

    TEST_CASE("norm axioms hold on random pairs for every norm kind") {
        std::vector<NormedSpace> spaces = {
            NormedSpace::l1(4), NormedSpace::l2(4), NormedSpace::lp(4, 3.5), NormedSpace::linf(4),
            NormedSpace::weighted_lp(2.5, make_vec({1, 2, 0.5, 3}))};
        for (const auto& s : spaces) {
            CHECK(s.norm(Vec::Zero(4)) == 0.0);
            Rng rng(42);
            for (int i = 0; i < 10000; ++i) {
                Vec u(4), v(4);
                for (int k = 0; k < 4; ++k) {
                    u[k] = rng.uniform(-3, 3);
                    v[k] = rng.uniform(-3, 3);
                }
                double lam = rng.uniform(-2, 2);
                CHECK(s.norm(lam * u) <= std::abs(lam) * s.norm(u) + 1e-12);
                CHECK(s.norm(lam * u) >= std::abs(lam) * s.norm(u) - 1e-12);
                CHECK(s.norm(u + v) <= s.norm(u) + s.norm(v) + 1e-12);
                if (u.lpNorm<Eigen::Infinity>() > 0) CHECK(s.norm(u) > 0.0);
            }
        }
    }

    TEST_CASE("p = 2 agrees with the Euclidean formula") {
        Rng rng(7);
        NormedSpace s = NormedSpace::l2(5);
        for (int i = 0; i < 1000; ++i) {
            Vec v(5);
            for (int k = 0; k < 5; ++k) v[k] = rng.uniform(-10, 10);
            CHECK(s.norm(v) == doctest::Approx(std::sqrt(v.squaredNorm())).epsilon(1e-12));
        }
    }

    TEST_CASE("sphere samples are unit and reproducible") {
        NormedSpace s = NormedSpace::l2(2);
        auto one = sample_sphere(s, 1, 0);
        CHECK(one.size() == 1);
        CHECK(std::abs(s.norm(one[0]) - 1.0) <= 1e-12);

        auto a = sample_sphere(s, 100, 7);
        auto b = sample_sphere(s, 100, 7);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

        // later samples are a superset of earlier ones for the same seed
        auto prefix = sample_sphere(s, 10, 7);
        for (size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i] == a[i]);

        NormedSpace si = NormedSpace::linf(3);
        for (const auto& v : sample_sphere(si, 50, 1)) {
            CHECK(std::abs(si.norm(v) - 1.0) <= 1e-12);
            CHECK(std::abs(v.lpNorm<Eigen::Infinity>() - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("zero-sum configs") {
        NormedSpace s2 = NormedSpace::l2(2);

        // n = 2 forces the antipodal pair
        ZeroSumConfig pair = random_zero_sum_config(s2, 2, 5);
        REQUIRE(pair.points.size() == 2);
        CHECK((pair.points[0] + pair.points[1]).lpNorm<Eigen::Infinity>() == 0.0);

        ZeroSumConfig cfg = random_zero_sum_config(NormedSpace::l2(3), 5, 3);
        REQUIRE(cfg.points.size() == 5);
        Vec sum = Vec::Zero(3);
        for (const auto& x : cfg.points) sum += x;
        CHECK(sum.lpNorm<Eigen::Infinity>() <= 1e-12);
        validate_zero_sum(cfg);

        ZeroSumConfig c1 = random_zero_sum_config(s2, 3, 9);
        ZeroSumConfig c2 = random_zero_sum_config(s2, 3, 9);
        REQUIRE(c1.points.size() == c2.points.size());
        for (size_t i = 0; i < c1.points.size(); ++i) CHECK(c1.points[i] == c2.points[i]);

        CHECK_THROWS_AS(random_zero_sum_config(s2, 1, 0), Error);
        ZeroSumConfig bad{s2, {make_vec({1, 0}), make_vec({0, 1})}};
        CHECK_THROWS_AS(validate_zero_sum(bad), Error);
    }

    TEST_CASE("space and vector JSON round trips") {
        std::vector<NormedSpace> spaces = {NormedSpace::l2(3), NormedSpace::lp(2, 4.0),
                                           NormedSpace::linf(5),
                                           NormedSpace::weighted_lp(3.0, make_vec({1, 2}))};
        for (const auto& s : spaces) {
            NormedSpace back = NormedSpace::from_json(s.to_json());
            CHECK(back.same_as(s));
        }
        Vec v = make_vec({1.5, -2.25, 1e-17});
        CHECK(vec_from_json(vec_to_json(v)) == v);

        CHECK_THROWS_AS(NormedSpace::from_json("{\"dim\": 2, \"norm\": \"l7\"}"), Error);
        CHECK_THROWS_AS(NormedSpace::lp(0, 2.0), Error);
        CHECK_THROWS_AS(NormedSpace::lp(2, 0.5), Error);
        CHECK_THROWS_AS(NormedSpace::weighted_lp(2.0, make_vec({1, -1})), Error);
    }

    TEST_CASE("composite norms evaluate structurally") {
        NormedSpace a = NormedSpace::l2(2), b = NormedSpace::l1(2);
        NormedSpace sum = NormedSpace::direct_sum(a, b);
        Vec v = make_vec({3, 4, 1, -2});
        CHECK(sum.norm(v) == doctest::Approx(5.0 + 3.0).epsilon(1e-14));

        // embedded copy of the x-axis inside l2(2)
        Mat basis(2, 1);
        basis << 1, 0;
        NormedSpace line = NormedSpace::embedded(a, basis);
        CHECK(line.norm(make_vec({-2})) == doctest::Approx(2.0).epsilon(1e-14));

        // quotient of l2(2) by the diagonal: distance from the anti-diagonal
        Mat kernel(2, 1);
        kernel << 1, 1;
        Mat rep(2, 1);
        rep << 1, 0;
        NormedSpace quo = NormedSpace::quotient(a, rep, kernel);
        // min_t |(1,0) + t(1,1)| = 1/sqrt(2)
        CHECK(quo.norm(make_vec({1})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    }
}
