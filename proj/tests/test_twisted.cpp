#include <twistlab/extops.hpp>
#include <twistlab/rng.hpp>
#include <twistlab/twisted.hpp>

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

Vec kp_oracle(const Vec& y) {
    double s = std::sqrt(y.squaredNorm());
    Vec out = Vec::Zero(y.size());
    if (s == 0) return out;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0) out[i] = y[i] * std::log(s / std::abs(y[i]));
    return out;
}

TwistedSpace make_kp_space() {
    NormedSpace l22 = NormedSpace::l2(2);
    return TwistedSpace(l22, l22, FactorSystem::rho(HomMap::kalton_peck(l22)));
}

TwistedSpace make_zero_space() {
    NormedSpace l22 = NormedSpace::l2(2);
    return TwistedSpace(l22, l22, FactorSystem::rho(HomMap::zero(l22, l22)));
}

TwistedPair random_pair(const TwistedSpace& T, Rng& rng) {
    TwistedPair z{Vec(T.e_space().dim()), Vec(T.f_space().dim())};
    for (Eigen::Index i = 0; i < z.x.size(); ++i) z.x[i] = rng.uniform(-2, 2);
    for (Eigen::Index i = 0; i < z.y.size(); ++i) z.y[i] = rng.uniform(-2, 2);
    return z;
}

double pair_gap(const TwistedSpace& T, const TwistedPair& a, const TwistedPair& b) {
    return T.e_space().norm(a.x - b.x) + T.f_space().norm(a.y - b.y);
}

} // namespace

TEST_SUITE("twisted") {

    TEST_CASE("twisted addition with zero factor system is componentwise") {
        TwistedSpace T = make_zero_space();
        CHECK(T.c_lower_estimate() == 0.0);
        Rng rng(1);
        for (int i = 0; i < 200; ++i) {
            TwistedPair a = random_pair(T, rng), b = random_pair(T, rng);
            TwistedPair s = T.add(a, b);
            CHECK((s.x - (a.x + b.x)).lpNorm<Eigen::Infinity>() == 0.0);
            CHECK((s.y - (a.y + b.y)).lpNorm<Eigen::Infinity>() == 0.0);
        }
    }

    TEST_CASE("(x,0) + (0,y) = (x,y) for any factor system") {
        TwistedSpace T = make_kp_space();
        Rng rng(2);
        for (int i = 0; i < 200; ++i) {
            TwistedPair a{make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)}), Vec::Zero(2)};
            TwistedPair b{Vec::Zero(2), make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)})};
            TwistedPair s = T.add(a, b);
            CHECK((s.x - a.x).lpNorm<Eigen::Infinity>() <= 1e-15);
            CHECK((s.y - b.y).lpNorm<Eigen::Infinity>() == 0.0);
        }
    }

    TEST_CASE("kp example of the twisted sum") {
        TwistedSpace T = make_kp_space();
        TwistedPair a{Vec::Zero(2), make_vec({1, 0})};
        TwistedPair b{Vec::Zero(2), make_vec({0, 1})};
        TwistedPair s = T.add(a, b);
        // -(kp((1,1)) - kp((1,0)) - kp((0,1))) = (-ln sqrt 2, -ln sqrt 2)
        Vec expect_x = -(kp_oracle(make_vec({1, 1})) - kp_oracle(make_vec({1, 0})) -
                         kp_oracle(make_vec({0, 1})));
        CHECK((s.x - expect_x).lpNorm<Eigen::Infinity>() <= 1e-14);
        CHECK(s.y == make_vec({1, 1}));
        CHECK(s.x[0] == doctest::Approx(-std::log(std::sqrt(2.0))).epsilon(1e-12));
    }

    TEST_CASE("vector space axioms of the twisted addition") {
        TwistedSpace T = make_kp_space();
        Rng rng(3);
        for (int i = 0; i < 10000; ++i) {
            TwistedPair a = random_pair(T, rng), b = random_pair(T, rng), c = random_pair(T, rng);
            double lam = rng.uniform(-2, 2);

            CHECK(pair_gap(T, T.add(a, b), T.add(b, a)) <= 1e-9);
            CHECK(pair_gap(T, T.add(T.add(a, b), c), T.add(a, T.add(b, c))) <= 1e-9);
            TwistedPair z = T.add(a, T.neg(a));
            CHECK(T.e_space().norm(z.x) <= 1e-9);
            CHECK(T.f_space().norm(z.y) == 0.0);
            CHECK(pair_gap(T, T.scale(lam, T.add(a, b)), T.add(T.scale(lam, a), T.scale(lam, b))) <=
                  1e-9);
        }
    }

    TEST_CASE("norm bounds collapse for the zero factor system") {
        TwistedSpace T = make_zero_space();
        Rng rng(4);
        for (int i = 0; i < 300; ++i) {
            TwistedPair z = random_pair(T, rng);
            NormBounds b = twisted_norm_bounds(T, z, 1);
            double expect = T.e_space().norm(z.x) + T.f_space().norm(z.y);
            CHECK(std::abs(b.upper - expect) <= 1e-9);
            CHECK(std::abs(b.lower - expect) <= 1e-9);
            CHECK_FALSE(b.lower_uses_estimate);
        }
    }

    TEST_CASE("2d gauge oracle for the split twisted sum") {
        // E = F = l2(1): conv(S_E u S_F) is the cross polytope, gauge |x| + |y|.
        NormedSpace l21 = NormedSpace::l2(1);
        TwistedSpace T(l21, l21, FactorSystem::rho(HomMap::zero(l21, l21)));
        Rng rng(5);
        for (int i = 0; i < 300; ++i) {
            double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
            NormBounds b = twisted_norm_bounds(T, TwistedPair{make_vec({x}), make_vec({y})}, 1);
            double gauge = std::abs(x) + std::abs(y);
            CHECK(std::abs(b.upper - gauge) <= 1e-12);
            CHECK(std::abs(b.lower - gauge) <= 1e-12);
        }
    }

    TEST_CASE("one-sided bounds certified by the construction") {
        TwistedSpace T = make_kp_space();
        Rng rng(6);
        for (int i = 0; i < 200; ++i) {
            Vec x = make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
            Vec y = make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});

            NormBounds bx = twisted_norm_bounds(T, TwistedPair{x, Vec::Zero(2)}, 2);
            CHECK(bx.upper <= T.e_space().norm(x) + 1e-9);
            CHECK(bx.lower <= bx.upper + 1e-12);

            NormBounds by = twisted_norm_bounds(T, TwistedPair{Vec::Zero(2), y}, 2);
            CHECK(std::abs(by.upper - T.f_space().norm(y)) <= 1e-9);
            CHECK(std::abs(by.lower - T.f_space().norm(y)) <= 1e-9);
        }
    }

    TEST_CASE("upper bound is monotone in split depth") {
        TwistedSpace T = make_kp_space();
        Rng rng(7);
        for (int i = 0; i < 50; ++i) {
            TwistedPair z = random_pair(T, rng);
            double prev = std::numeric_limits<double>::infinity();
            for (int depth = 1; depth <= 4; ++depth) {
                NormBounds b = twisted_norm_bounds(T, z, depth);
                CHECK(b.upper <= prev + 1e-12);
                CHECK(b.lower <= b.upper + 1e-12);
                prev = b.upper;
            }
        }
    }

    TEST_CASE("canonical selection is a right inverse with rho p = phi") {
        for (const TwistedSpace& T : {make_zero_space(), make_kp_space()}) {
            CanonicalSelection p = canonical_selection(T);
            Rng rng(8);
            for (int i = 0; i < 1000; ++i) {
                Vec y1 = make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
                Vec y2 = make_vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
                CHECK(p(y1).y == y1); // sigma p = id exactly
                Vec rho_p = p.rho(y1, y2);
                CHECK(T.e_space().norm(rho_p - T.phi()(y1, y2)) <= 1e-9);
            }
        }
    }

    TEST_CASE("twisted space JSON round trip") {
        TwistedSpace T = make_kp_space();
        TwistedSpace back = TwistedSpace::from_json(T.to_json());
        CHECK(back.e_space().same_as(T.e_space()));
        CHECK(back.f_space().same_as(T.f_space()));
        Rng rng(9);
        for (int i = 0; i < 100; ++i) {
            Vec y1 = make_vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            Vec y2 = make_vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            CHECK(back.phi()(y1, y2) == T.phi()(y1, y2));
        }
    }
}
