#include <doctest.h>

#include <cmath>

#include "qbm/border.hpp"

using namespace qbm;

TEST_CASE("classification anchors") {
    CHECK(classify({0.1, 20.0, 10.0}) == DynamicsType::LindbladType);
    CHECK(classify({0.1, 0.1, 10.0}) == DynamicsType::NonLindbladType);
    CHECK(classify({0.1, 1.0, 0.01}) == DynamicsType::NonLindbladType);

    CHECK(to_string(DynamicsType::LindbladType) == "lindblad-type");
    CHECK(to_string(DynamicsType::NonLindbladType) == "non-lindblad-type");
}

TEST_CASE("sign profiles identify which combination goes negative") {
    // small cutoff, high temperature: Delta itself oscillates negative
    auto prof_r01 = sign_profile({0.1, 0.1, 10.0});
    REQUIRE(prof_r01.size() == 3);
    CHECK(prof_r01[0].quantity == SignQuantity::Delta);
    CHECK(!prof_r01[0].negative_intervals.empty());
    CHECK(!prof_r01[1].negative_intervals.empty());

    // low temperature at r = 1: Delta stays positive, Delta - gamma does not
    auto prof_cold = sign_profile({0.1, 1.0, 0.01});
    CHECK(prof_cold[0].negative_intervals.empty());
    CHECK(!prof_cold[1].negative_intervals.empty());

    // Lindblad anchor: nothing goes negative
    auto prof_l = sign_profile({0.1, 20.0, 10.0});
    for (const auto& p : prof_l) CHECK(p.negative_intervals.empty());
}

TEST_CASE("negative intervals carry sensible endpoints") {
    auto prof = sign_profile({0.1, 0.1, 10.0});
    const auto& neg = prof[0].negative_intervals;
    REQUIRE(!neg.empty());
    for (const auto& [a, b] : neg) {
        CHECK(a < b);
        CHECK(a > 0.0);
    }
    // the first excursion of Delta sits inside omega_0 t in (2, 6)
    CHECK(neg.front().first > 1.0);
    CHECK(neg.front().first < 4.0);
    CHECK(neg.front().second < 8.0);
}

TEST_CASE("high-temperature reduced Delta") {
    // scaling check: delta_bar is delta_high_t / (2 alpha^2 theta)
    for (auto [alpha, theta] : {std::pair{0.05, 40.0}, std::pair{0.2, 7.0}}) {
        ReservoirSpec s{alpha, 0.3, theta};
        for (double t : {0.5, 2.0, 7.0, 20.0}) {
            const double expect =
                delta_high_t_at(s, t) / (2.0 * alpha * alpha * theta);
            CHECK(delta_bar_high_t(0.3, t) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }

    CHECK(min_delta_bar(0.1, 50.0) < 0.0);
    CHECK(min_delta_bar(1.0, 50.0) >= 0.0);
}

TEST_CASE("critical ratio in the high-temperature regime") {
    const double rc = critical_r_high_t();
    CHECK(rc > 0.26);
    CHECK(rc < 0.28);
    // just below: negative excursion exists; just above: none
    CHECK(min_delta_bar(rc - 0.01, 50.0) < 0.0);
    CHECK(min_delta_bar(rc + 0.01, 50.0) >= 0.0);
}

TEST_CASE("high-temperature contour grid") {
    auto cg = contour_grid(ContourRegime::HighT, 0.05, 1.0, 30.0, 40, 120);
    REQUIRE(cg.r_axis.size() == 40);
    REQUIRE(cg.t_axis.size() == 120);
    REQUIRE(cg.values.size() == 40);

    bool any_negative = false;
    for (std::size_t i = 0; i < cg.r_axis.size(); ++i) {
        REQUIRE(cg.values[i].size() == 120);
        double row_min = 0.0;
        for (double v : cg.values[i]) row_min = std::min(row_min, v);
        if (row_min < 0.0) any_negative = true;
        // negativity is confined below the critical ratio
        if (cg.r_axis[i] > 0.28) CHECK(row_min >= 0.0);
    }
    CHECK(any_negative);

    // t = 0 column vanishes
    for (std::size_t i = 0; i < cg.r_axis.size(); ++i)
        CHECK(cg.values[i][0] == doctest::Approx(0.0).epsilon(1e-14));

    auto zc = zero_contour(cg);
    REQUIRE(zc.size() == cg.r_axis.size());
    for (const auto& [r, tc] : zc) {
        if (r > 0.28) CHECK(std::isnan(tc));
        if (r < 0.15) {
            CHECK(!std::isnan(tc));
            CHECK(tc >= 0.0);
        }
    }
}

TEST_CASE("general-regime contour at fixed 2 pi r_c") {
    // with 2 pi r_c = 10 the temperature falls as r grows, and the
    // friction combination keeps a negative window well beyond r = 1
    auto cg = contour_grid(ContourRegime::General, 0.4, 2.0, 40.0, 9, 200,
                           0.1, 10.0);
    bool neg_above_one = false;
    for (std::size_t i = 0; i < cg.r_axis.size(); ++i) {
        if (cg.r_axis[i] <= 1.0) continue;
        for (double v : cg.values[i])
            if (v < 0.0) neg_above_one = true;
    }
    CHECK(neg_above_one);

    // cross-check one point against the classifier at theta = r / (2 pi r_c)
    ReservoirSpec s{0.1, 1.2, 1.2 / 10.0};
    auto prof = sign_profile(s);
    CHECK(!prof[1].negative_intervals.empty());
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(classify({-0.1, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(sign_profile({0.1, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(contour_grid(ContourRegime::HighT, 1.0, 0.5, 10.0, 4, 4),
                    DomainError);
}
