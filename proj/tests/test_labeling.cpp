#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "biomlab/labeling.hpp"
#include "biomlab/rng.hpp"

using namespace biomlab;
using namespace biomlab::labeling;

TEST_CASE("item table: five per subscale, five reverse overall") {
    int social = 0, emotional = 0, reverse = 0, reverse_emotional = 0;
    for (const auto& item : ucla_items()) {
        if (item.subscale == Subscale::Social) ++social;
        else ++emotional;
        if (item.reverse_scored) {
            ++reverse;
            if (item.subscale == Subscale::Emotional) ++reverse_emotional;
        }
    }
    CHECK(social == 5);
    CHECK(emotional == 5);
    CHECK(reverse == 5);
    CHECK(reverse_emotional == 3);
}

TEST_CASE("scoring anchors") {
    // all raw 1: reverse items become 4
    auto a = score_ucla("p", {1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(a.emotional_score == 14);
    CHECK(a.social_score == 11);
    CHECK(a.total_score == 25);

    // direct items 4, reverse items 1: every transformed item is 4
    std::array<int, 10> max_raw{};
    for (const auto& item : ucla_items()) {
        max_raw[static_cast<std::size_t>(item.item_id - 1)] = item.reverse_scored ? 1 : 4;
    }
    a = score_ucla("p", max_raw);
    CHECK(a.total_score == 40);
    CHECK(a.social_score == 20);
    CHECK(a.emotional_score == 20);

    // every transformed item 1
    std::array<int, 10> min_raw{};
    for (const auto& item : ucla_items()) {
        min_raw[static_cast<std::size_t>(item.item_id - 1)] = item.reverse_scored ? 4 : 1;
    }
    a = score_ucla("p", min_raw);
    CHECK(a.total_score == 10);
    CHECK(a.social_score == 5);
    CHECK(a.emotional_score == 5);
}

TEST_CASE("scoring rejects partial or out-of-range surveys") {
    CHECK_THROWS_AS(score_ucla("p", {0, 1, 1, 1, 1, 1, 1, 1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(score_ucla("p", {1, 1, 1, 1, 5, 1, 1, 1, 1, 1}), ValidationError);
}

TEST_CASE("categorize thresholds") {
    CHECK(categorize(11, 10) == Category::SociallyLonely);
    CHECK(categorize(10, 11) == Category::EmotionallyLonely);
    CHECK(categorize(10, 10) == Category::NotLonely);
    CHECK(categorize(13, 13) == Category::BothLonely);
}

TEST_CASE("category partition over all subscale pairs") {
    for (int s = 5; s <= 20; ++s) {
        for (int e = 5; e <= 20; ++e) {
            int matches = 0;
            const auto c = categorize(s, e);
            if (s > 10 && e <= 10) matches += c == Category::SociallyLonely;
            else if (s <= 10 && e > 10) matches += c == Category::EmotionallyLonely;
            else if (s > 10 && e > 10) matches += c == Category::BothLonely;
            else matches += c == Category::NotLonely;
            CHECK(matches == 1);
        }
    }
}

TEST_CASE("overall binary split") {
    CHECK_FALSE(overall_binary_high(20));
    CHECK(overall_binary_high(21));
    CHECK(overall_binary_high(40));
    CHECK_FALSE(overall_binary_high(10));
}

TEST_CASE("reverse scoring involution and score identity on random responses") {
    Rng rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        std::array<int, 10> raw{};
        for (auto& r : raw) r = static_cast<int>(rng.uniform_int(1, 4));
        const auto a = score_ucla("p", raw);
        CHECK(a.total_score >= 10);
        CHECK(a.total_score <= 40);
        CHECK(a.total_score == a.social_score + a.emotional_score);
        for (int v = 1; v <= 4; ++v) CHECK(5 - (5 - v) == v);
    }
}

TEST_CASE("cohort summary matches hand-computed quantiles and percentages") {
    std::vector<Assessment> cohort;
    // three assessments with totals 18, 21, 25 via direct construction
    for (int total : {18, 21, 25}) {
        Assessment a;
        a.participant_id = "p" + std::to_string(total);
        a.total_score = total;
        a.social_score = total / 2;
        a.emotional_score = total - total / 2;
        a.category = categorize(a.social_score, a.emotional_score);
        a.overall_high = overall_binary_high(total);
        cohort.push_back(a);
    }
    const auto s = cohort_summary(cohort);
    CHECK(s.total.median == doctest::Approx(21.0));
    CHECK(s.total.q1 == doctest::Approx(19.5));
    CHECK(s.total.q3 == doctest::Approx(23.0));

    SUBCASE("single assessment degenerates") {
        const auto one = cohort_summary({cohort.front()});
        CHECK(one.total.mean == doctest::Approx(18.0));
        CHECK(one.total.median == doctest::Approx(18.0));
        CHECK(one.total.q1 == doctest::Approx(18.0));
        CHECK(one.total.q3 == doctest::Approx(18.0));
        CHECK(one.total.sd == doctest::Approx(0.0));
    }
}

TEST_CASE("category percentages reproduce the 24/19/87/75 split") {
    std::vector<Assessment> cohort;
    const std::array<std::pair<Category, int>, 4> plan = {{{Category::SociallyLonely, 24},
                                                           {Category::EmotionallyLonely, 19},
                                                           {Category::BothLonely, 87},
                                                           {Category::NotLonely, 75}}};
    int idx = 0;
    for (const auto& [cat, count] : plan) {
        for (int i = 0; i < count; ++i) {
            Assessment a;
            a.participant_id = "p" + std::to_string(idx++);
            a.category = cat;
            a.total_score = 21;
            a.overall_high = true;
            cohort.push_back(a);
        }
    }
    const auto s = cohort_summary(cohort);
    CHECK(s.category_percent[0] == doctest::Approx(11.71));
    CHECK(s.category_percent[1] == doctest::Approx(9.27));
    CHECK(s.category_percent[2] == doctest::Approx(42.44));
    CHECK(s.category_percent[3] == doctest::Approx(36.59));
}
