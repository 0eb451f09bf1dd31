#include "helpers.hpp"

using namespace mll;
using namespace testing;

TEST_CASE("cell layout puts the last variable fastest") {
    auto s = space_of({{"A", 2}, {"B", 3}, {"C", 2}});
    CHECK(s.total_cells() == 12);
    std::vector<int> lv{1, 2, 0};
    CHECK(s.cell_index(lv) == 1 * 6 + 2 * 2 + 0);
    CHECK(s.decode(11) == std::vector<int>{1, 2, 1});
    for (std::size_t c = 0; c < s.total_cells(); ++c) CHECK(s.cell_index(s.decode(c)) == c);
}

TEST_CASE("factor space rejects bad variables") {
    CHECK_THROWS_AS(space_of({{"X", 2}, {"X", 3}}), SpecificationError);
    CHECK_THROWS_AS(space_of({{"", 2}}), SpecificationError);
    CHECK_THROWS_AS(space_of({{"X", 1}}), SpecificationError);
    auto s = space_of({{"X", 2}});
    CHECK_THROWS_AS(s.position("Z"), SpecificationError);
}

TEST_CASE("tables validate their values") {
    auto s = space_of({{"X", 2}});
    CHECK_THROWS_AS(probs(s, {0.5, 0.6}), SpecificationError);
    CHECK_THROWS_AS(counts(s, {-1.0, 2.0}), SpecificationError);
    CHECK_THROWS_AS(counts(s, {1.0}), SpecificationError);
    CHECK_NOTHROW(probs(s, {0.25, 0.75}));
}

TEST_CASE("marginalize") {
    auto s3 = space_of({{"X", 2}, {"W", 2}, {"Y", 2}});
    auto m = marginalize(uniform(s3), std::vector<std::string>{"X", "Y"});
    CHECK(m.space.names({0, 1}) == std::vector<std::string>{"X", "Y"});
    for (double v : m.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

    auto x = marginalize(xy_table(), std::vector<std::string>{"X"});
    CHECK(max_diff(x.values, {0.6, 0.4}) < 1e-15);

    auto c = marginalize(counts(space_of({{"X", 2}, {"Y", 2}}), {1, 2, 3, 4}), std::vector<std::string>{"Y"});
    CHECK(c.values == std::vector<double>{4, 6});
    CHECK(c.kind == TableKind::Counts);

    CHECK_THROWS_AS(marginalize(xy_table(), std::vector<std::string>{"Q"}), SpecificationError);
    CHECK_THROWS_AS(marginalize(xy_table(), std::vector<std::string>{}), SpecificationError);
}

TEST_CASE("marginalize keeps declaration order whatever order is asked for") {
    auto s = space_of({{"A", 2}, {"B", 3}, {"C", 2}});
    Rng rng(1);
    auto p = random_positive_table(s, rng);
    auto m1 = marginalize(p, std::vector<std::string>{"C", "A"});
    auto m2 = marginalize(p, std::vector<std::string>{"A", "C"});
    CHECK(m1.values == m2.values);
    CHECK(m1.space.variable(0).name == "A");
}

TEST_CASE("marginalization composes") {
    Rng rng(7);
    auto s = space_of({{"A", 3}, {"B", 2}, {"C", 2}, {"D", 2}});
    for (int t = 0; t < 10; ++t) {
        auto p = random_positive_table(s, rng);
        auto ab = marginalize(marginalize(p, std::vector<std::string>{"A", "B", "D"}), std::vector<std::string>{"A", "B"});
        auto direct = marginalize(p, std::vector<std::string>{"A", "B"});
        CHECK(max_diff(ab.values, direct.values) < 1e-15);
        for (auto keep : {std::vector<std::string>{"B"}, {"A", "D"}, {"B", "C", "D"}})
            CHECK(std::abs(marginalize(p, keep).total() - 1.0) < 1e-12);
    }
}

TEST_CASE("condition") {
    auto s3 = space_of({{"X", 2}, {"W", 2}, {"Y", 2}});
    auto c = condition(uniform(s3), {{"X", 1}});
    for (double v : c.values) CHECK(v == doctest::Approx(0.25));

    auto y = condition(xy_table(), {{"X", 1}});
    CHECK(max_diff(y.values, {0.25, 0.75}) < 1e-15);

    CHECK_THROWS_AS(condition(xy_table(), {{"X", 1}, {"Y", 0}}), SpecificationError);
    CHECK_THROWS_AS(condition(xy_table(), {{"X", 2}}), SpecificationError);
    auto z = probs(space_of({{"X", 2}, {"Y", 2}}), {0.5, 0.5, 0.0, 0.0});
    CHECK_THROWS_AS(condition(z, {{"X", 1}}), DegenerateError);
}

TEST_CASE("conditionals reassemble into the margin") {
    Rng rng(11);
    auto s = space_of({{"X", 3}, {"W", 2}, {"Y", 2}});
    auto p = random_positive_table(s, rng);
    auto px = marginalize(p, std::vector<std::string>{"X"});
    auto wy = marginalize(p, std::vector<std::string>{"W", "Y"});
    std::vector<double> mix(wy.values.size(), 0.0);
    for (int x = 0; x < 3; ++x) {
        auto c = condition(p, {{"X", x}});
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += px.values[static_cast<std::size_t>(x)] * c.values[i];
    }
    CHECK(max_diff(mix, wy.values) < 1e-12);
}

TEST_CASE("normalize") {
    auto s = space_of({{"X", 2}, {"Y", 2}});
    CHECK(max_diff(normalize(counts(s, {1, 1, 1, 1})).values, {0.25, 0.25, 0.25, 0.25}) < 1e-15);
    auto n = normalize(counts(s, {4, 2, 1, 3}));
    CHECK(max_diff(n.values, {0.4, 0.2, 0.1, 0.3}) < 1e-15);
    CHECK(n.kind == TableKind::Probabilities);
    CHECK_THROWS_AS(normalize(counts(space_of({{"X", 2}}), {0, 0})), DegenerateError);
}
