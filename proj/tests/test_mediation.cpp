#include "helpers.hpp"

using namespace mll;
using namespace testing;

namespace {

const Roles kRoles{"X", {"U", "V"}, "Y"};

FactorSpace four_way() { return space_of({{"X", 4}, {"U", 2}, {"V", 2}, {"Y", 2}}); }

double risk(const Table& p, int x) {
    return condition(marginalize(p, std::vector<std::string>{"X", "Y"}), {{"X", x}}).values[1];
}

ModelSpec saturated_model(const FactorSpace& s) {
    ModelSpec m;
    m.mll.space = s;
    VarSet all(s.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (auto& sub : nonempty_subsets(all)) m.mll.terms.push_back({sub, all, Coding::Rc, {}});
    return m;
}

}  // namespace

TEST_CASE("no effects when the response ignores exposure and mediators") {
    Rng rng(1);
    auto xw = random_positive_table(space_of({{"X", 4}, {"U", 2}, {"V", 2}}), rng);
    std::vector<double> v;
    for (double q : xw.values) {
        v.push_back(q * 0.3);
        v.push_back(q * 0.7);
    }
    auto p = probs(four_way(), v);
    for (auto [a, b] : adjacent_transitions(4)) {
        auto e = natural_effects(p, kRoles, a, b);
        CHECK(std::abs(e.nde) < 1e-15);
        CHECK(std::abs(e.nie) < 1e-15);
        CHECK(std::abs(e.te) < 1e-15);
    }
}

TEST_CASE("a degenerate mediator carries no indirect effect") {
    Rng rng(2);
    auto s = space_of({{"X", 3}, {"W", 3}, {"Y", 2}});
    auto xy = random_positive_table(space_of({{"X", 3}, {"Y", 2}}), rng);
    std::vector<double> v(s.total_cells(), 0.0);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 2; ++y) v[s.cell_index(std::vector<int>{x, 1, y})] = xy.values[static_cast<std::size_t>(x * 2 + y)];
    auto p = probs(s, v);
    auto e = natural_effects(p, xwy_roles(), 0, 2);
    CHECK(std::abs(e.nie) < 1e-15);
    CHECK(std::abs(e.nde - e.te) < 1e-15);
    CHECK(std::abs(e.te - (risk(p, 2) - risk(p, 0))) < 1e-12);
}

TEST_CASE("total effect is the marginal risk difference and the split is additive") {
    Rng rng(3);
    for (int t = 0; t < 30; ++t) {
        auto p = random_positive_table(four_way(), rng, 1.5);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                auto e = natural_effects(p, kRoles, a, b);
                CHECK(e.te == e.nde + e.nie);
                CHECK(std::abs(e.te - (risk(p, b) - risk(p, a))) < 1e-12);
            }
    }
}

TEST_CASE("relabelling mediator levels leaves the effects unchanged") {
    Rng rng(4);
    auto s = space_of({{"X", 3}, {"W", 4}, {"Y", 2}});
    auto p = random_positive_table(s, rng);
    std::vector<int> perm{2, 0, 3, 1};
    std::vector<double> v(s.total_cells());
    for (std::size_t c = 0; c < s.total_cells(); ++c) {
        auto lv = s.decode(c);
        lv[1] = perm[static_cast<std::size_t>(lv[1])];
        v[s.cell_index(lv)] = p.values[c];
    }
    auto q = probs(s, v);
    for (auto [a, b] : adjacent_transitions(3)) {
        auto e = natural_effects(p, xwy_roles(), a, b), f = natural_effects(q, xwy_roles(), a, b);
        CHECK(std::abs(e.nde - f.nde) < 1e-12);
        CHECK(std::abs(e.nie - f.nie) < 1e-12);
    }
}

TEST_CASE("argument checks") {
    Rng rng(5);
    auto p = random_positive_table(four_way(), rng);
    CHECK_THROWS_AS(natural_effects(p, kRoles, 1, 1), SpecificationError);
    CHECK_THROWS_AS(natural_effects(p, kRoles, 0, 4), SpecificationError);
    CHECK_THROWS_AS(natural_effects(p, Roles{"X", {"U"}, "Q"}, 0, 1), SpecificationError);
    CHECK_THROWS_AS(natural_effects(p, Roles{"U", {"V"}, "X"}, 0, 1), SpecificationError);
    CHECK(adjacent_transitions(4) == std::vector<Transition>{{0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("mediation table on a saturated fit") {
    Rng rng(6);
    auto s = four_way();
    auto n = simulate(random_positive_table(s, rng, 0.5), 4000, 3);
    auto model = saturated_model(s);
    auto fit = fit_mle(n, model);
    auto emp = normalize(n);
    for (auto [a, b] : adjacent_transitions(4)) {
        auto e = natural_effects(fit.p_hat, kRoles, a, b), f = natural_effects(emp, kRoles, a, b);
        CHECK(std::abs(e.nde - f.nde) < 1e-10);
        CHECK(std::abs(e.nie - f.nie) < 1e-10);
    }
    auto m = mediation_table(fit, n, model, kRoles, adjacent_transitions(4), 50, 1);
    REQUIRE(m.transitions.size() == 3);
    CHECK(m.replicates == 50);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m.te[i] == m.nde[i] + m.nie[i]);
        CHECK(m.se_nde[i] > 0.0);
        CHECK(m.se_te[i] > 0.0);
    }
    auto again = mediation_table(fit, n, model, kRoles, adjacent_transitions(4), 50, 1, 1);
    CHECK(again.se_nie == m.se_nie);
    CHECK_THROWS_AS(mediation_table(fit, n, model, kRoles, {}, 50, 1), SpecificationError);
}
