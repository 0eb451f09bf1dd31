#include "helpers.hpp"

using namespace mll;
using namespace testing;

namespace {

std::vector<FactorSpace> spaces() {
    return {space_of({{"X", 2}}),
            space_of({{"X", 2}, {"Y", 2}}),
            space_of({{"X", 3}, {"Y", 2}}),
            space_of({{"X", 2}, {"W", 3}, {"Y", 2}}),
            space_of({{"X", 4}, {"W", 3}, {"Y", 2}}),
            space_of({{"X", 4}, {"U", 2}, {"V", 2}, {"Y", 2}}),
            space_of({{"A", 3}, {"B", 3}, {"C", 3}})};
}

}  // namespace

TEST_CASE("contrast matrices") {
    Eigen::MatrixXd rc2(1, 2), ac3(2, 3), rc3(2, 3);
    rc2 << -1, 1;
    ac3 << -1, 1, 0, 0, -1, 1;
    rc3 << -1, 1, 0, -1, 0, 1;
    CHECK(contrast_matrix(2, Coding::Rc) == rc2);
    CHECK(contrast_matrix(2, Coding::Ac) == rc2);
    CHECK(contrast_matrix(3, Coding::Ac) == ac3);
    CHECK(contrast_matrix(3, Coding::Rc) == rc3);
    for (int k = 2; k < 6; ++k)
        for (auto c : {Coding::Rc, Coding::Ac}) CHECK(contrast_matrix(k, c).rowwise().sum().isZero(0.0));
    CHECK_THROWS_AS(contrast_matrix(1, Coding::Rc), SpecificationError);
}

TEST_CASE("coding names round trip") {
    CHECK(coding_from_string("Rc") == Coding::Rc);
    CHECK(coding_from_string(to_string(Coding::Ac)) == Coding::Ac);
    CHECK_THROWS_AS(coding_from_string("Zz"), SpecificationError);
}

TEST_CASE("term index order and coverage") {
    auto s = space_of({{"X", 3}, {"W", 2}, {"Y", 2}});
    TermIndex idx(s);
    CHECK(idx.parameter_count() == s.total_cells() - 1);
    std::vector<VarSet> expect{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
    REQUIRE(idx.blocks().size() == expect.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(idx.blocks()[i].vars == expect[i]);
        CHECK(idx.blocks()[i].offset == next);
        next += idx.blocks()[i].size;
    }
    CHECK(next == idx.parameter_count());
    CHECK(TermIndex::combo(s, {0, 2}, 0) == std::vector<int>{1, 1});
    CHECK(TermIndex::combo(s, {0, 2}, 1) == std::vector<int>{2, 1});
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(TermIndex::combo_offset(s, {0, 2}, TermIndex::combo(s, {0, 2}, j)) == j);
    CHECK_THROWS_AS(TermIndex::combo_offset(s, {0, 2}, {0, 1}), SpecificationError);
}

TEST_CASE("design and contrast matrices for a 2x2 table") {
    auto s = space_of({{"X", 2}, {"Y", 2}});
    auto H = build_H(s, Coding::Rc);
    Eigen::RowVectorXd xy(4);
    xy << 1, -1, -1, 1;
    CHECK(H.row(2) == xy);
    Eigen::MatrixXd G(4, 3);
    G << 0, 0, 0,  //
        0, 1, 0,   //
        1, 0, 0,   //
        1, 1, 1;
    CHECK(build_G(s, Coding::Rc) == G);

    auto one = space_of({{"X", 2}});
    Eigen::MatrixXd h1(1, 2), g1(2, 1);
    h1 << -1, 1;
    g1 << 0, 1;
    CHECK(build_H(one, Coding::Rc) == h1);
    CHECK(build_G(one, Coding::Rc) == g1);
}

TEST_CASE("H is an exact left inverse of G and annihilates the unit vector") {
    for (const auto& s : spaces()) {
        for (auto c : {Coding::Rc, Coding::Ac}) {
            auto H = build_H(s, c);
            auto G = build_G(s, c);
            const auto k = static_cast<Eigen::Index>(s.total_cells());
            CHECK((H * G - Eigen::MatrixXd::Identity(k - 1, k - 1)).isZero(0.0));
            CHECK((H * Eigen::VectorXd::Ones(k)).isZero(0.0));
            Eigen::MatrixXd G1(k, k);
            G1 << G, Eigen::VectorXd::Ones(k);
            CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(G1).rank() == k);
        }
    }
}

TEST_CASE("Rc and Ac coincide on binary spaces") {
    auto s = space_of({{"A", 2}, {"B", 2}, {"C", 2}});
    CHECK(build_H(s, Coding::Rc) == build_H(s, Coding::Ac));
    CHECK(build_G(s, Coding::Rc) == build_G(s, Coding::Ac));
}

TEST_CASE("Ac columns are cumulative indicators") {
    auto s = space_of({{"X", 4}});
    auto G = build_G(s, Coding::Ac);
    Eigen::MatrixXd expect(4, 3);
    expect << 0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 1, 1;
    CHECK(G == expect);
}

TEST_CASE("Rc mean parameters are marginal probabilities") {
    Rng rng(5);
    auto s = space_of({{"X", 3}, {"W", 3}, {"Y", 2}});
    auto p = random_positive_table(s, rng);
    auto mu = mean_params(p, Coding::Rc);
    TermIndex idx(s);
    for (const auto& b : idx.blocks()) {
        auto m = marginalize(p, b.vars);
        for (std::size_t j = 0; j < b.size; ++j) {
            auto lv = TermIndex::combo(s, b.vars, j);
            CHECK(std::abs(mu.values(static_cast<Eigen::Index>(b.offset + j)) - m.at(lv)) < 1e-15);
        }
    }
}
