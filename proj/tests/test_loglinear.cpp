#include "helpers.hpp"

using namespace mll;
using namespace testing;

TEST_CASE("p_from_theta") {
    auto s = space_of({{"X", 2}, {"Y", 2}});
    ThetaVector zero{Eigen::VectorXd::Zero(3), Coding::Rc};
    CHECK(max_diff(p_from_theta(zero, s).values, uniform(s).values) < 1e-16);

    ThetaVector th{Eigen::Vector3d(-1.386294, -0.693147, 1.791759), Coding::Rc};
    CHECK(max_diff(p_from_theta(th, s).values, {0.4, 0.2, 0.1, 0.3}) < 1e-6);
}

TEST_CASE("p_from_theta survives large parameters") {
    auto s = space_of({{"X", 3}, {"Y", 2}});
    ThetaVector th{Eigen::VectorXd::Constant(5, 30.0), Coding::Rc};
    auto p = p_from_theta(th, s);
    CHECK(std::abs(p.total() - 1.0) < 1e-14);
    for (double v : p.values) CHECK(std::isfinite(v));
    th.values.setConstant(-30.0);
    CHECK(std::abs(p_from_theta(th, s).total() - 1.0) < 1e-14);
}

TEST_CASE("theta_from_p") {
    auto th = theta_from_p(xy_table(), Coding::Rc);
    CHECK(std::abs(th.values(2) - std::log(6.0)) < 1e-14);
    CHECK(std::abs(th.values(0) - std::log(0.1 / 0.4)) < 1e-14);
    CHECK(std::abs(th.values(1) - std::log(0.2 / 0.4)) < 1e-14);
    CHECK(max_abs(theta_from_p(uniform(xy_table().space), Coding::Ac).values) < 1e-15);

    auto z = probs(xy_table().space, {0.5, 0.2, 0.0, 0.3});
    try {
        theta_from_p(z, Coding::Rc);
        FAIL("expected a positivity error");
    } catch (const PositivityError& e) {
        CHECK(std::string(e.what()).find("X=1") != std::string::npos);
    }
}

TEST_CASE("round trip on random tables in both codings") {
    Rng rng(2024);
    std::vector<FactorSpace> ss{space_of({{"X", 2}, {"Y", 2}}), space_of({{"X", 3}, {"W", 3}, {"Y", 2}}),
                                space_of({{"X", 4}, {"U", 2}, {"V", 2}, {"Y", 2}})};
    for (int t = 0; t < 100; ++t) {
        const auto& s = ss[static_cast<std::size_t>(t) % ss.size()];
        auto c = t % 2 ? Coding::Ac : Coding::Rc;
        auto p = random_positive_table(s, rng, 1.5);
        CHECK(max_diff(p_from_theta(theta_from_p(p, c), s).values, p.values) < 1e-10);
        auto th = random_theta(s, rng, 1.0, c);
        CHECK(max_abs(theta_from_p(p_from_theta(th, s), c).values - th.values) < 1e-10);
    }
}

TEST_CASE("mean parameters") {
    auto s = space_of({{"X", 2}, {"Y", 2}});
    auto mu = mean_params(uniform(s), Coding::Rc);
    CHECK(max_abs(mu.values - Eigen::Vector3d(0.5, 0.5, 0.25)) < 1e-15);
    mu = mean_params(xy_table(), Coding::Rc);
    CHECK(max_abs(mu.values - Eigen::Vector3d(0.4, 0.5, 0.3)) < 1e-15);
}

TEST_CASE("covariance blocks") {
    auto x = probs(space_of({{"X", 2}}), {0.6, 0.4});
    auto c = cov_block(x, std::vector<std::string>{"X"});
    REQUIRE(c.rows() == 1);
    CHECK(std::abs(c(0, 0) - 0.24) < 1e-15);

    auto u = uniform(space_of({{"X", 2}, {"Y", 2}}));
    CHECK(std::abs(cov_block(u, std::vector<std::string>{"X", "Y"})(0, 0) - 0.1875) < 1e-15);

    CHECK_THROWS_AS(cov_block(probs(x.space, {1.0, 0.0}), std::vector<std::string>{"X"}), PositivityError);
}

TEST_CASE("covariance block is the Jacobian of the mean parameters") {
    Rng rng(99);
    auto s = space_of({{"X", 3}, {"W", 2}, {"Y", 2}});
    TermIndex idx(s);
    const double h = 1e-5;
    for (int t = 0; t < 20; ++t) {
        auto c = t % 2 ? Coding::Ac : Coding::Rc;
        auto p = random_positive_table(s, rng);
        auto th = theta_from_p(p, c);
        for (const auto& b : idx.blocks()) {
            auto C = cov_block(p, b.vars, c);
            CHECK(C.isApprox(C.transpose(), 0.0));
            CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues().minCoeff() > 0.0);
            Eigen::MatrixXd fd(C.rows(), C.cols());
            for (std::size_t j = 0; j < b.size; ++j) {
                auto up = th, dn = th;
                up.values(static_cast<Eigen::Index>(b.offset + j)) += h;
                dn.values(static_cast<Eigen::Index>(b.offset + j)) -= h;
                Eigen::VectorXd d = (mean_params(p_from_theta(up, s), c).values - mean_params(p_from_theta(dn, s), c).values) /
                                    (2 * h);
                fd.col(static_cast<Eigen::Index>(j)) = d.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
            }
            CHECK(max_abs(fd - C) < 1e-6);
        }
    }
}

TEST_CASE("small cells warn, zero cells fail") {
    std::vector<std::string> seen;
    auto old = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
    auto p = probs(space_of({{"X", 2}}), {1.0 - 1e-14, 1e-14});
    CHECK_NOTHROW(theta_from_p(p, Coding::Rc));
    CHECK(!seen.empty());
    set_warning_handler(old);
    CHECK_THROWS_AS(require_positive(probs(p.space, {1.0, 0.0}), "test"), PositivityError);
}
