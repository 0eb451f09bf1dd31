#pragma once

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mll/mll.hpp"

namespace testing {

inline mll::FactorSpace space_of(std::vector<std::pair<std::string, int>> vars) {
    std::vector<mll::Variable> v;
    for (auto& [n, k] : vars) v.push_back({n, k});
    return mll::FactorSpace(std::move(v));
}

inline mll::Table probs(const mll::FactorSpace& s, std::vector<double> v) {
    return mll::Table(s, std::move(v), mll::TableKind::Probabilities);
}

inline mll::Table counts(const mll::FactorSpace& s, std::vector<double> v) {
    return mll::Table(s, std::move(v), mll::TableKind::Counts);
}

/// X slow, Y fast: p00 = 0.4, p01 = 0.2, p10 = 0.1, p11 = 0.3.
inline mll::Table xy_table() { return probs(space_of({{"X", 2}, {"Y", 2}}), {0.40, 0.20, 0.10, 0.30}); }

inline mll::Table uniform(const mll::FactorSpace& s) {
    return probs(s, std::vector<double>(s.total_cells(), 1.0 / static_cast<double>(s.total_cells())));
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline mll::Roles xwy_roles() { return {"X", {"W"}, "Y"}; }

inline mll::FactorSpace xwy(int kx, int kw) { return space_of({{"X", kx}, {"W", kw}, {"Y", 2}}); }

/// Joint with W independent of Y given X.
inline mll::Table w_indep_y_given_x(const mll::FactorSpace& s, mll::Rng& rng) {
    auto th = mll::random_theta(s, rng);
    mll::TermIndex idx(s);
    for (mll::VarSet t : {mll::VarSet{1, 2}, mll::VarSet{0, 1, 2}}) {
        const auto& b = idx.block(t);
        th.values.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size)).setZero();
    }
    return mll::p_from_theta(th, s);
}

}  // namespace testing
