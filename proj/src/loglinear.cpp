#include "mll/loglinear.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

#include "mll/errors.hpp"

namespace mll {

namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& handler_slot() {
    static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return h;
}

std::string cell_label(const FactorSpace& space, std::size_t cell) {
    std::string s = "(";
    auto lv = space.decode(cell);
    for (std::size_t i = 0; i < lv.size(); ++i) {
        if (i) s += ",";
        s += space.variable(i).name + "=" + std::to_string(lv[i]);
    }
    return s + ")";
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(handler_mutex());
    std::swap(handler_slot(), handler);
    return handler;
}

void warn(const std::string& message) {
    std::lock_guard lock(handler_mutex());
    if (handler_slot()) handler_slot()(message);
}

void require_positive(const Table& p, const std::string& context) {
    bool warned = false;
    for (std::size_t c = 0; c < p.values.size(); ++c) {
        if (!(p.values[c] >= kPositivityFloor))
            throw PositivityError(context + ": cell " + cell_label(p.space, c) + " is not strictly positive");
        if (!warned && p.values[c] < kPositivityWarn) {
            warn(context + ": cell " + cell_label(p.space, c) + " is below 1e-12");
            warned = true;
        }
    }
}

double log_sum_exp(const Eigen::VectorXd& x) {
    const double m = x.maxCoeff();
    return m + std::log((x.array() - m).exp().sum());
}

Table p_from_theta(const ThetaVector& theta, const FactorSpace& space) {
    const Eigen::MatrixXd G = build_G(space, theta.coding);
    if (theta.values.size() != G.cols())
        throw SpecificationError("theta has length " + std::to_string(theta.values.size()) + ", expected " +
                                 std::to_string(G.cols()));
    if (!theta.values.allFinite()) throw SpecificationError("theta must be finite");
    Eigen::VectorXd eta = G * theta.values;
    Eigen::VectorXd p = (eta.array() - log_sum_exp(eta)).exp();
    Table t;
    t.space = space;
    t.values.assign(p.data(), p.data() + p.size());
    t.kind = TableKind::Probabilities;
    return t;
}

ThetaVector theta_from_p(const Table& p, Coding coding) {
    require_positive(p, "theta_from_p");
    Eigen::VectorXd logp = as_vector(p).array().log();
    return {build_H(p.space, coding) * logp, coding};
}

MuVector mean_params(const Table& p, Coding coding) {
    return {build_G(p.space, coding).transpose() * as_vector(p), coding};
}

Eigen::MatrixXd omega(const Eigen::VectorXd& p) {
    Eigen::MatrixXd o = -p * p.transpose();
    o.diagonal() += p;
    return o;
}

Eigen::MatrixXd cov_block(const Table& p, const VarSet& term, Coding coding) {
    require_positive(p, "cov_block");
    TermIndex idx(p.space);
    const auto& b = idx.block(term);
    Eigen::MatrixXd G = build_G(p.space, coding)
                            .middleCols(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
    Eigen::MatrixXd C = G.transpose() * omega(as_vector(p)) * G;
    return 0.5 * (C + C.transpose());
}

Eigen::MatrixXd cov_block(const Table& p, const std::vector<std::string>& term, Coding coding) {
    return cov_block(p, p.space.positions(term), coding);
}

Eigen::MatrixXd canonical_information(const Table& p, Coding coding) {
    Eigen::MatrixXd G = build_G(p.space, coding);
    Eigen::MatrixXd F = G.transpose() * omega(as_vector(p)) * G;
    return 0.5 * (F + F.transpose());
}

}  // namespace mll
