#include "mll/random.hpp"

#include <cmath>

namespace mll {

Table random_positive_table(const FactorSpace& space, Rng& rng, double scale) {
    std::normal_distribution<double> z(0.0, scale);
    std::vector<double> v(space.total_cells());
    double tot = 0.0;
    for (double& x : v) tot += (x = std::exp(z(rng)));
    for (double& x : v) x /= tot;
    Table t;
    t.space = space;
    t.values = std::move(v);
    t.kind = TableKind::Probabilities;
    return t;
}

ThetaVector random_theta(const FactorSpace& space, Rng& rng, double scale, Coding coding) {
    std::normal_distribution<double> z(0.0, scale);
    Eigen::VectorXd v(static_cast<Eigen::Index>(space.total_cells() - 1));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(rng);
    return {v, coding};
}

}  // namespace mll
