#ifndef BESMP_BOX_HPP
#define BESMP_BOX_HPP

#include <stdexcept>

#include <Eigen/Core>

#include "besmp/rng.hpp"

namespace besmp {

// Axis-aligned bounded input domain.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Box() = default;
    Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("Box: bounds must be non-empty and of equal size");
        if ((upper.array() <= lower.array()).any())
            throw std::invalid_argument("Box: upper bound must exceed lower bound");
    }

    static Box unit(int dim) {
        return Box(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
    }

    int dim() const { return static_cast<int>(lower.size()); }

    Eigen::VectorXd width() const { return upper - lower; }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        return (x.array() >= lower.array() - tol).all() &&
               (x.array() <= upper.array() + tol).all();
    }

    Eigen::VectorXd clip(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lower).cwiseMin(upper);
    }

    Eigen::VectorXd sample(Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::VectorXd x(dim());
        for (int i = 0; i < dim(); ++i) x(i) = lower(i) + unit(rng) * (upper(i) - lower(i));
        return x;
    }
};

}  // namespace besmp

#endif
