#pragma once

#include <Eigen/Dense>

#include "prsclt/spectral.hpp"

namespace testing_helpers {

inline prsclt::Mask first_mask(int p, int m) {
    prsclt::Mask mask(p, false);
    for (int i = 0; i < m; ++i) mask[i] = true;
    return mask;
}

inline Eigen::MatrixXd ar1_matrix(int p, double rho) {
    Eigen::MatrixXd s(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
    return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_helpers
