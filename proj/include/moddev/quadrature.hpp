#ifndef MODDEV_QUADRATURE_HPP
#define MODDEV_QUADRATURE_HPP

#include <vector>

namespace moddev {

/// Gauss-Laguerre rule for int_0^inf e^{-s} f(s) ds ~ sum w_i f(x_i),
/// built from the Jacobi matrix of the Laguerre recurrence (Golub-Welsch).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule gauss_laguerre(int n);

}  // namespace moddev

#endif
