#include "bolab/moments.hpp"

#include <cmath>
#include <stdexcept>


namespace bolab {

double moment_quadrature(const Field& u, int power, double half_width) {
    const Grid& g = u.grid;
    double s = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        if (std::abs(x) > half_width) continue;
        s += std::pow(x, power) * u[j];
    }
    return s * g.dx();
}

} // namespace bolab
