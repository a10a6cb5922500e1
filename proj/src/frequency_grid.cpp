#include "gridcert/frequency_grid.hpp"

#include <cmath>
#include <string>

#include "gridcert/error.hpp"

namespace gridcert {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
    if (omegas_.empty()) fail(ErrorKind::InvalidGrid, "empty frequency grid");
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        if (!std::isfinite(omegas_[i]) || omegas_[i] <= 0.0)
            fail(ErrorKind::InvalidGrid, "grid entry " + std::to_string(i) + " is not a finite positive frequency");
        if (i > 0 && !(omegas_[i] > omegas_[i - 1]))
            fail(ErrorKind::InvalidGrid, "grid is not strictly increasing at entry " + std::to_string(i));
    }
}

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        fail(ErrorKind::InvalidGrid, "log grid needs 0 < lo < hi and at least two points");
    std::vector<double> w(points);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < points; ++i)
        w[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    w.front() = lo;
    w.back() = hi;
    return FrequencyGrid(std::move(w));
}

}  // namespace gridcert
