#pragma once

#include <cstddef>
#include <vector>

namespace gridcert {

/// Strictly increasing, positive, finite set of angular frequencies (rad/s).
class FrequencyGrid {
public:
    static constexpr double kDefaultMin = 1e-4;
    static constexpr double kDefaultMax = 1e5;
    static constexpr std::size_t kDefaultPoints = 2000;

    explicit FrequencyGrid(std::vector<double> omegas);

    static FrequencyGrid log_spaced(double lo, double hi, std::size_t points);
    static FrequencyGrid default_grid(std::size_t points = kDefaultPoints) {
        return log_spaced(kDefaultMin, kDefaultMax, points);
    }

    const std::vector<double>& omegas() const noexcept { return omegas_; }
    std::size_t size() const noexcept { return omegas_.size(); }
    double operator[](std::size_t i) const noexcept { return omegas_[i]; }
    double min() const noexcept { return omegas_.front(); }
    double max() const noexcept { return omegas_.back(); }
    auto begin() const noexcept { return omegas_.begin(); }
    auto end() const noexcept { return omegas_.end(); }

private:
    std::vector<double> omegas_;
};

}  // namespace gridcert
