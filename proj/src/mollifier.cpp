#include "sgdelta/mollifier.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdelta/error.hpp"

namespace sgd {

double MollifierProfile::pair(const Grid1D& grid, std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t i = first_; i <= last_; ++i) s += grid.weight(i) * samples_[i] * f[i];
    return s;
}

MollifierProfile mollifier_profile(const Grid1D& grid, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw InvalidArgument(fmt::format("mollifier width must be positive, got {}", epsilon));
    }
    if (epsilon < 2.0 * grid.spacing() * (1.0 - 1e-12)) {
        throw UnresolvedMollifier(fmt::format(
            "mollifier width {} is below 2*dx = {}", epsilon, 2.0 * grid.spacing()));
    }
    if (epsilon >= grid.half_width()) {
        throw InvalidArgument(fmt::format("mollifier width {} does not fit in the domain", epsilon));
    }

    MollifierProfile p;
    p.epsilon_ = epsilon;
    p.samples_.assign(grid.size(), 0.0);

    const std::size_t z = grid.zero_index();
    const auto reach = static_cast<std::size_t>(std::floor(epsilon / grid.spacing()));
    p.first_ = z - reach;
    p.last_ = z + reach;

    double mass = 0.0;
    for (std::size_t i = p.first_; i <= p.last_; ++i) {
        const double s = grid.x(i) / epsilon;
        const double v = (std::abs(s) < 1.0) ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
        p.samples_[i] = v;
        mass += grid.weight(i) * v;
    }
    for (std::size_t i = p.first_; i <= p.last_; ++i) p.samples_[i] /= mass;

    double check = 0.0;
    for (std::size_t i = p.first_; i <= p.last_; ++i) check += grid.weight(i) * p.samples_[i];
    p.mass_ = check;
    return p;
}

}  // namespace sgd
