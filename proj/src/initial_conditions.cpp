#include "chemolab/initial_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace chemolab {

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::constant: return "constant";
        case ProfileKind::cosine: return "cosine";
        case ProfileKind::sine: return "sine";
        case ProfileKind::random_band: return "random_band";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "constant") return ProfileKind::constant;
    if (s == "cosine") return ProfileKind::cosine;
    if (s == "sine") return ProfileKind::sine;
    if (s == "random_band") return ProfileKind::random_band;
    throw InvalidParameter("unknown initial profile '" + s + "'");
}

void Profile::validate() const {
    if (!std::isfinite(base) || !std::isfinite(amplitude)) throw InvalidParameter("profile values must be finite");
    if (kind == ProfileKind::random_band) {
        if (!(low <= high) || !std::isfinite(low) || !std::isfinite(high)) {
            throw InvalidParameter("random_band needs finite low <= high");
        }
        if (modes < 1) throw InvalidParameter("random_band needs modes >= 1");
    }
}

Field make_field(const Grid& grid, const Profile& profile) {
    profile.validate();
    Field f(grid, profile.base);
    const double two_pi_over_L = 2.0 * std::numbers::pi / grid.extent();
    const int dim = grid.dim();

    switch (profile.kind) {
        case ProfileKind::constant:
            break;
        case ProfileKind::cosine:
        case ProfileKind::sine: {
            const bool cosine = profile.kind == ProfileKind::cosine;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto idx = grid.unflatten(i);
                double s = 0.0;
                for (int d = 0; d < dim; ++d) {
                    const double arg = two_pi_over_L * profile.mode * grid.coord(idx[static_cast<std::size_t>(d)]);
                    s += cosine ? std::cos(arg) : std::sin(arg);
                }
                f[i] = profile.base + profile.amplitude * s / dim;
            }
            break;
        }
        case ProfileKind::random_band: {
            // Random wavevectors with integer components in [−modes, modes],
            // amplitudes ~ U(−1, 1)/|m|, uniform phases.
            std::mt19937_64 rng(profile.seed);
            std::uniform_int_distribution<int> comp(-profile.modes, profile.modes);
            std::uniform_real_distribution<double> amp(-1.0, 1.0);
            std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
            const int terms = 4 * profile.modes;
            std::vector<double> values(grid.size(), 0.0);
            for (int term = 0; term < terms; ++term) {
                int m[3] = {0, 0, 0};
                double norm2 = 0.0;
                while (norm2 == 0.0) {
                    norm2 = 0.0;
                    for (int d = 0; d < dim; ++d) {
                        m[d] = comp(rng);
                        norm2 += static_cast<double>(m[d]) * m[d];
                    }
                }
                const double a = amp(rng) / std::sqrt(norm2);
                const double ph = phase(rng);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const auto idx = grid.unflatten(i);
                    double arg = ph;
                    for (int d = 0; d < dim; ++d) {
                        arg += two_pi_over_L * m[d] * grid.coord(idx[static_cast<std::size_t>(d)]);
                    }
                    values[i] += a * std::cos(arg);
                }
            }
            double lo = values[0], hi = values[0];
            for (double x : values) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            const double span = hi - lo;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                f[i] = span > 0.0 ? profile.low + (profile.high - profile.low) * (values[i] - lo) / span
                                  : 0.5 * (profile.low + profile.high);
            }
            break;
        }
    }
    return f;
}

}  // namespace chemolab
