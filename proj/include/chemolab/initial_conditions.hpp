#pragma once

#include <cstdint>
#include <string>

#include "chemolab/core_types.hpp"

namespace chemolab {

enum class ProfileKind { constant, cosine, sine, random_band };

const char* to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

/// Named generator for one initial field.
///   constant:     base
///   cosine/sine:  base + amplitude · (1/N) Σ_d cos|sin(2π·mode·x_d / L)
///   random_band:  smooth random trigonometric polynomial rescaled so that
///                 its grid minimum is `low` and its grid maximum is `high`
struct Profile {
    ProfileKind kind = ProfileKind::constant;
    double base = 0.0;
    double amplitude = 0.0;
    int mode = 1;
    double low = 0.0;
    double high = 1.0;
    int modes = 8;  // random_band: wavenumber cutoff of the polynomial
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const Profile&) const = default;
};

Field make_field(const Grid& grid, const Profile& profile);

}  // namespace chemolab
