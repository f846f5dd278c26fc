#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kglab {

/// Thrown when a scenario or operation is given invalid inputs.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an adaptive quadrature or path integral fails to converge.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a velocity is requested where the energy density is below
/// the vacuum floor.
class VacuumRegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// c, hbar and the field mass parameter. Defaults are natural units
/// c = hbar = m = 1, where the Compton frequency omega0 = m c^2 / hbar
/// equals 1 and all c-factor conventions for the group velocity coincide.
struct PhysicalConstants {
    double c = 1.0;
    double hbar = 1.0;
    double m = 1.0;

    PhysicalConstants() = default;
    PhysicalConstants(double c_, double hbar_, double m_) : c(c_), hbar(hbar_), m(m_) {
        validate();
    }

    void validate() const {
        if (!(c > 0.0) || !(hbar > 0.0) || !(m > 0.0))
            throw ValidationError("physical constants must be positive and finite");
        if (std::isnan(c) || std::isnan(hbar) || std::isnan(m))
            throw ValidationError("physical constants must not be NaN");
    }

    /// Compton angular frequency m c^2 / hbar.
    double omega0() const { return m * c * c / hbar; }

    /// Compton wavenumber m c / hbar (the scale of k_max in alpha).
    double compton_k() const { return m * c / hbar; }

    /// Planck constant h = 2 pi hbar.
    double h() const { return 2.0 * std::numbers::pi * hbar; }

    bool is_natural() const { return c == 1.0 && hbar == 1.0 && m == 1.0; }
};

/// Power of c used when forming the local group velocity from a
/// stress-energy sample. The two definitions coincide in natural units;
/// in SI-like units the printed definitions are dimensionally ambiguous,
/// so the choice is explicit rather than guessed.
enum class VelocityConvention {
    /// v = c^2 * t0i / t00 with t0i the energy flux density. Dimensionally
    /// a velocity for any unit system; the default.
    flux_over_energy,
    /// v = c * t0i / t00, matching the definition as printed. Identical to
    /// the above in natural units.
    c_times_ratio,
};

} // namespace kglab
