#pragma once

#include <set>
#include <string>

#include <Eigen/Dense>

#include "memsim/errors.hpp"
#include "memsim/materials.hpp"

namespace memsim {

using Voigt6 = Eigen::Matrix<double, 6, 1>;
using Stiffness6 = Eigen::Matrix<double, 6, 6>;

enum class PhysicsBlock { Thermoelastic, Electrothermal, Piezoelectric };

/// Scenario-level physics selection.
struct PhysicsBlockConfig {
    std::set<PhysicsBlock> blocks{PhysicsBlock::Thermoelastic};
    double ambient_temperature = units::celsius_to_kelvin(20.0); // K
    double film_coefficient = 0.0;                               // W/(m^2 K)

    bool has(PhysicsBlock b) const { return blocks.count(b) > 0; }
};

/// Voigt order xx, yy, zz, xy, yz, zx with engineering shear strains.
inline Voigt6 to_voigt_strain(const Eigen::Matrix3d& e) {
    Voigt6 v;
    v << e(0, 0), e(1, 1), e(2, 2), e(0, 1) + e(1, 0), e(1, 2) + e(2, 1), e(0, 2) + e(2, 0);
    return v;
}

inline Eigen::Matrix3d from_voigt_stress(const Voigt6& s) {
    Eigen::Matrix3d m;
    m << s[0], s[3], s[5],
         s[3], s[1], s[4],
         s[5], s[4], s[2];
    return m;
}

/// Identity-strain vector: the Voigt image of the unit tensor.
inline const Voigt6& voigt_identity() {
    static const Voigt6 m = (Voigt6() << 1, 1, 1, 0, 0, 0).finished();
    return m;
}

/// Isotropic elasticity matrix from (E, nu), engineering-shear convention.
inline Stiffness6 isotropic_stiffness(double youngs_modulus, double poisson_ratio) {
    const double E = youngs_modulus, nu = poisson_ratio;
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = E / (2.0 * (1.0 + nu));
    Stiffness6 C = Stiffness6::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) C(i, j) = lambda;
    for (int i = 0; i < 3; ++i) C(i, i) += 2.0 * mu;
    for (int i = 3; i < 6; ++i) C(i, i) = mu;
    return C;
}

inline Stiffness6 isotropic_stiffness(const MaterialSpec& m) {
    return isotropic_stiffness(m.youngs_modulus, m.poisson_ratio);
}

/// Stress from strain, local temperature and the layer's release eigenstrain:
///   S = C : (E - g I),  g = -misfit + alpha (T - T_release).
/// The misfit sign follows misfit_strain(): a tensile layer carries positive
/// misfit, its stress-free state is shorter than the as-built reference.
inline Eigen::Matrix3d thermo_stress(const Eigen::Matrix3d& strain, double temperature,
                                     const MaterialSpec& material, double misfit,
                                     double release_temperature) {
    const double g = -misfit + material.thermal_expansion * (temperature - release_temperature);
    const Voigt6 ev = to_voigt_strain(strain) - g * voigt_identity();
    return from_voigt_stress(isotropic_stiffness(material) * ev);
}

/// Volumetric Joule heating q = sigma_e |grad phi|^2, with its gradient
/// d q / d grad(phi) = 2 sigma_e grad(phi) for the tangent.
struct JouleSource {
    double q;                   // W/m^3
    Eigen::Vector3d dq_dgrad;   // W/m^3 per (V/m)
};

inline JouleSource joule_source(const Eigen::Vector3d& potential_gradient,
                                const MaterialSpec& material) {
    if (!material.electrical_conductivity)
        throw ConfigError("material \"" + material.name +
                          "\" has no electrical_conductivity but carries electric current");
    const double sigma = *material.electrical_conductivity;
    return {sigma * potential_gradient.squaredNorm(), 2.0 * sigma * potential_gradient};
}

/// Linear piezoelectricity in stress-charge form, z-poled:
///   stress = C eps - e^T E_f,   D = e eps + kappa E_f.
struct PiezoResponse {
    Eigen::Matrix3d stress;              // Pa
    Eigen::Vector3d electric_displacement; // C/m^2
};

inline PiezoResponse piezo_constitutive(const Eigen::Matrix3d& strain,
                                        const Eigen::Vector3d& electric_field,
                                        const MaterialSpec& material) {
    if (!material.piezo_coupling || !material.permittivity)
        throw ConfigError("material \"" + material.name +
                          "\" lacks piezo_coupling/permittivity but is used as a piezoelectric");
    const Voigt6 ev = to_voigt_strain(strain);
    const Voigt6 sv =
        isotropic_stiffness(material) * ev - (*material.piezo_coupling) * electric_field;
    PiezoResponse out;
    out.stress = from_voigt_stress(sv);
    out.electric_displacement =
        material.piezo_coupling->transpose() * ev + (*material.permittivity) * electric_field;
    return out;
}

/// Von Mises norm of a stress tensor.
inline double von_mises(const Eigen::Matrix3d& s) {
    const Eigen::Matrix3d dev = s - (s.trace() / 3.0) * Eigen::Matrix3d::Identity();
    return std::sqrt(1.5 * dev.squaredNorm());
}

} // namespace memsim
