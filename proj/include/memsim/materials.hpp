#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memsim/errors.hpp"
#include "memsim/units.hpp"

namespace memsim {

/// Piezoelectric stress coupling (stress-charge form), 6x3: maps an electric
/// field vector to a stress contribution. Voigt order xx,yy,zz,xy,yz,zx.
using PiezoCoupling = Eigen::Matrix<double, 6, 3>;

/// Constants of one material. All values SI.
struct MaterialSpec {
    std::string name;
    double youngs_modulus = 0.0;       // Pa
    double poisson_ratio = 0.0;
    double thermal_expansion = 0.0;    // 1/K
    double thermal_conductivity = 0.0; // W/(m K)
    std::optional<double> electrical_conductivity;  // S/m, heater materials
    std::optional<PiezoCoupling> piezo_coupling;    // C/m^2
    std::optional<Eigen::Matrix3d> permittivity;    // F/m

    void validate() const {
        if (!(youngs_modulus > 0.0))
            throw ConfigError("material \"" + name + "\": youngs_modulus must be > 0");
        if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
            throw ConfigError("material \"" + name + "\": poisson_ratio must be in (-1, 0.5)");
        if (!std::isfinite(thermal_expansion))
            throw ConfigError("material \"" + name + "\": thermal_expansion must be finite");
        if (thermal_conductivity < 0.0)
            throw ConfigError("material \"" + name + "\": thermal_conductivity must be >= 0");
        if (electrical_conductivity && *electrical_conductivity < 0.0)
            throw ConfigError("material \"" + name + "\": electrical_conductivity must be >= 0");
        if (permittivity) {
            const Eigen::Matrix3d& p = *permittivity;
            if (!p.isApprox(p.transpose(), 1e-12))
                throw ConfigError("material \"" + name + "\": permittivity must be symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(p);
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw ConfigError("material \"" + name + "\": permittivity must be positive definite");
        }
    }
};

/// z-poled piezo coupling from the two independent constants.
inline PiezoCoupling make_z_poled_coupling(double e31, double e33) {
    PiezoCoupling e = PiezoCoupling::Zero();
    e(0, 2) = e31;
    e(1, 2) = e31;
    e(2, 2) = e33;
    return e;
}

/// One deposited layer of a stack.
struct LayerSpec {
    MaterialSpec material;
    double thickness = 0.0;              // m
    double deposition_temperature = 0.0; // K
};

/// Bottom-to-top layer stack on a silicon handle; index 0 is the substrate side.
struct StackSpec {
    std::vector<LayerSpec> layers;
    MaterialSpec substrate_material;
    double release_temperature = units::celsius_to_kelvin(20.0); // K
    double width = 0.0;  // m
    double length = 0.0; // m

    double total_thickness() const {
        double t = 0.0;
        for (const auto& l : layers) t += l.thickness;
        return t;
    }

    void validate() const {
        if (layers.empty()) throw ConfigError("stack: at least one layer required");
        for (size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            l.material.validate();
            if (!(l.thickness > 0.0))
                throw ConfigError("layers[" + std::to_string(i) + "].thickness must be > 0");
            if (l.deposition_temperature < release_temperature - 1e-9)
                throw ConfigError("layers[" + std::to_string(i) +
                                  "].deposition_temperature below the stack release temperature");
        }
        substrate_material.validate();
        if (!(total_thickness() > 0.0)) throw ConfigError("stack: total thickness must be > 0");
        if (!(width > 0.0)) throw ConfigError("stack.width must be > 0");
        if (!(length > 0.0)) throw ConfigError("stack.length must be > 0");
    }
};

/// Registered built-in materials. Si and Si3N4 carry the measured bilayer
/// constants; Al, poly-Si and AlN are handbook defaults, overridable in config.
inline const std::map<std::string, MaterialSpec>& builtin_materials() {
    static const std::map<std::string, MaterialSpec> registry = [] {
        std::map<std::string, MaterialSpec> m;

        MaterialSpec si{.name = "Si",
                        .youngs_modulus = 130.0e9,
                        .poisson_ratio = 0.279,
                        .thermal_expansion = 2.33e-6,
                        .thermal_conductivity = 150.0};
        m[si.name] = si;

        MaterialSpec sin{.name = "Si3N4",
                         .youngs_modulus = 270.0e9,
                         .poisson_ratio = 0.270,
                         .thermal_expansion = 6.06e-6,
                         .thermal_conductivity = 20.0};
        m[sin.name] = sin;

        MaterialSpec al{.name = "Al",
                        .youngs_modulus = 70.0e9,
                        .poisson_ratio = 0.35,
                        .thermal_expansion = 23.1e-6,
                        .thermal_conductivity = 237.0};
        al.electrical_conductivity = 3.5e7;
        m[al.name] = al;

        MaterialSpec poly{.name = "poly-Si-heater",
                          .youngs_modulus = 160.0e9,
                          .poisson_ratio = 0.22,
                          .thermal_expansion = 2.6e-6,
                          .thermal_conductivity = 30.0};
        poly.electrical_conductivity = 5.0e4;
        m[poly.name] = poly;

        MaterialSpec aln{.name = "AlN-piezo",
                         .youngs_modulus = 330.0e9,
                         .poisson_ratio = 0.24,
                         .thermal_expansion = 4.5e-6,
                         .thermal_conductivity = 160.0};
        aln.piezo_coupling = make_z_poled_coupling(-0.58, 1.55);
        aln.permittivity = 9.0e-11 * Eigen::Matrix3d::Identity();
        m[aln.name] = aln;

        for (auto& [k, v] : m) v.validate();
        return m;
    }();
    return registry;
}

/// Look up a registered material by name.
inline const MaterialSpec& builtin_material(const std::string& name) {
    const auto& reg = builtin_materials();
    auto it = reg.find(name);
    if (it == reg.end()) {
        std::string names;
        for (const auto& [k, v] : reg) {
            if (!names.empty()) names += ", ";
            names += k;
        }
        throw ConfigError("unknown material \"" + name + "\"; available: " + names);
    }
    return it->second;
}

/// Eigenstrain the layer carries at release, measured relative to the
/// substrate: a layer deposited stress-free at T_dep while attached to the
/// handle is strained by (alpha_layer - alpha_sub) * (T_dep - T_release) once
/// the wafer is back at release temperature. Positive for a tensile layer
/// (Si3N4 on Si).
inline double misfit_strain(const LayerSpec& layer, const StackSpec& stack) {
    return (layer.material.thermal_expansion - stack.substrate_material.thermal_expansion) *
           (layer.deposition_temperature - stack.release_temperature);
}

/// Stress-free (natural) in-plane strain of a layer at temperature T,
/// measured against the as-built flat geometry at release temperature.
/// The released beam relaxes toward this strain: a tensile layer (positive
/// misfit) wants to be shorter, heating above release expands every layer.
inline double stress_free_strain(const LayerSpec& layer, const StackSpec& stack,
                                 double temperature) {
    return -misfit_strain(layer, stack) +
           layer.material.thermal_expansion * (temperature - stack.release_temperature);
}

} // namespace memsim
