#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "memsim/errors.hpp"
#include "memsim/materials.hpp"

namespace memsim {

/// Result of the closed-form multilayer beam solve. Curvature is signed:
/// positive bends the tip up, away from the substrate. z is measured from the
/// stack bottom.
struct CurvatureResult {
    double curvature = 0.0;       // 1/m
    double radius = 0.0;          // m, 1/|curvature|; +inf for a flat beam
    double midplane_strain = 0.0; // axial strain at z = 0
    double neutral_axis = 0.0;    // m from stack bottom; +inf for a flat beam
    std::vector<std::pair<double, double>> per_layer_axial_stress; // (bottom, top) fiber, Pa
};

/// Deflection profile of a released cantilever: (arc position x, height z).
struct DeflectionProfile {
    std::vector<std::pair<double, double>> points;
    double length = 0.0;
};

/// Minimal layer description for the core beam solve.
struct LaminaLayer {
    double youngs_modulus;   // Pa
    double thickness;        // m
    double inelastic_strain; // stress-free strain relative to the flat reference
};

/// Closed-form equilibrium of a uniaxial multilayer beam whose layer i
/// carries a stress-free strain n_i. Solves the 2x2 system for the strain
/// field eps(z) = eps0 + c*z from zero net axial force and zero net moment
/// about z = 0 (stack bottom), with sigma_i = E_i (eps - n_i). Plain E
/// (uniaxial kinematics) by construction; the 3-D FEM captures Poisson
/// effects independently.
///
/// The reported curvature is -c: the fiber-strain gradient c is negative when
/// the top layers contract hardest, which is the tip-up bend.
inline CurvatureResult laminate_curvature(const std::vector<LaminaLayer>& layers) {
    if (layers.empty()) throw ConfigError("laminate_curvature: no layers");

    double A = 0.0, B = 0.0, D = 0.0, F = 0.0, M = 0.0;
    std::vector<double> z(layers.size() + 1, 0.0);
    for (size_t i = 0; i < layers.size(); ++i) {
        const double z0 = z[i];
        const double z1 = z0 + layers[i].thickness;
        z[i + 1] = z1;
        const double E = layers[i].youngs_modulus;
        const double n = layers[i].inelastic_strain;
        A += E * (z1 - z0);
        B += E * (z1 * z1 - z0 * z0) / 2.0;
        D += E * (z1 * z1 * z1 - z0 * z0 * z0) / 3.0;
        F += E * n * (z1 - z0);
        M += E * n * (z1 * z1 - z0 * z0) / 2.0;
    }

    const double det = A * D - B * B;
    // Cauchy-Schwarz guarantees det > 0 for positive thickness and moduli.
    if (!(det > 0.0) || !std::isfinite(det))
        throw InternalError("laminate_curvature: singular equilibrium system");

    const double eps0 = (D * F - B * M) / det;
    const double c = (A * M - B * F) / det;

    CurvatureResult out;
    out.curvature = -c;
    out.radius = (c == 0.0) ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(c);
    out.midplane_strain = eps0;
    out.neutral_axis = (c == 0.0) ? std::numeric_limits<double>::infinity() : -eps0 / c;
    out.per_layer_axial_stress.reserve(layers.size());
    for (size_t i = 0; i < layers.size(); ++i) {
        const double E = layers[i].youngs_modulus;
        const double n = layers[i].inelastic_strain;
        out.per_layer_axial_stress.emplace_back(E * (eps0 + c * z[i] - n),
                                                E * (eps0 + c * z[i + 1] - n));
    }
    return out;
}

/// Beam solve for a material stack at a uniform temperature offset from
/// release (0 for the as-fabricated shape).
inline CurvatureResult stack_curvature(const StackSpec& stack, double delta_T_operating = 0.0) {
    stack.validate();
    const double temperature = stack.release_temperature + delta_T_operating;
    std::vector<LaminaLayer> layers;
    layers.reserve(stack.layers.size());
    for (const LayerSpec& l : stack.layers)
        layers.push_back({l.material.youngs_modulus, l.thickness,
                          stress_free_strain(l, stack, temperature)});
    return laminate_curvature(layers);
}

/// Curvature evaluated over a caller-provided thickness grid for one layer.
inline std::vector<std::pair<double, CurvatureResult>> sweep_layer_thickness(
    const StackSpec& stack, size_t layer_index, const std::vector<double>& thicknesses,
    double delta_T_operating = 0.0) {
    if (layer_index >= stack.layers.size())
        throw ConfigError("sweep_layer_thickness: layer index " + std::to_string(layer_index) +
                          " out of range (stack has " + std::to_string(stack.layers.size()) +
                          " layers)");
    if (thicknesses.empty())
        throw ConfigError("sweep_layer_thickness: empty thickness list");
    for (double t : thicknesses)
        if (!(t > 0.0)) throw ConfigError("sweep_layer_thickness: thicknesses must be > 0");

    std::vector<std::pair<double, CurvatureResult>> out;
    out.reserve(thicknesses.size());
    StackSpec s = stack;
    for (double t : thicknesses) {
        s.layers[layer_index].thickness = t;
        out.emplace_back(t, stack_curvature(s, delta_T_operating));
    }
    return out;
}

/// Grid point of maximal |curvature|; ties go to the smaller thickness.
inline std::pair<double, double> argmax_curvature(
    const std::vector<std::pair<double, CurvatureResult>>& sweep) {
    if (sweep.empty()) throw ConfigError("argmax_curvature: empty sweep");
    size_t best = 0;
    for (size_t i = 1; i < sweep.size(); ++i) {
        const double k = std::abs(sweep[i].second.curvature);
        const double kb = std::abs(sweep[best].second.curvature);
        if (k > kb || (k == kb && sweep[i].first < sweep[best].first)) best = i;
    }
    return {sweep[best].first, sweep[best].second.curvature};
}

/// Constant-curvature arc anchored horizontally at the origin:
///   x(s) = sin(kappa s)/kappa, z(s) = (1 - cos(kappa s))/kappa.
/// kappa = 0 degenerates to a straight line. Arcs longer than a full circle
/// are rejected.
inline DeflectionProfile arc_profile(double curvature, double length, size_t n_points) {
    if (n_points < 2) throw ConfigError("arc_profile: need at least 2 points");
    if (!(length > 0.0)) throw ConfigError("arc_profile: length must be > 0");
    if (std::abs(curvature) * length > 2.0 * M_PI)
        throw GeometryError("arc_profile: |curvature|*length exceeds a full circle");

    DeflectionProfile p;
    p.length = length;
    p.points.reserve(n_points);
    for (size_t i = 0; i < n_points; ++i) {
        const double s = length * static_cast<double>(i) / static_cast<double>(n_points - 1);
        if (curvature == 0.0) {
            p.points.emplace_back(s, 0.0);
        } else {
            p.points.emplace_back(std::sin(curvature * s) / curvature,
                                  (1.0 - std::cos(curvature * s)) / curvature);
        }
    }
    return p;
}

/// Tip height of the constant-curvature arc: R (1 - cos(L/R)), signed like
/// the curvature.
inline double arc_tip_deflection(double curvature, double length) {
    if (curvature == 0.0) return 0.0;
    return (1.0 - std::cos(curvature * length)) / curvature;
}

struct CircleFit {
    double radius = 0.0;
    std::pair<double, double> center{0.0, 0.0};
    double rms_residual = 0.0; // root-mean-square orthogonal distance
};

/// Algebraic (Kasa) least-squares circle through 2-D points: linear normal
/// equations for (center, radius) minimizing sum (|p-c|^2 - r^2)^2.
/// Coordinates are centered and scaled to unit spread first, so the
/// collinearity threshold is unit-independent. Collinear input is reported as
/// a degenerate fit (radius effectively infinite) rather than a huge unstable
/// circle.
inline CircleFit fit_circle(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw ConfigError("fit_circle: need at least 3 points");

    double mx = 0.0, mz = 0.0;
    for (const auto& [x, z] : points) {
        mx += x;
        mz += z;
    }
    mx /= static_cast<double>(points.size());
    mz /= static_cast<double>(points.size());
    double spread2 = 0.0;
    for (const auto& [x, z] : points)
        spread2 += (x - mx) * (x - mx) + (z - mz) * (z - mz);
    const double scale = std::sqrt(spread2 / static_cast<double>(points.size()));
    if (!(scale > 0.0))
        throw DegenerateInputError("fit_circle: all points coincide");

    Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& [px, pz] : points) {
        const double x = (px - mx) / scale;
        const double z = (pz - mz) / scale;
        const Eigen::Vector3d row(2.0 * x, 2.0 * z, 1.0);
        const double b = x * x + z * z;
        N += row * row.transpose();
        rhs += row * b;
    }

    Eigen::FullPivLU<Eigen::Matrix3d> lu(N);
    lu.setThreshold(1e-12);
    if (lu.rank() < 3)
        throw DegenerateInputError(
            "fit_circle: points are collinear within tolerance; radius effectively infinite");
    const Eigen::Vector3d sol = lu.solve(rhs);

    CircleFit fit;
    const double cx = sol[0], cz = sol[1];
    const double r2 = sol[2] + cx * cx + cz * cz;
    if (!(r2 > 0.0) || !std::isfinite(r2))
        throw DegenerateInputError("fit_circle: degenerate radius");
    fit.radius = std::sqrt(r2) * scale;
    fit.center = {cx * scale + mx, cz * scale + mz};

    double ss = 0.0;
    for (const auto& [px, pz] : points) {
        const double d = std::hypot(px - fit.center.first, pz - fit.center.second) - fit.radius;
        ss += d * d;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(points.size()));
    return fit;
}

} // namespace memsim
