#pragma once

// Finite-difference tangent verification shared by the element unit tests and
// the acceptance suite. The FD side only ever evaluates residuals, so it stays
// independent of the analytic tangent it checks.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "memsim/element.hpp"

namespace memsim::testing {

struct PackedSystem {
    Eigen::VectorXd residual;
    Eigen::MatrixXd tangent;
    int n_u = 0, n_T = 0, n_phi = 0;
};

inline PackedSystem pack(const ElementSystem& es, const ElementPhysics& ph) {
    PackedSystem p;
    p.n_u = ph.mechanical ? 60 : 0;
    p.n_T = ph.thermal ? 20 : 0;
    p.n_phi = (ph.conduction_joule || ph.piezoelectric) ? 20 : 0;
    const int n = p.n_u + p.n_T + p.n_phi;
    p.residual.resize(n);
    p.tangent.setZero(n, n);
    int o = 0;
    if (p.n_u) {
        p.residual.segment(0, 60) = es.r_u;
        p.tangent.block(0, 0, 60, 60) = es.K_uu;
        if (p.n_T) p.tangent.block(0, 60, 60, 20) = es.K_uT;
        if (p.n_phi) p.tangent.block(0, p.n_u + p.n_T, 60, 20) = es.K_uphi;
        o = 60;
    }
    if (p.n_T) {
        p.residual.segment(o, 20) = es.r_T;
        p.tangent.block(o, o, 20, 20) = es.K_TT;
        if (p.n_phi) p.tangent.block(o, p.n_u + p.n_T, 20, 20) = es.K_Tphi;
        o += 20;
    }
    if (p.n_phi) {
        p.residual.segment(o, 20) = es.r_phi;
        p.tangent.block(o, o, 20, 20) = es.K_phiphi;
        if (p.n_u && ph.piezoelectric) p.tangent.block(o, 0, 20, 60) = es.K_phiu;
    }
    return p;
}

inline void apply_dof(ElementState& st, const ElementPhysics& ph, int dof, double value) {
    const int n_u = ph.mechanical ? 60 : 0;
    const int n_T = ph.thermal ? 20 : 0;
    if (dof < n_u) {
        st.u(dof / 3, dof % 3) += value;
    } else if (dof < n_u + n_T) {
        st.T[dof - n_u] += value;
    } else {
        st.phi[dof - n_u - n_T] += value;
    }
}

inline double dof_step(const ElementPhysics& ph, int dof) {
    const int n_u = ph.mechanical ? 60 : 0;
    const int n_T = ph.thermal ? 20 : 0;
    // displacement steps resolve the cubic terms; T and phi enter the
    // residual at most quadratically, where central differences are exact.
    if (dof < n_u) return 1e-10;
    if (dof < n_u + n_T) return 1.0;
    return 1e-2;
}

/// Largest relative column error between the analytic tangent and central
/// finite differences of the residual.
inline double max_tangent_column_error(const ElementState& st, const ElementPhysics& ph) {
    const PackedSystem base = pack(element_residual_tangent(st, ph), ph);
    const int n = static_cast<int>(base.residual.size());

    Eigen::MatrixXd fd(n, n);
    for (int j = 0; j < n; ++j) {
        const double h = dof_step(ph, j);
        ElementState plus = st, minus = st;
        apply_dof(plus, ph, j, h);
        apply_dof(minus, ph, j, -h);
        const PackedSystem rp = pack(element_residual_tangent(plus, ph), ph);
        const PackedSystem rm = pack(element_residual_tangent(minus, ph), ph);
        fd.col(j) = (rp.residual - rm.residual) / (2.0 * h);
    }

    const double floor = 1e-9 * base.tangent.colwise().norm().maxCoeff();
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double denom = std::max(base.tangent.col(j).norm(), floor);
        if (denom == 0.0) continue;
        worst = std::max(worst, (base.tangent.col(j) - fd.col(j)).norm() / denom);
    }
    return worst;
}

/// A mildly distorted single element of the given size with randomized state.
inline std::pair<ElementState, ElementPhysics> random_element_state(
    std::mt19937& rng, const MaterialSpec& material, bool mech, bool thermal, bool joule,
    bool piezo, bool finite_strain, double size = 1e-6) {
    std::uniform_real_distribution<double> jitter(-0.04 * size, 0.04 * size);
    std::uniform_real_distribution<double> du(-2e-9, 2e-9);
    std::uniform_real_distribution<double> dT(0.0, 40.0);
    std::uniform_real_distribution<double> dphi(-0.3, 0.3);
    std::uniform_real_distribution<double> dmis(-2.5e-3, 2.5e-3);
    std::uniform_real_distribution<double> dlam(0.2, 1.0);

    ElementState st;
    const auto& ref = hex20::node_coords();
    for (int a = 0; a < hex20::kNodes; ++a) {
        for (int d = 0; d < 3; ++d)
            st.X(a, d) = 0.5 * size * (ref[a][d] + 1.0) + jitter(rng);
        for (int d = 0; d < 3; ++d) st.u(a, d) = mech ? du(rng) : 0.0;
        st.T[a] = 293.15 + (thermal ? dT(rng) : 0.0);
        st.phi[a] = (joule || piezo) ? dphi(rng) : 0.0;
    }
    st.lambda = dlam(rng);

    ElementPhysics ph;
    ph.material = &material;
    ph.base_eigenstrain = dmis(rng);
    ph.ambient_temperature = 293.15;
    ph.mechanical = mech;
    ph.thermal = thermal;
    ph.conduction_joule = joule;
    ph.piezoelectric = piezo;
    ph.finite_strain = finite_strain;
    return {st, ph};
}

} // namespace memsim::testing
