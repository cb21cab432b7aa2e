#pragma once

#include <Eigen/Dense>

#include "memsim/errors.hpp"
#include "memsim/hex20.hpp"
#include "memsim/materials.hpp"
#include "memsim/physics.hpp"

namespace memsim {

/// Thrown when the deformation map loses positivity at a quadrature point;
/// the continuation driver halves the load step in response.
class ElementInversionError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Per-element physics description, fixed during a solve.
struct ElementPhysics {
    const MaterialSpec* material = nullptr;
    double base_eigenstrain = 0.0; // stress-free strain at ambient, scaled by lambda
    double ambient_temperature = 0.0;
    bool mechanical = true;
    bool thermal = false;          // temperature field active
    bool conduction_joule = false; // heater element: phi conduction + Joule source
    bool piezoelectric = false;    // piezo element: phi electrostatics + coupling
    bool finite_strain = true;
};

/// Nodal state of one element.
struct ElementState {
    Eigen::Matrix<double, hex20::kNodes, 3> X;   // reference coordinates
    Eigen::Matrix<double, hex20::kNodes, 3> u;    // displacements
    Eigen::Matrix<double, hex20::kNodes, 1> T;    // absolute temperature
    Eigen::Matrix<double, hex20::kNodes, 1> phi;  // electric potential
    double lambda = 1.0;                          // eigenstrain load factor
};

/// Residual and consistent tangent blocks of one element. Missing physics
/// leave their blocks zero. d(r_T)/d(u) and d(r_phi)/d(T) vanish for the
/// implemented blocks (reference-configuration conduction, constant
/// conductivities), so those blocks are not stored.
struct ElementSystem {
    Eigen::Matrix<double, 60, 1> r_u = Eigen::Matrix<double, 60, 1>::Zero();
    Eigen::Matrix<double, 20, 1> r_T = Eigen::Matrix<double, 20, 1>::Zero();
    Eigen::Matrix<double, 20, 1> r_phi = Eigen::Matrix<double, 20, 1>::Zero();
    Eigen::Matrix<double, 60, 60> K_uu = Eigen::Matrix<double, 60, 60>::Zero();
    Eigen::Matrix<double, 60, 20> K_uT = Eigen::Matrix<double, 60, 20>::Zero();
    Eigen::Matrix<double, 60, 20> K_uphi = Eigen::Matrix<double, 60, 20>::Zero();
    Eigen::Matrix<double, 20, 60> K_phiu = Eigen::Matrix<double, 20, 60>::Zero();
    Eigen::Matrix<double, 20, 20> K_TT = Eigen::Matrix<double, 20, 20>::Zero();
    Eigen::Matrix<double, 20, 20> K_Tphi = Eigen::Matrix<double, 20, 20>::Zero();
    Eigen::Matrix<double, 20, 20> K_phiphi = Eigen::Matrix<double, 20, 20>::Zero();
};

namespace detail {

/// Strain-displacement operator row block for node a at the current
/// deformation: delta E_voigt = sum_a B_a delta u_a.
inline Eigen::Matrix<double, 6, 3> strain_displacement(const Eigen::Matrix3d& F,
                                                       const Eigen::Vector3d& G) {
    Eigen::Matrix<double, 6, 3> B;
    for (int i = 0; i < 3; ++i) {
        B(0, i) = F(i, 0) * G[0];
        B(1, i) = F(i, 1) * G[1];
        B(2, i) = F(i, 2) * G[2];
        B(3, i) = F(i, 0) * G[1] + F(i, 1) * G[0];
        B(4, i) = F(i, 1) * G[2] + F(i, 2) * G[1];
        B(5, i) = F(i, 0) * G[2] + F(i, 2) * G[0];
    }
    return B;
}

} // namespace detail

/// Total-Lagrangian multiphysics element kernel for the 20-node hexahedron.
///
/// Mechanics: Green-Lagrange strain E = (F^T F - I)/2, Saint Venant-Kirchhoff
/// stress S = C : (E - g I) with the inelastic strain
///   g = lambda * g0 + alpha (T - T_ambient),
/// g0 the layer's stress-free strain at ambient. The tangent carries the
/// material block, the initial-stress (geometric) block, and the
/// thermo-mechanical column K_uT = -int B^T C alpha m N dV, which is what
/// lets Newton treat the thermal stress as an internal force. With the
/// finite-strain flag off the kernel degenerates to small-strain kinematics.
///
/// Heat: steady conduction with the Joule source q = sigma_e |grad phi|^2 on
/// conducting elements; the K_Tphi block carries dq/dphi.
///
/// Electricity: charge conduction on heater elements, electrostatics with
/// piezoelectric coupling on piezo elements (residual -int grad(dphi) . D dV,
/// so K_phiphi stays positive definite).
inline ElementSystem element_residual_tangent(const ElementState& st,
                                              const ElementPhysics& ph) {
    ElementSystem out;
    const MaterialSpec& mat = *ph.material;
    const Stiffness6 C = isotropic_stiffness(mat);
    const double alpha = mat.thermal_expansion;
    const Voigt6& m = voigt_identity();
    const Voigt6 Cm = C * m;

    Eigen::Matrix<double, hex20::kNodes, 1> N;
    Eigen::Matrix<double, hex20::kNodes, 3> dN;
    // Temperature offset from ambient: keeps the stress-free reference state
    // exactly residual-free and avoids absolute-scale cancellation.
    const Eigen::Matrix<double, hex20::kNodes, 1> theta =
        st.T.array() - ph.ambient_temperature;

    for (const auto& qp : hex20::quadrature()) {
        hex20::shape_eval(qp.xi, N, dN);
        const Eigen::Matrix3d J = st.X.transpose() * dN;
        const double detJ = J.determinant();
        if (!(detJ > 0.0))
            throw MeshError("element kernel: non-positive reference Jacobian");
        const double w = qp.weight * detJ;
        // Material gradients of the basis: G(a,:) = dN_a/dX.
        const Eigen::Matrix<double, hex20::kNodes, 3> G = dN * J.inverse();

        const Eigen::Matrix3d H = st.u.transpose() * G; // du_i/dX_j
        Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
        Eigen::Matrix3d Ften = Eigen::Matrix3d::Identity(); // operator F in B
        Eigen::Matrix3d Egl;
        if (ph.finite_strain) {
            F += H;
            if (!(F.determinant() > 0.0))
                throw ElementInversionError("element inverted: det(F) <= 0 at a quadrature point");
            Egl = 0.5 * (F.transpose() * F - Eigen::Matrix3d::Identity());
            Ften = F;
        } else {
            Egl = 0.5 * (H + H.transpose());
        }

        if (!ph.mechanical && !ph.thermal && !ph.conduction_joule && !ph.piezoelectric)
            continue;

        const double theta_q = N.dot(theta);
        const Eigen::Vector3d gradT = G.transpose() * theta;
        const Eigen::Vector3d gradPhi = G.transpose() * st.phi;

        Eigen::Matrix<double, 6, 60> Bmat;
        if (ph.mechanical || ph.piezoelectric)
            for (int a = 0; a < hex20::kNodes; ++a)
                Bmat.block<6, 3>(0, 3 * a) =
                    detail::strain_displacement(Ften, G.row(a).transpose());

        if (ph.mechanical) {
            const double g = st.lambda * ph.base_eigenstrain +
                             (ph.thermal ? alpha * theta_q : 0.0);
            Voigt6 S = C * (to_voigt_strain(Egl) - g * m);
            if (ph.piezoelectric) {
                const Eigen::Vector3d Ef = -gradPhi;
                S -= (*mat.piezo_coupling) * Ef;
            }

            out.r_u.noalias() += w * (Bmat.transpose() * S);
            out.K_uu.noalias() += w * (Bmat.transpose() * (C * Bmat));
            if (ph.finite_strain) {
                // initial-stress block: (G S G^T)_{ab} on each displacement
                // diagonal
                const Eigen::Matrix<double, hex20::kNodes, hex20::kNodes> geo =
                    G * from_voigt_stress(S) * G.transpose();
                for (int a = 0; a < hex20::kNodes; ++a)
                    for (int b = 0; b < hex20::kNodes; ++b) {
                        const double v = w * geo(a, b);
                        out.K_uu(3 * a, 3 * b) += v;
                        out.K_uu(3 * a + 1, 3 * b + 1) += v;
                        out.K_uu(3 * a + 2, 3 * b + 2) += v;
                    }
            }
            if (ph.thermal)
                out.K_uT.noalias() -= (w * alpha) * (Bmat.transpose() * Cm) * N.transpose();
            if (ph.piezoelectric) {
                const Eigen::Matrix<double, 60, 20> cpl =
                    Bmat.transpose() * ((*mat.piezo_coupling) * G.transpose());
                out.K_uphi.noalias() += w * cpl;
                out.K_phiu.noalias() += w * cpl.transpose();
            }
        }

        if (ph.thermal) {
            const double k = mat.thermal_conductivity;
            out.r_T.noalias() += (w * k) * (G * gradT);
            out.K_TT.noalias() += (w * k) * (G * G.transpose());
            if (ph.conduction_joule) {
                const JouleSource js = joule_source(gradPhi, mat);
                out.r_T.noalias() -= (w * js.q) * N;
                out.K_Tphi.noalias() -= w * N * (js.dq_dgrad.transpose() * G.transpose());
            }
        }

        if (ph.conduction_joule) {
            const double sigma = *mat.electrical_conductivity;
            out.r_phi.noalias() += (w * sigma) * (G * gradPhi);
            out.K_phiphi.noalias() += (w * sigma) * (G * G.transpose());
        } else if (ph.piezoelectric) {
            // Charge balance written as +int grad(dphi).D dV so the coupled
            // element matrix is the symmetric Hessian of the electric
            // enthalpy (K_uphi = K_phiu^T, K_phiphi negative definite).
            const Eigen::Vector3d Ef = -gradPhi;
            const Eigen::Vector3d D =
                mat.piezo_coupling->transpose() * to_voigt_strain(Egl) + (*mat.permittivity) * Ef;
            out.r_phi.noalias() += w * (G * D);
            out.K_phiphi.noalias() -= w * (G * (*mat.permittivity) * G.transpose());
        }
    }
    return out;
}

/// Saint Venant-Kirchhoff strain energy of the element (mechanical part),
/// used by the objectivity checks.
inline double element_strain_energy(const ElementState& st, const ElementPhysics& ph) {
    const MaterialSpec& mat = *ph.material;
    const Stiffness6 C = isotropic_stiffness(mat);
    const Voigt6& m = voigt_identity();
    double energy = 0.0;
    Eigen::Matrix<double, hex20::kNodes, 1> N;
    Eigen::Matrix<double, hex20::kNodes, 3> dN;
    for (const auto& qp : hex20::quadrature()) {
        hex20::shape_eval(qp.xi, N, dN);
        const Eigen::Matrix3d J = st.X.transpose() * dN;
        const double detJ = J.determinant();
        const Eigen::Matrix<double, hex20::kNodes, 3> G = dN * J.inverse();
        const Eigen::Matrix3d H = st.u.transpose() * G;
        Eigen::Matrix3d Egl;
        if (ph.finite_strain) {
            const Eigen::Matrix3d F = Eigen::Matrix3d::Identity() + H;
            Egl = 0.5 * (F.transpose() * F - Eigen::Matrix3d::Identity());
        } else {
            Egl = 0.5 * (H + H.transpose());
        }
        const double Tq = N.dot(st.T);
        const double g = st.lambda * ph.base_eigenstrain +
                         (ph.thermal ? mat.thermal_expansion * (Tq - ph.ambient_temperature) : 0.0);
        const Voigt6 ev = to_voigt_strain(Egl) - g * m;
        energy += qp.weight * detJ * 0.5 * ev.dot(C * ev);
    }
    return energy;
}

/// Second Piola-Kirchhoff stress at the element centroid (for output).
inline Eigen::Matrix3d element_centroid_stress(const ElementState& st,
                                               const ElementPhysics& ph) {
    Eigen::Matrix<double, hex20::kNodes, 1> N;
    Eigen::Matrix<double, hex20::kNodes, 3> dN;
    hex20::shape_eval(Eigen::Vector3d::Zero(), N, dN);
    const Eigen::Matrix3d J = st.X.transpose() * dN;
    const Eigen::Matrix<double, hex20::kNodes, 3> G = dN * J.inverse();
    const Eigen::Matrix3d H = st.u.transpose() * G;
    Eigen::Matrix3d Egl;
    if (ph.finite_strain) {
        const Eigen::Matrix3d F = Eigen::Matrix3d::Identity() + H;
        Egl = 0.5 * (F.transpose() * F - Eigen::Matrix3d::Identity());
    } else {
        Egl = 0.5 * (H + H.transpose());
    }
    const double Tq = N.dot(st.T);
    const MaterialSpec& mat = *ph.material;
    const double g = st.lambda * ph.base_eigenstrain +
                     (ph.thermal ? mat.thermal_expansion * (Tq - ph.ambient_temperature) : 0.0);
    Voigt6 S = isotropic_stiffness(mat) * (to_voigt_strain(Egl) - g * voigt_identity());
    if (ph.piezoelectric) {
        const Eigen::Vector3d Ef = -(G.transpose() * st.phi);
        S -= (*mat.piezo_coupling) * Ef;
    }
    return from_voigt_stress(S);
}

} // namespace memsim
