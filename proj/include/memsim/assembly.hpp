#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "memsim/dofmap.hpp"
#include "memsim/element.hpp"
#include "memsim/mesh.hpp"
#include "memsim/physics.hpp"
#include "memsim/sparse.hpp"

namespace memsim {

/// Loads at a resolved load factor (the continuation driver scales them).
struct ResolvedLoads {
    double misfit_factor = 1.0; // scales every element's base eigenstrain
    const std::vector<FaceRef>* pressure_faces = nullptr;
    double pressure = 0.0; // Pa, dead load along the inward reference normal
    const std::vector<FaceRef>* film_faces = nullptr;
    double film_coefficient = 0.0; // W/(m^2 K)
    double film_ambient = 0.0;     // K
};

struct AssembledSystem {
    Eigen::VectorXd residual; // all dofs; prescribed rows hold reactions
    SparseMatrix tangent;     // free x free
};

namespace detail {

inline ElementState gather_element_state(const Mesh& mesh, const DofMap& dofmap,
                                         const Eigen::VectorXd& x, ElementIndex e,
                                         double ambient, double misfit_factor) {
    ElementState st;
    st.lambda = misfit_factor;
    const auto& conn = mesh.elements[e];
    for (int a = 0; a < hex20::kNodes; ++a) {
        const NodeIndex n = conn[a];
        st.X.row(a) = mesh.node_coords[n].transpose();
        for (int i = 0; i < 3; ++i) {
            const int32_t g = dofmap(n, static_cast<Field>(kUx + i));
            st.u(a, i) = g >= 0 ? x[g] : 0.0;
        }
        const int32_t gt = dofmap(n, kTemp);
        st.T[a] = gt >= 0 ? x[gt] : ambient;
        const int32_t gp = dofmap(n, kPhi);
        st.phi[a] = gp >= 0 ? x[gp] : 0.0;
    }
    return st;
}

/// Reference-configuration quad8 surface integral helper: calls
/// f(face node a, shape value, area-weighted outward normal, scalar weight).
template <typename F>
inline void for_each_face_qp(const Mesh& mesh, const FaceRef& face, F&& f) {
    const auto ids = face_node_ids(mesh, face);
    Eigen::Matrix<double, hex20::kFaceNodes, 3> Xf;
    for (int a = 0; a < hex20::kFaceNodes; ++a)
        Xf.row(a) = mesh.node_coords[ids[a]].transpose();
    Eigen::Matrix<double, hex20::kFaceNodes, 1> N;
    Eigen::Matrix<double, hex20::kFaceNodes, 2> dN;
    for (const auto& qp : hex20::face_quadrature()) {
        hex20::face_shape_eval(qp.u, qp.v, N, dN);
        const Eigen::Vector3d t1 = Xf.transpose() * dN.col(0);
        const Eigen::Vector3d t2 = Xf.transpose() * dN.col(1);
        const Eigen::Vector3d ndA = t1.cross(t2); // outward normal times area measure
        for (int a = 0; a < hex20::kFaceNodes; ++a)
            f(ids[a], N[a], ndA, qp.weight, N);
    }
}

} // namespace detail

/// Scatters element residual/tangent blocks into the global system, reduced
/// to the free dofs (Dirichlet rows and columns eliminated; prescribed values
/// act through the state vector). The full residual is kept so prescribed
/// rows report reactions.
inline AssembledSystem assemble(const Mesh& mesh, const DofMap& dofmap,
                                const std::vector<ElementPhysics>& element_physics,
                                const Eigen::VectorXd& x, const ResolvedLoads& loads) {
    if (element_physics.size() != mesh.element_count())
        throw InternalError("assemble: element physics size mismatch");
    if (x.size() != dofmap.n_dofs())
        throw InternalError("assemble: state size mismatch");

    AssembledSystem sys;
    sys.residual = Eigen::VectorXd::Zero(dofmap.n_dofs());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.element_count() * 3600);

    auto add = [&](int32_t grow, int32_t gcol, double v) {
        const int32_t fr = dofmap.free_index(grow);
        const int32_t fc = dofmap.free_index(gcol);
        if (fr >= 0 && fc >= 0 && v != 0.0) trip.emplace_back(fr, fc, v);
    };

    for (ElementIndex e = 0; e < static_cast<ElementIndex>(mesh.element_count()); ++e) {
        const ElementPhysics& ph = element_physics[e];
        const ElementState st = detail::gather_element_state(mesh, dofmap, x, e,
                                                             ph.ambient_temperature,
                                                             loads.misfit_factor);
        const ElementSystem es = element_residual_tangent(st, ph);
        const auto& conn = mesh.elements[e];

        // Global dof ids per local slot.
        std::array<int32_t, hex20::kNodes * 3> gu;
        std::array<int32_t, hex20::kNodes> gT, gp;
        for (int a = 0; a < hex20::kNodes; ++a) {
            for (int i = 0; i < 3; ++i) gu[3 * a + i] = dofmap(conn[a], static_cast<Field>(kUx + i));
            gT[a] = dofmap(conn[a], kTemp);
            gp[a] = dofmap(conn[a], kPhi);
        }

        if (ph.mechanical) {
            for (int ra = 0; ra < 60; ++ra) {
                if (gu[ra] < 0) continue;
                sys.residual[gu[ra]] += es.r_u[ra];
                for (int cb = 0; cb < 60; ++cb)
                    if (gu[cb] >= 0) add(gu[ra], gu[cb], es.K_uu(ra, cb));
                if (ph.thermal)
                    for (int b = 0; b < hex20::kNodes; ++b)
                        if (gT[b] >= 0) add(gu[ra], gT[b], es.K_uT(ra, b));
                if (ph.piezoelectric)
                    for (int b = 0; b < hex20::kNodes; ++b)
                        if (gp[b] >= 0) add(gu[ra], gp[b], es.K_uphi(ra, b));
            }
        }
        if (ph.thermal) {
            for (int a = 0; a < hex20::kNodes; ++a) {
                if (gT[a] < 0) continue;
                sys.residual[gT[a]] += es.r_T[a];
                for (int b = 0; b < hex20::kNodes; ++b)
                    if (gT[b] >= 0) add(gT[a], gT[b], es.K_TT(a, b));
                if (ph.conduction_joule)
                    for (int b = 0; b < hex20::kNodes; ++b)
                        if (gp[b] >= 0) add(gT[a], gp[b], es.K_Tphi(a, b));
            }
        }
        if (ph.conduction_joule || ph.piezoelectric) {
            for (int a = 0; a < hex20::kNodes; ++a) {
                if (gp[a] < 0) continue;
                sys.residual[gp[a]] += es.r_phi[a];
                for (int b = 0; b < hex20::kNodes; ++b)
                    if (gp[b] >= 0) add(gp[a], gp[b], es.K_phiphi(a, b));
                if (ph.piezoelectric)
                    for (int cb = 0; cb < 60; ++cb)
                        if (gu[cb] >= 0) add(gp[a], gu[cb], es.K_phiu(a, cb));
            }
        }
    }

    // Dead-load surface pressure along the inward reference normal.
    if (loads.pressure_faces && loads.pressure != 0.0) {
        for (const FaceRef& face : *loads.pressure_faces) {
            detail::for_each_face_qp(mesh, face,
                                     [&](NodeIndex n, double Na, const Eigen::Vector3d& ndA,
                                         double w, const auto&) {
                for (int i = 0; i < 3; ++i) {
                    const int32_t g = dofmap(n, static_cast<Field>(kUx + i));
                    if (g >= 0) sys.residual[g] += w * loads.pressure * Na * ndA[i];
                }
            });
        }
    }

    // Lumped film condition h (T - T_ambient) on selected faces.
    if (loads.film_faces && loads.film_coefficient > 0.0) {
        for (const FaceRef& face : *loads.film_faces) {
            const auto ids = face_node_ids(mesh, face);
            Eigen::Matrix<double, hex20::kFaceNodes, 3> Xf;
            for (int a = 0; a < hex20::kFaceNodes; ++a)
                Xf.row(a) = mesh.node_coords[ids[a]].transpose();
            Eigen::Matrix<double, hex20::kFaceNodes, 1> N;
            Eigen::Matrix<double, hex20::kFaceNodes, 2> dN;
            for (const auto& qp : hex20::face_quadrature()) {
                hex20::face_shape_eval(qp.u, qp.v, N, dN);
                const Eigen::Vector3d t1 = Xf.transpose() * dN.col(0);
                const Eigen::Vector3d t2 = Xf.transpose() * dN.col(1);
                const double dA = t1.cross(t2).norm() * qp.weight;
                double Tq = 0.0;
                for (int a = 0; a < hex20::kFaceNodes; ++a) {
                    const int32_t g = dofmap(ids[a], kTemp);
                    Tq += N[a] * (g >= 0 ? x[g] : loads.film_ambient);
                }
                for (int a = 0; a < hex20::kFaceNodes; ++a) {
                    const int32_t ga = dofmap(ids[a], kTemp);
                    if (ga < 0) continue;
                    sys.residual[ga] +=
                        dA * loads.film_coefficient * (Tq - loads.film_ambient) * N[a];
                    for (int b = 0; b < hex20::kFaceNodes; ++b) {
                        const int32_t gb = dofmap(ids[b], kTemp);
                        if (gb >= 0) add(ga, gb, dA * loads.film_coefficient * N[a] * N[b]);
                    }
                }
            }
        }
    }

    sys.tangent.resize(dofmap.n_free(), dofmap.n_free());
    sys.tangent.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

/// Free-dof part of a full residual vector.
inline Eigen::VectorXd free_residual(const DofMap& dofmap, const Eigen::VectorXd& full) {
    Eigen::VectorXd r(dofmap.n_free());
    for (int32_t i = 0; i < dofmap.n_free(); ++i) r[i] = full[dofmap.free_dofs()[i]];
    return r;
}

} // namespace memsim
