#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "memsim/lamination.hpp"
#include "memsim/mesh.hpp"
#include "memsim/newton.hpp"

namespace memsim {

/// A meshed cantilever with resolved per-element materials and release
/// eigenstrains, plus the solver and physics configuration shared by all
/// scenario stages. Element physics hold pointers into this object; it is
/// pinned in place once built.
class CantileverModel {
public:
    CantileverModel(const LayeredMeshSpec& mesh_spec, PhysicsBlockConfig physics,
                    SolveSettings settings,
                    MaterialSpec heater_material = builtin_material("poly-Si-heater"),
                    MaterialSpec piezo_material = builtin_material("AlN-piezo"))
        : stack_(mesh_spec.stack),
          mesh_(generate_layered_mesh(mesh_spec)),
          physics_(std::move(physics)),
          settings_(settings),
          heater_material_(std::move(heater_material)),
          piezo_material_(std::move(piezo_material)) {
        if (physics_.has(PhysicsBlock::Electrothermal) && mesh_.heater_elements.empty())
            throw ConfigError("electrothermal block requires a heater_region in the mesh");
        if (physics_.has(PhysicsBlock::Piezoelectric) && mesh_.piezo_elements.empty())
            throw ConfigError("piezoelectric block requires a piezo_region in the mesh");
        heater_material_.validate();
        piezo_material_.validate();
        if (physics_.has(PhysicsBlock::Electrothermal) &&
            !heater_material_.electrical_conductivity)
            throw ConfigError("heater material \"" + heater_material_.name +
                              "\" needs electrical_conductivity");
        if (physics_.has(PhysicsBlock::Piezoelectric) &&
            (!piezo_material_.piezo_coupling || !piezo_material_.permittivity))
            throw ConfigError("piezo material \"" + piezo_material_.name +
                              "\" needs piezo_coupling and permittivity");

        is_heater_.assign(mesh_.element_count(), 0);
        for (ElementIndex e : mesh_.heater_elements) is_heater_[e] = 1;
        is_piezo_.assign(mesh_.element_count(), 0);
        for (ElementIndex e : mesh_.piezo_elements) is_piezo_[e] = 1;
        if (physics_.has(PhysicsBlock::Electrothermal) && physics_.has(PhysicsBlock::Piezoelectric))
            for (size_t e = 0; e < mesh_.element_count(); ++e)
                if (is_heater_[e] && is_piezo_[e])
                    throw ConfigError("heater and piezo regions overlap");
    }

    CantileverModel(const CantileverModel&) = delete;
    CantileverModel& operator=(const CantileverModel&) = delete;

    const StackSpec& stack() const { return stack_; }
    const Mesh& mesh() const { return mesh_; }
    const PhysicsBlockConfig& physics() const { return physics_; }
    const SolveSettings& settings() const { return settings_; }

    bool is_heater_element(ElementIndex e) const { return is_heater_[e] != 0; }
    bool is_piezo_element(ElementIndex e) const { return is_piezo_[e] != 0; }

    const MaterialSpec& element_material(ElementIndex e) const {
        if (is_heater_[e] && physics_.has(PhysicsBlock::Electrothermal)) return heater_material_;
        if (is_piezo_[e] && physics_.has(PhysicsBlock::Piezoelectric)) return piezo_material_;
        return stack_.layers[mesh_.element_layer[e]].material;
    }

    /// Stress-free strain of the element's material at ambient temperature;
    /// override regions inherit the host layer's deposition temperature.
    double element_base_eigenstrain(ElementIndex e) const {
        LayerSpec layer = stack_.layers[mesh_.element_layer[e]];
        layer.material = element_material(e);
        return stress_free_strain(layer, stack_, physics_.ambient_temperature);
    }

    std::vector<ElementPhysics> element_physics(bool mechanical, bool thermal,
                                                bool electric) const {
        std::vector<ElementPhysics> out(mesh_.element_count());
        for (ElementIndex e = 0; e < static_cast<ElementIndex>(mesh_.element_count()); ++e) {
            ElementPhysics& ph = out[e];
            ph.material = &element_material(e);
            ph.base_eigenstrain = element_base_eigenstrain(e);
            ph.ambient_temperature = physics_.ambient_temperature;
            ph.mechanical = mechanical;
            ph.thermal = thermal;
            ph.finite_strain = settings_.finite_strain;
            if (electric && is_heater_[e] && physics_.has(PhysicsBlock::Electrothermal))
                ph.conduction_joule = true;
            if (electric && is_piezo_[e] && physics_.has(PhysicsBlock::Piezoelectric))
                ph.piezoelectric = true;
        }
        return out;
    }

    std::vector<DofMap::Dirichlet> anchor_clamp(bool thermal) const {
        std::vector<DofMap::Dirichlet> bc;
        for (NodeIndex n : mesh_.node_set("anchor")) {
            bc.push_back({n, kUx, 0.0});
            bc.push_back({n, kUy, 0.0});
            bc.push_back({n, kUz, 0.0});
            if (thermal) bc.push_back({n, kTemp, physics_.ambient_temperature});
        }
        return bc;
    }

    /// Nodes of the tagged elements that lie on a given plane.
    std::vector<NodeIndex> region_nodes_on_plane(const std::vector<ElementIndex>& elems, int axis,
                                                 double value) const {
        std::vector<char> mark(mesh_.node_count(), 0);
        for (ElementIndex e : elems)
            for (NodeIndex n : mesh_.elements[e])
                if (std::abs(mesh_.node_coords[n][axis] - value) <= 1e-12) mark[n] = 1;
        std::vector<NodeIndex> out;
        for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh_.node_count()); ++n)
            if (mark[n]) out.push_back(n);
        return out;
    }

    std::vector<NodeIndex> all_region_nodes(const std::vector<ElementIndex>& elems) const {
        std::vector<char> mark(mesh_.node_count(), 0);
        for (ElementIndex e : elems)
            for (NodeIndex n : mesh_.elements[e]) mark[n] = 1;
        std::vector<NodeIndex> out;
        for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh_.node_count()); ++n)
            if (mark[n]) out.push_back(n);
        return out;
    }

private:
    StackSpec stack_;
    Mesh mesh_;
    PhysicsBlockConfig physics_;
    SolveSettings settings_;
    MaterialSpec heater_material_;
    MaterialSpec piezo_material_;
    std::vector<char> is_heater_;
    std::vector<char> is_piezo_;
};

/// Release solve: mechanical dofs only, anchor clamped, eigenstrains ramped
/// from zero. Temperature is the exact constant-ambient solution of the
/// sourceless thermal block, so it needs no dofs here.
inline FemProblem released_problem(const CantileverModel& model) {
    FemProblem p;
    p.mesh = &model.mesh();
    p.dofmap = DofMap(model.mesh(), true, false, {}, {}, model.anchor_clamp(false));
    p.element_physics = model.element_physics(true, false, false);
    p.ambient_temperature = model.physics().ambient_temperature;
    p.misfit_base = 0.0;
    p.misfit_range = 1.0;
    p.settings = model.settings();
    return p;
}

inline SolveState solve_released(const CantileverModel& model,
                                 const std::function<void(const SolveState&)>& on_step = {}) {
    return newton_solve(released_problem(model), std::nullopt, on_step);
}

/// Copy shared (node, field) values between states of different dof layouts.
inline Eigen::VectorXd transfer_state(const Mesh& mesh, const DofMap& from,
                                      const Eigen::VectorXd& x_from, const DofMap& to,
                                      Eigen::VectorXd x_to) {
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n)
        for (int f = 0; f < kFieldCount; ++f) {
            const int32_t gf = from(n, static_cast<Field>(f));
            const int32_t gt = to(n, static_cast<Field>(f));
            if (gf >= 0 && gt >= 0) x_to[gt] = x_from[gf];
        }
    return x_to;
}

/// Thermal actuation stage: displacement + temperature everywhere, potential
/// on the heater region; the drive voltage ramps across the heater width
/// (y = 0 grounded, y = W driven). Starts from the released state with
/// eigenstrains held at full scale.
struct ActuationStage {
    FemProblem problem;
    std::vector<FaceRef> film_faces;
    Eigen::VectorXd initial;
};

inline ActuationStage actuation_stage(const CantileverModel& model, double voltage,
                                      const DofMap& released_map,
                                      const Eigen::VectorXd& released_x) {
    if (!model.physics().has(PhysicsBlock::Electrothermal))
        throw ConfigError("actuation requires the electrothermal block");
    const Mesh& mesh = model.mesh();

    auto bc = model.anchor_clamp(true);
    for (NodeIndex n : model.region_nodes_on_plane(mesh.heater_elements, 1, 0.0))
        bc.push_back({n, kPhi, 0.0});
    for (NodeIndex n : model.region_nodes_on_plane(mesh.heater_elements, 1, model.stack().width))
        bc.push_back({n, kPhi, voltage});

    ActuationStage stage;
    stage.problem.mesh = &mesh;
    stage.problem.dofmap =
        DofMap(mesh, true, true, model.all_region_nodes(mesh.heater_elements), {}, bc);
    stage.problem.element_physics = model.element_physics(true, true, true);
    stage.problem.ambient_temperature = model.physics().ambient_temperature;
    stage.problem.misfit_base = 1.0; // released loads stay on; lambda ramps the drive
    stage.problem.misfit_range = 0.0;
    stage.problem.settings = model.settings();
    if (model.physics().film_coefficient > 0.0) {
        stage.film_faces = mesh.face_set("exterior");
        stage.problem.film_faces = &stage.film_faces;
        stage.problem.film_coefficient = model.physics().film_coefficient;
    }
    stage.initial = transfer_state(mesh, released_map, released_x, stage.problem.dofmap,
                                   stage.problem.initial_state());
    return stage;
}

/// Pressure sensing stage: displacement everywhere, potential on the piezo
/// region; piezo bottom face grounded, top face tied into one open-circuit
/// electrode equation. The dead-load pressure on the top surface ramps with
/// lambda. Starts from the released state.
struct SensingStage {
    FemProblem problem;
    std::vector<FaceRef> pressure_faces;
    Eigen::VectorXd initial;
    NodeIndex electrode_node = -1; // any node of the tied top electrode
};

inline SensingStage sensing_stage(const CantileverModel& model, double pressure,
                                  const DofMap& released_map, const Eigen::VectorXd& released_x) {
    if (!model.physics().has(PhysicsBlock::Piezoelectric))
        throw ConfigError("sensing requires the piezoelectric block");
    const Mesh& mesh = model.mesh();

    // piezo patch z extent: host layer interfaces
    const int top_layer = static_cast<int>(model.stack().layers.size()) - 1;
    double z_top = model.stack().total_thickness();
    const double z_bottom = z_top - model.stack().layers[top_layer].thickness;

    auto bc = model.anchor_clamp(false);
    const auto grounded = model.region_nodes_on_plane(mesh.piezo_elements, 2, z_bottom);
    if (grounded.empty()) throw InternalError("piezo ground electrode selects no nodes");
    for (NodeIndex n : grounded) bc.push_back({n, kPhi, 0.0});

    const auto top_nodes = model.region_nodes_on_plane(mesh.piezo_elements, 2, z_top);
    if (top_nodes.empty()) throw InternalError("piezo top electrode selects no nodes");
    std::vector<std::pair<NodeIndex, Field>> electrode;
    for (NodeIndex n : top_nodes) electrode.emplace_back(n, kPhi);

    SensingStage stage;
    stage.electrode_node = top_nodes.front();
    stage.problem.mesh = &mesh;
    stage.problem.dofmap = DofMap(mesh, true, false, model.all_region_nodes(mesh.piezo_elements),
                                  {electrode}, bc);
    stage.problem.element_physics = model.element_physics(true, false, true);
    stage.problem.ambient_temperature = model.physics().ambient_temperature;
    stage.problem.misfit_base = 1.0;
    stage.problem.misfit_range = 0.0;
    stage.pressure_faces = mesh.face_set("top");
    stage.problem.pressure_faces = &stage.pressure_faces;
    stage.problem.pressure_base = 0.0;
    stage.problem.pressure_range = pressure;
    stage.problem.settings = model.settings();
    stage.initial = transfer_state(mesh, released_map, released_x, stage.problem.dofmap,
                                   stage.problem.initial_state());
    return stage;
}

/// Deformed bottom-surface centerline, sorted by reference x. Falls back to
/// the y = 0 edge when no gridline sits at mid-width.
inline std::vector<std::pair<double, double>> bottom_centerline_profile(
    const CantileverModel& model, const DofMap& dofmap, const Eigen::VectorXd& x) {
    const Mesh& mesh = model.mesh();
    const double w2 = model.stack().width / 2.0;
    std::vector<std::pair<double, NodeIndex>> row;
    for (NodeIndex n : mesh.node_set("bottom_surface"))
        if (std::abs(mesh.node_coords[n][1] - w2) <= 1e-12)
            row.emplace_back(mesh.node_coords[n][0], n);
    if (row.empty())
        for (NodeIndex n : mesh.node_set("bottom_surface"))
            if (std::abs(mesh.node_coords[n][1]) <= 1e-12)
                row.emplace_back(mesh.node_coords[n][0], n);
    std::sort(row.begin(), row.end());

    std::vector<std::pair<double, double>> profile;
    profile.reserve(row.size());
    for (const auto& [rx, n] : row)
        profile.emplace_back(rx + x[dofmap(n, kUx)], mesh.node_coords[n][2] + x[dofmap(n, kUz)]);
    return profile;
}

/// Deformed height of the beam tip (bottom centerline at x = L).
inline double tip_height(const CantileverModel& model, const DofMap& dofmap,
                         const Eigen::VectorXd& x) {
    return bottom_centerline_profile(model, dofmap, x).back().second;
}

inline double peak_temperature(const DofMap& dofmap, const Eigen::VectorXd& x,
                               double ambient) {
    double peak = ambient;
    for (int32_t g = 0; g < dofmap.n_dofs(); ++g)
        if (dofmap.field_of(g) == kTemp) peak = std::max(peak, x[g]);
    return peak;
}

/// Total Joule dissipation over the heater region at the current state.
inline double dissipated_power(const CantileverModel& model, const DofMap& dofmap,
                               const Eigen::VectorXd& x) {
    const Mesh& mesh = model.mesh();
    double power = 0.0;
    Eigen::Matrix<double, hex20::kNodes, 1> N;
    Eigen::Matrix<double, hex20::kNodes, 3> dN;
    for (ElementIndex e : mesh.heater_elements) {
        Eigen::Matrix<double, hex20::kNodes, 3> X;
        Eigen::Matrix<double, hex20::kNodes, 1> phi;
        for (int a = 0; a < hex20::kNodes; ++a) {
            const NodeIndex n = mesh.elements[e][a];
            X.row(a) = mesh.node_coords[n].transpose();
            const int32_t g = dofmap(n, kPhi);
            phi[a] = g >= 0 ? x[g] : 0.0;
        }
        const MaterialSpec& mat = model.element_material(e);
        for (const auto& qp : hex20::quadrature()) {
            hex20::shape_eval(qp.xi, N, dN);
            const Eigen::Matrix3d J = X.transpose() * dN;
            const Eigen::Matrix<double, hex20::kNodes, 3> G = dN * J.inverse();
            power += qp.weight * J.determinant() *
                     joule_source(G.transpose() * phi, mat).q;
        }
    }
    return power;
}

} // namespace memsim
