#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "memsim/errors.hpp"
#include "memsim/mesh.hpp"

namespace memsim {

/// Nodal field slots. Three displacement components, temperature, potential.
enum Field : int { kUx = 0, kUy = 1, kUz = 2, kTemp = 3, kPhi = 4 };
constexpr int kFieldCount = 5;

/// Maps (node, field) pairs to global equation numbers. Tied dofs share one
/// equation; prescribed dofs keep their number but are excluded from the free
/// system. Every active dof has exactly one global index.
class DofMap {
public:
    struct Dirichlet {
        NodeIndex node;
        Field field;
        double target; // value at load factor 1
    };

    DofMap() = default;

    /// Builds the numbering. phi_nodes lists nodes carrying a potential dof
    /// (empty means no electric field at all). tied_groups are sets of
    /// (node, field) pairs collapsed into one equation.
    DofMap(const Mesh& mesh, bool mechanical, bool thermal,
           const std::vector<NodeIndex>& phi_nodes,
           const std::vector<std::vector<std::pair<NodeIndex, Field>>>& tied_groups,
           const std::vector<Dirichlet>& dirichlet)
        : n_nodes_(mesh.node_count()) {
        dof_.assign(n_nodes_, {-1, -1, -1, -1, -1});

        std::vector<char> has_phi(n_nodes_, 0);
        for (NodeIndex n : phi_nodes) has_phi[n] = 1;

        // Union-find over (node, field) slots for ties.
        std::vector<int32_t> parent(n_nodes_ * kFieldCount);
        std::iota(parent.begin(), parent.end(), 0);
        auto slot = [&](NodeIndex n, Field f) { return static_cast<int32_t>(n) * kFieldCount + f; };
        std::function<int32_t(int32_t)> find = [&](int32_t s) {
            while (parent[s] != s) s = parent[s] = parent[parent[s]];
            return s;
        };
        for (const auto& group : tied_groups)
            for (size_t i = 1; i < group.size(); ++i)
                parent[find(slot(group[i].first, group[i].second))] =
                    find(slot(group[0].first, group[0].second));

        std::vector<int32_t> slot_dof(n_nodes_ * kFieldCount, -1);
        auto active = [&](NodeIndex n, Field f) {
            if (f <= kUz) return mechanical;
            if (f == kTemp) return thermal;
            return has_phi[n] != 0;
        };
        for (NodeIndex n = 0; n < static_cast<NodeIndex>(n_nodes_); ++n)
            for (int f = 0; f < kFieldCount; ++f) {
                if (!active(n, static_cast<Field>(f))) continue;
                const int32_t rep = find(slot(n, static_cast<Field>(f)));
                if (slot_dof[rep] < 0) {
                    slot_dof[rep] = n_dofs_++;
                    dof_field_.push_back(static_cast<Field>(f));
                }
                dof_[n][f] = slot_dof[rep];
            }

        prescribed_.assign(n_dofs_, 0);
        target_.assign(n_dofs_, 0.0);
        for (const auto& d : dirichlet) {
            const int32_t g = dof_[d.node][d.field];
            if (g < 0)
                throw InternalError("Dirichlet on inactive dof (node " + std::to_string(d.node) +
                                    ", field " + std::to_string(d.field) + ")");
            prescribed_[g] = 1;
            target_[g] = d.target;
        }

        free_index_.assign(n_dofs_, -1);
        for (int32_t g = 0; g < n_dofs_; ++g)
            if (!prescribed_[g]) {
                free_index_[g] = static_cast<int32_t>(free_dofs_.size());
                free_dofs_.push_back(g);
            }
    }

    int32_t n_dofs() const { return n_dofs_; }
    int32_t n_free() const { return static_cast<int32_t>(free_dofs_.size()); }
    int32_t operator()(NodeIndex n, Field f) const { return dof_[n][f]; }
    bool is_prescribed(int32_t g) const { return prescribed_[g] != 0; }
    double target(int32_t g) const { return target_[g]; }
    int32_t free_index(int32_t g) const { return free_index_[g]; }
    const std::vector<int32_t>& free_dofs() const { return free_dofs_; }
    Field field_of(int32_t g) const { return dof_field_[g]; }

    /// Ramp prescribed entries of a state vector: x_p = (1-lambda) x0_p +
    /// lambda target_p.
    void apply_prescribed(Eigen::VectorXd& x, const Eigen::VectorXd& x0, double lambda) const {
        for (int32_t g = 0; g < n_dofs_; ++g)
            if (prescribed_[g]) x[g] = (1.0 - lambda) * x0[g] + lambda * target_[g];
    }

private:
    size_t n_nodes_ = 0;
    std::vector<std::array<int32_t, kFieldCount>> dof_;
    std::vector<Field> dof_field_;
    int32_t n_dofs_ = 0;
    std::vector<char> prescribed_;
    std::vector<double> target_;
    std::vector<int32_t> free_index_;
    std::vector<int32_t> free_dofs_;
};

} // namespace memsim
