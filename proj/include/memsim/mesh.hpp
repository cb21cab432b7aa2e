#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memsim/errors.hpp"
#include "memsim/hex20.hpp"
#include "memsim/materials.hpp"

namespace memsim {

using NodeIndex = int32_t;
using ElementIndex = int32_t;

struct FaceRef {
    ElementIndex element;
    int local_face; // 0..5 per hex20::face_nodes ordering
};

/// Layered quadratic-hexahedral cantilever mesh. Immutable after generation.
struct Mesh {
    std::vector<Eigen::Vector3d> node_coords;
    std::vector<std::array<NodeIndex, hex20::kNodes>> elements;
    std::vector<int> element_layer;               // layer index per element
    std::map<std::string, std::vector<NodeIndex>> node_sets;
    std::map<std::string, std::vector<FaceRef>> face_sets;
    std::vector<ElementIndex> heater_elements;    // material-override regions
    std::vector<ElementIndex> piezo_elements;

    size_t node_count() const { return node_coords.size(); }
    size_t element_count() const { return elements.size(); }

    const std::vector<NodeIndex>& node_set(const std::string& name) const {
        auto it = node_sets.find(name);
        if (it == node_sets.end()) throw MeshError("unknown node set \"" + name + "\"");
        return it->second;
    }
    const std::vector<FaceRef>& face_set(const std::string& name) const {
        auto it = face_sets.find(name);
        if (it == face_sets.end()) throw MeshError("unknown face set \"" + name + "\"");
        return it->second;
    }
};

/// Structured discretization request for a layer stack.
struct LayeredMeshSpec {
    StackSpec stack;
    int divisions_x = 1;
    int divisions_y = 1;
    std::vector<int> divisions_per_layer;    // z elements within each layer
    std::optional<double> heater_region;     // x-extent (m) at the anchor
    std::optional<double> piezo_region;      // x-extent (m) at the anchor

    void validate() const {
        stack.validate();
        if (divisions_x < 1 || divisions_y < 1)
            throw MeshError("mesh divisions must be >= 1");
        if (divisions_per_layer.size() != stack.layers.size())
            throw MeshError("divisions_per_layer must match the layer count (" +
                            std::to_string(stack.layers.size()) + ")");
        for (int d : divisions_per_layer)
            if (d < 1) throw MeshError("divisions_per_layer entries must be >= 1");
        for (size_t i = 0; i < stack.layers.size(); ++i)
            if (!(stack.layers[i].thickness > 0.0))
                throw MeshError("layer " + std::to_string(i) + " has zero thickness");
        if (heater_region && (*heater_region <= 0.0 || *heater_region > stack.length))
            throw MeshError("heater_region extent must be in (0, stack.length]");
        if (piezo_region && (*piezo_region <= 0.0 || *piezo_region > stack.length))
            throw MeshError("piezo_region extent must be in (0, stack.length]");
    }
};

namespace detail {

/// Serendipity lattice: nodes live at refined-grid points with at most one
/// odd index (corners and edge midpoints; no face or body centers).
inline bool is_serendipity_node(int i, int j, int k) {
    return (i % 2 != 0) + (j % 2 != 0) + (k % 2 != 0) <= 1;
}

} // namespace detail

/// Tensor-product grid of 20-node hexahedra over the cantilever box
/// [0,L]x[0,W]x[0,T]. z gridlines coincide with layer interfaces, so no
/// element straddles a material interface. Node sets: anchor (x=0),
/// top_surface, bottom_surface. Face sets: top, bottom, anchor_face, and
/// exterior (all boundary faces).
inline Mesh generate_layered_mesh(const LayeredMeshSpec& spec) {
    spec.validate();
    const StackSpec& stack = spec.stack;
    const int nx = spec.divisions_x;
    const int ny = spec.divisions_y;
    const int nz = std::accumulate(spec.divisions_per_layer.begin(),
                                   spec.divisions_per_layer.end(), 0);

    // z planes of element slabs (layer interfaces included), plus the layer
    // index of each slab.
    std::vector<double> zplane{0.0};
    std::vector<int> slab_layer;
    double zb = 0.0;
    for (size_t li = 0; li < stack.layers.size(); ++li) {
        const double t = stack.layers[li].thickness;
        const int d = spec.divisions_per_layer[li];
        for (int s = 1; s <= d; ++s) {
            zplane.push_back(zb + t * static_cast<double>(s) / d);
            slab_layer.push_back(static_cast<int>(li));
        }
        zb += t;
    }

    // Refined lattice coordinates (half-steps).
    const int mx = 2 * nx, my = 2 * ny, mz = 2 * nz;
    std::vector<double> xs(mx + 1), ys(my + 1), zs(mz + 1);
    for (int i = 0; i <= mx; ++i) xs[i] = stack.length * static_cast<double>(i) / mx;
    for (int j = 0; j <= my; ++j) ys[j] = stack.width * static_cast<double>(j) / my;
    for (int k = 0; k <= nz; ++k) zs[2 * k] = zplane[k];
    for (int k = 0; k < nz; ++k) zs[2 * k + 1] = 0.5 * (zplane[k] + zplane[k + 1]);

    Mesh mesh;
    auto lat = [&](int i, int j, int k) -> size_t {
        return (static_cast<size_t>(k) * (my + 1) + j) * (mx + 1) + i;
    };
    std::vector<NodeIndex> id(static_cast<size_t>(mx + 1) * (my + 1) * (mz + 1), -1);
    for (int k = 0; k <= mz; ++k)
        for (int j = 0; j <= my; ++j)
            for (int i = 0; i <= mx; ++i)
                if (detail::is_serendipity_node(i, j, k)) {
                    id[lat(i, j, k)] = static_cast<NodeIndex>(mesh.node_coords.size());
                    mesh.node_coords.emplace_back(xs[i], ys[j], zs[k]);
                }

    // Element connectivity from the reference-node lattice offsets.
    const auto& ref = hex20::node_coords();
    mesh.elements.reserve(static_cast<size_t>(nx) * ny * nz);
    mesh.element_layer.reserve(mesh.elements.capacity());
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::array<NodeIndex, hex20::kNodes> conn{};
                for (int a = 0; a < hex20::kNodes; ++a) {
                    const int ii = 2 * i + 1 + static_cast<int>(ref[a][0]);
                    const int jj = 2 * j + 1 + static_cast<int>(ref[a][1]);
                    const int kk = 2 * k + 1 + static_cast<int>(ref[a][2]);
                    conn[a] = id[lat(ii, jj, kk)];
                    if (conn[a] < 0) throw InternalError("mesh: missing serendipity node");
                }
                mesh.elements.push_back(conn);
                mesh.element_layer.push_back(slab_layer[k]);
            }

    // Node sets.
    const double eps = 1e-12;
    auto& anchor = mesh.node_sets["anchor"];
    auto& top = mesh.node_sets["top_surface"];
    auto& bottom = mesh.node_sets["bottom_surface"];
    const double ztop = zplane.back();
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n) {
        const auto& p = mesh.node_coords[n];
        if (std::abs(p[0]) <= eps) anchor.push_back(n);
        if (std::abs(p[2] - ztop) <= eps) top.push_back(n);
        if (std::abs(p[2]) <= eps) bottom.push_back(n);
    }

    // Face sets: boundary faces of the structured grid.
    auto& top_faces = mesh.face_sets["top"];
    auto& bottom_faces = mesh.face_sets["bottom"];
    auto& anchor_faces = mesh.face_sets["anchor_face"];
    auto& exterior = mesh.face_sets["exterior"];
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const ElementIndex e = static_cast<ElementIndex>((static_cast<size_t>(k) * ny + j) * nx + i);
                if (i == 0) anchor_faces.push_back({e, 0});
                if (k == 0) bottom_faces.push_back({e, 4});
                if (k == nz - 1) top_faces.push_back({e, 5});
                if (i == 0) exterior.push_back({e, 0});
                if (i == nx - 1) exterior.push_back({e, 1});
                if (j == 0) exterior.push_back({e, 2});
                if (j == ny - 1) exterior.push_back({e, 3});
                if (k == 0) exterior.push_back({e, 4});
                if (k == nz - 1) exterior.push_back({e, 5});
            }

    // Heater/piezo regions: elements of the top layer whose centroid-x lies
    // within the anchor extent.
    const int top_layer = static_cast<int>(stack.layers.size()) - 1;
    auto tag_region = [&](double extent, std::vector<ElementIndex>& out) {
        for (ElementIndex e = 0; e < static_cast<ElementIndex>(mesh.element_count()); ++e) {
            if (mesh.element_layer[e] != top_layer) continue;
            double cx = 0.0;
            for (int a = 0; a < 8; ++a) cx += mesh.node_coords[mesh.elements[e][a]][0];
            cx /= 8.0;
            if (cx <= extent) out.push_back(e);
        }
        if (out.empty())
            throw MeshError("region extent selects no elements; refine divisions_x");
    };
    if (spec.heater_region) tag_region(*spec.heater_region, mesh.heater_elements);
    if (spec.piezo_region) tag_region(*spec.piezo_region, mesh.piezo_elements);

    return mesh;
}

/// All nodes inside the closed axis-aligned box (1e-12 m tolerance).
inline std::vector<NodeIndex> select_nodes(const Mesh& mesh, const Eigen::Vector3d& lo,
                                           const Eigen::Vector3d& hi) {
    for (int d = 0; d < 3; ++d)
        if (lo[d] > hi[d]) throw ConfigError("select_nodes: box has lo > hi");
    const double eps = 1e-12;
    std::vector<NodeIndex> out;
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n) {
        const auto& p = mesh.node_coords[n];
        bool in = true;
        for (int d = 0; d < 3; ++d)
            in = in && p[d] >= lo[d] - eps && p[d] <= hi[d] + eps;
        if (in) out.push_back(n);
    }
    return out;
}

/// Nodes of a mesh face (global indices, quad8 order).
inline std::array<NodeIndex, hex20::kFaceNodes> face_node_ids(const Mesh& mesh,
                                                              const FaceRef& f) {
    const auto& local = hex20::face_nodes()[f.local_face];
    std::array<NodeIndex, hex20::kFaceNodes> out{};
    for (int a = 0; a < hex20::kFaceNodes; ++a)
        out[a] = mesh.elements[f.element][local[a]];
    return out;
}

/// Element volume by 3x3x3 quadrature of det J.
inline double element_volume(const Mesh& mesh, ElementIndex e) {
    Eigen::Matrix<double, hex20::kNodes, 3> X;
    for (int a = 0; a < hex20::kNodes; ++a)
        X.row(a) = mesh.node_coords[mesh.elements[e][a]].transpose();
    double vol = 0.0;
    Eigen::Matrix<double, hex20::kNodes, 1> N;
    Eigen::Matrix<double, hex20::kNodes, 3> dN;
    for (const auto& qp : hex20::quadrature()) {
        hex20::shape_eval(qp.xi, N, dN);
        const Eigen::Matrix3d J = X.transpose() * dN; // dX/dxi
        const double dj = J.determinant();
        if (!(dj > 0.0)) throw MeshError("element " + std::to_string(e) + ": non-positive Jacobian");
        vol += qp.weight * dj;
    }
    return vol;
}

/// True when every element connects to every other through shared nodes.
inline bool is_connected(const Mesh& mesh) {
    if (mesh.element_count() == 0) return true;
    std::vector<std::vector<ElementIndex>> node_elems(mesh.node_count());
    for (ElementIndex e = 0; e < static_cast<ElementIndex>(mesh.element_count()); ++e)
        for (NodeIndex n : mesh.elements[e]) node_elems[n].push_back(e);
    std::vector<char> seen(mesh.element_count(), 0);
    std::queue<ElementIndex> q;
    q.push(0);
    seen[0] = 1;
    size_t count = 0;
    while (!q.empty()) {
        const ElementIndex e = q.front();
        q.pop();
        ++count;
        for (NodeIndex n : mesh.elements[e])
            for (ElementIndex o : node_elems[n])
                if (!seen[o]) {
                    seen[o] = 1;
                    q.push(o);
                }
    }
    return count == mesh.element_count();
}

} // namespace memsim
