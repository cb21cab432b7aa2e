#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "memsim/mesh.hpp"

using namespace memsim;
using Catch::Approx;

namespace {

StackSpec simple_stack(std::vector<double> thicknesses) {
    StackSpec s;
    s.substrate_material = builtin_material("Si");
    s.release_temperature = units::celsius_to_kelvin(20.0);
    s.width = 2e-6;
    s.length = 10e-6;
    for (double t : thicknesses)
        s.layers.push_back({builtin_material("Si"), t, s.release_temperature});
    return s;
}

// Independent serendipity node count: enumerate refined-lattice points with
// at most one odd index.
size_t brute_force_node_count(int nx, int ny, int nz) {
    size_t count = 0;
    for (int k = 0; k <= 2 * nz; ++k)
        for (int j = 0; j <= 2 * ny; ++j)
            for (int i = 0; i <= 2 * nx; ++i)
                if ((i % 2) + (j % 2) + (k % 2) <= 1) ++count;
    return count;
}

} // namespace

TEST_CASE("single element mesh") {
    LayeredMeshSpec spec{simple_stack({200e-9}), 1, 1, {1}};
    const Mesh m = generate_layered_mesh(spec);
    CHECK(m.node_count() == 20);
    CHECK(m.element_count() == 1);
    CHECK(m.node_set("anchor").size() == 8); // x=0 face of a hex20
    CHECK(m.node_set("top_surface").size() == 8);
    CHECK(m.node_set("bottom_surface").size() == 8);
    CHECK(m.element_layer[0] == 0);
}

TEST_CASE("node counts match the combinatorial enumeration") {
    for (auto [nx, ny, nz] : {std::tuple{4, 2, 1}, {3, 3, 2}, {1, 1, 3}, {5, 2, 2}}) {
        LayeredMeshSpec spec{simple_stack({100e-9}), nx, ny, {nz}};
        const Mesh m = generate_layered_mesh(spec);
        CHECK(m.element_count() == static_cast<size_t>(nx) * ny * nz);
        CHECK(m.node_count() == brute_force_node_count(nx, ny, nz));
    }
    // the documented small case
    LayeredMeshSpec spec{simple_stack({100e-9}), 4, 2, {1}};
    CHECK(generate_layered_mesh(spec).node_count() == 89);
}

TEST_CASE("no duplicate nodes") {
    LayeredMeshSpec spec{simple_stack({100e-9, 150e-9}), 3, 2, {1, 2}};
    const Mesh m = generate_layered_mesh(spec);
    for (size_t i = 0; i < m.node_count(); ++i)
        for (size_t j = i + 1; j < m.node_count(); ++j)
            CHECK((m.node_coords[i] - m.node_coords[j]).norm() > 1e-12);
}

TEST_CASE("bilayer interface is conforming") {
    LayeredMeshSpec spec{simple_stack({100e-9, 100e-9}), 2, 1, {1, 1}};
    const Mesh m = generate_layered_mesh(spec);
    for (size_t e = 0; e < m.element_count(); ++e)
        CHECK((m.element_layer[e] == 0 || m.element_layer[e] == 1));

    // every node at the interface plane belongs to elements of both layers
    std::set<NodeIndex> interface_nodes;
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(m.node_count()); ++n)
        if (std::abs(m.node_coords[n][2] - 100e-9) < 1e-15) interface_nodes.insert(n);
    CHECK(!interface_nodes.empty());
    for (NodeIndex n : interface_nodes) {
        bool in0 = false, in1 = false;
        for (size_t e = 0; e < m.element_count(); ++e)
            for (NodeIndex c : m.elements[e]) {
                if (c != n) continue;
                (m.element_layer[e] == 0 ? in0 : in1) = true;
            }
        CHECK((in0 && in1));
    }
}

TEST_CASE("volume and connectivity") {
    StackSpec s = simple_stack({100e-9, 250e-9, 900e-9});
    LayeredMeshSpec spec{s, 4, 2, {1, 1, 2}};
    const Mesh m = generate_layered_mesh(spec);

    double vol = 0.0;
    for (ElementIndex e = 0; e < static_cast<ElementIndex>(m.element_count()); ++e)
        vol += element_volume(m, e); // also checks Jacobian positivity
    const double expected = s.length * s.width * s.total_thickness();
    CHECK(vol == Approx(expected).epsilon(1e-10));

    CHECK(is_connected(m));
}

TEST_CASE("refinement preserves volume and shared set coordinates") {
    StackSpec s = simple_stack({100e-9, 100e-9});
    LayeredMeshSpec coarse{s, 2, 1, {1, 1}};
    LayeredMeshSpec fine{s, 4, 2, {2, 2}};
    const Mesh mc = generate_layered_mesh(coarse);
    const Mesh mf = generate_layered_mesh(fine);

    double vc = 0.0, vf = 0.0;
    for (ElementIndex e = 0; e < static_cast<ElementIndex>(mc.element_count()); ++e)
        vc += element_volume(mc, e);
    for (ElementIndex e = 0; e < static_cast<ElementIndex>(mf.element_count()); ++e)
        vf += element_volume(mf, e);
    CHECK(vc == Approx(vf).epsilon(1e-12));

    // every coarse anchor node coordinate appears in the fine anchor set
    for (NodeIndex n : mc.node_set("anchor")) {
        bool found = false;
        for (NodeIndex n2 : mf.node_set("anchor"))
            if ((mc.node_coords[n] - mf.node_coords[n2]).norm() < 1e-15) found = true;
        CHECK(found);
    }
}

TEST_CASE("select_nodes boxes") {
    LayeredMeshSpec spec{simple_stack({100e-9}), 3, 2, {1}};
    const Mesh m = generate_layered_mesh(spec);
    const Eigen::Vector3d lo(-1, -1, -1), hi(1, 1, 1);
    CHECK(select_nodes(m, lo, hi).size() == m.node_count());

    const auto anchor = select_nodes(m, {0, -1, -1}, {0, 1, 1});
    CHECK(anchor == m.node_set("anchor"));

    CHECK(select_nodes(m, {1e-3, 0, 0}, {2e-3, 1, 1}).empty());
    CHECK_THROWS_AS(select_nodes(m, hi, lo), ConfigError);
}

TEST_CASE("heater and piezo regions tag top-layer anchor elements") {
    StackSpec s = simple_stack({100e-9, 100e-9});
    LayeredMeshSpec spec{s, 5, 1, {1, 1}};
    spec.heater_region = 4e-6; // first two of five 2um columns
    spec.piezo_region = 2e-6;
    const Mesh m = generate_layered_mesh(spec);

    CHECK(m.heater_elements.size() == 2);
    CHECK(m.piezo_elements.size() == 1);
    for (ElementIndex e : m.heater_elements) {
        CHECK(m.element_layer[e] == 1);
        double cx = 0.0;
        for (int a = 0; a < 8; ++a) cx += m.node_coords[m.elements[e][a]][0] / 8.0;
        CHECK(cx < 4e-6);
    }
}

TEST_CASE("spec validation failures") {
    StackSpec s = simple_stack({100e-9});
    CHECK_THROWS_AS(generate_layered_mesh({s, 0, 1, {1}}), MeshError);
    CHECK_THROWS_AS(generate_layered_mesh({s, 1, 1, {}}), MeshError);
    CHECK_THROWS_AS(generate_layered_mesh({s, 1, 1, {0}}), MeshError);
    LayeredMeshSpec too_far{s, 1, 1, {1}};
    too_far.heater_region = 2.0 * s.length;
    CHECK_THROWS_AS(generate_layered_mesh(too_far), MeshError);

    StackSpec zero = s;
    zero.layers[0].thickness = 0.0;
    CHECK_THROWS_AS(generate_layered_mesh({zero, 1, 1, {1}}), ConfigError);
}

TEST_CASE("face sets cover the boundary") {
    LayeredMeshSpec spec{simple_stack({100e-9, 100e-9}), 3, 2, {1, 1}};
    const Mesh m = generate_layered_mesh(spec);
    CHECK(m.face_set("top").size() == 6);
    CHECK(m.face_set("bottom").size() == 6);
    CHECK(m.face_set("anchor_face").size() == 4);
    // 2(3*2) + 2(3*2) + 2(2*2) faces total
    CHECK(m.face_set("exterior").size() == 32);
    for (const FaceRef& f : m.face_set("top")) {
        for (NodeIndex n : face_node_ids(m, f))
            CHECK(m.node_coords[n][2] == Approx(200e-9).margin(1e-18));
    }
}
