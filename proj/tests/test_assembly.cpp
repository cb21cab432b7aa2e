#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "memsim/assembly.hpp"
#include "memsim/newton.hpp"

using namespace memsim;
using Catch::Approx;

namespace {

StackSpec block_stack(double t = 1e-6) {
    StackSpec s;
    s.substrate_material = builtin_material("Si");
    s.release_temperature = 293.15;
    s.width = 1e-6;
    s.length = 2e-6;
    s.layers.push_back({builtin_material("Si"), t, s.release_temperature});
    return s;
}

std::vector<ElementPhysics> uniform_physics(const Mesh& mesh, const MaterialSpec& m,
                                            bool thermal = false, bool finite = false,
                                            double eig = 0.0) {
    ElementPhysics ph;
    ph.material = &m;
    ph.base_eigenstrain = eig;
    ph.ambient_temperature = 293.15;
    ph.thermal = thermal;
    ph.finite_strain = finite;
    return std::vector<ElementPhysics>(mesh.element_count(), ph);
}

} // namespace

TEST_CASE("sparse solve contract") {
    SECTION("identity") {
        SparseMatrix A(4, 4);
        A.setIdentity();
        Eigen::VectorXd b(4);
        b << 1, -2, 3, 4;
        CHECK((sparse_solve(A, b) - b).norm() == 0.0);
    }
    SECTION("diagonal 2x2") {
        std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {1, 1, 4.0}};
        SparseMatrix A(2, 2);
        A.setFromTriplets(t.begin(), t.end());
        Eigen::VectorXd b(2);
        b << 2, 4;
        const Eigen::VectorXd x = sparse_solve(A, b);
        CHECK(x[0] == Approx(1.0));
        CHECK(x[1] == Approx(1.0));
    }
    SECTION("random SPD vs dense reference") {
        std::mt19937 rng(8);
        std::normal_distribution<double> g;
        const int n = 200;
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = g(rng);
        Eigen::MatrixXd S = M.transpose() * M + n * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b[i] = g(rng);

        const Eigen::VectorXd dense = S.fullPivLu().solve(b);
        const Eigen::VectorXd sparse = sparse_solve(S.sparseView(), b);
        CHECK((dense - sparse).norm() / dense.norm() < 1e-10);
    }
    SECTION("singular matrix raises a solver error") {
        SparseMatrix A(3, 3); // structurally empty
        Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
        CHECK_THROWS_AS(sparse_solve(A, b), SolverError);
        SparseMatrix B(3, 2);
        CHECK_THROWS_AS(sparse_solve(B, b), SolverError);
    }
}

TEST_CASE("single-element assembly equals the element system on free dofs") {
    LayeredMeshSpec spec{block_stack(), 1, 1, {1}};
    const Mesh mesh = generate_layered_mesh(spec);
    const auto phys = uniform_physics(mesh, builtin_material("Si"), false, true, -1e-3);

    std::vector<DofMap::Dirichlet> bc;
    for (NodeIndex n : mesh.node_set("anchor"))
        for (int f = 0; f < 3; ++f) bc.push_back({n, static_cast<Field>(f), 0.0});
    const DofMap dofmap(mesh, true, false, {}, {}, bc);

    // randomized displacement state
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> du(-1e-9, 1e-9);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dofmap.n_dofs());
    for (int32_t g : dofmap.free_dofs()) x[g] = du(rng);

    ResolvedLoads loads;
    loads.misfit_factor = 0.7;
    const AssembledSystem sys = assemble(mesh, dofmap, phys, x, loads);

    // direct element evaluation
    ElementState st;
    for (int a = 0; a < hex20::kNodes; ++a) {
        st.X.row(a) = mesh.node_coords[mesh.elements[0][a]].transpose();
        for (int d = 0; d < 3; ++d) {
            const int32_t g = dofmap(mesh.elements[0][a], static_cast<Field>(d));
            st.u(a, d) = x[g];
        }
        st.T[a] = 293.15;
        st.phi[a] = 0.0;
    }
    st.lambda = 0.7;
    const ElementSystem es = element_residual_tangent(st, phys[0]);

    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.tangent);
    for (int a = 0; a < hex20::kNodes; ++a)
        for (int d = 0; d < 3; ++d) {
            const int32_t g = dofmap(mesh.elements[0][a], static_cast<Field>(d));
            CHECK(sys.residual[g] == Approx(es.r_u[3 * a + d]).margin(1e-20));
            const int32_t fi = dofmap.free_index(g);
            if (fi < 0) continue;
            for (int b = 0; b < hex20::kNodes; ++b)
                for (int e = 0; e < 3; ++e) {
                    const int32_t g2 = dofmap(mesh.elements[0][b], static_cast<Field>(e));
                    const int32_t fj = dofmap.free_index(g2);
                    if (fj >= 0) CHECK(K(fi, fj) == Approx(es.K_uu(3 * a + d, 3 * b + e)).margin(1e-20));
                }
        }
}

TEST_CASE("uniform traction patch test recovers a uniform stress field") {
    // two stacked elements, roller planes on x=0 / y=0 / z=0, uniform normal
    // traction on +x: sigma_xx = -p everywhere, exact for quadratic elements.
    LayeredMeshSpec spec{block_stack(), 2, 1, {2}};
    const Mesh mesh = generate_layered_mesh(spec);
    const auto phys = uniform_physics(mesh, builtin_material("Si"), false, false);

    std::vector<DofMap::Dirichlet> bc;
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n) {
        const auto& p = mesh.node_coords[n];
        if (p[0] < 1e-15) bc.push_back({n, kUx, 0.0});
        if (p[1] < 1e-15) bc.push_back({n, kUy, 0.0});
        if (p[2] < 1e-15) bc.push_back({n, kUz, 0.0});
    }
    DofMap dofmap(mesh, true, false, {}, {}, bc);

    // pull in +x with negative pressure on the +x boundary faces
    std::vector<FaceRef> xplus;
    for (const FaceRef& f : mesh.face_set("exterior"))
        if (f.local_face == 1) xplus.push_back(f);
    REQUIRE(xplus.size() == 2);

    FemProblem prob;
    prob.mesh = &mesh;
    prob.dofmap = std::move(dofmap);
    prob.element_physics = phys;
    prob.misfit_base = prob.misfit_range = 0.0;
    prob.pressure_faces = &xplus;
    prob.pressure_range = -1e6; // 1 MPa tension
    prob.settings.initial_load_steps = 1;
    prob.settings.finite_strain = false;

    const SolveState state = newton_solve(prob);

    const double E = builtin_material("Si").youngs_modulus;
    const double nu = builtin_material("Si").poisson_ratio;
    for (ElementIndex e = 0; e < 2; ++e) {
        ElementState st;
        for (int a = 0; a < hex20::kNodes; ++a) {
            const NodeIndex n = mesh.elements[e][a];
            st.X.row(a) = mesh.node_coords[n].transpose();
            for (int d = 0; d < 3; ++d) st.u(a, d) = state.x[prob.dofmap(n, static_cast<Field>(d))];
            st.T[a] = 293.15;
            st.phi[a] = 0.0;
        }
        st.lambda = 1.0;
        const Eigen::Matrix3d S = element_centroid_stress(st, prob.element_physics[e]);
        CHECK(S(0, 0) == Approx(1e6).epsilon(1e-10));
        CHECK(std::abs(S(1, 1)) < 1e-4);
        CHECK(std::abs(S(2, 2)) < 1e-4);
    }
    // tip displacement of the 2 um bar: u_x = sigma L / E
    double max_ux = 0.0;
    for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n)
        if (std::abs(mesh.node_coords[n][0] - 2e-6) < 1e-15)
            max_ux = std::max(max_ux, state.x[prob.dofmap(n, kUx)]);
    CHECK(max_ux == Approx(1e6 * 2e-6 / E).epsilon(1e-10));
    (void)nu;
}

TEST_CASE("mechanical tangent is symmetric, piezo tangent in the (u,-phi) sense") {
    LayeredMeshSpec spec{block_stack(), 2, 1, {1}};
    const Mesh mesh = generate_layered_mesh(spec);

    SECTION("pure mechanics") {
        const auto phys = uniform_physics(mesh, builtin_material("Si"), false, true, -2e-3);
        const DofMap dofmap(mesh, true, false, {}, {}, {});
        std::mt19937 rng(6);
        std::uniform_real_distribution<double> du(-1e-9, 1e-9);
        Eigen::VectorXd x(dofmap.n_dofs());
        for (int32_t g = 0; g < dofmap.n_dofs(); ++g) x[g] = du(rng);
        const AssembledSystem sys = assemble(mesh, dofmap, phys, x, {});
        const Eigen::MatrixXd K = Eigen::MatrixXd(sys.tangent);
        CHECK((K - K.transpose()).norm() / K.norm() < 1e-12);
    }

    SECTION("thermoelastic with fully prescribed temperature") {
        auto phys = uniform_physics(mesh, builtin_material("Si"), true, true, -2e-3);
        std::vector<DofMap::Dirichlet> bc;
        for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n)
            bc.push_back({n, kTemp, 320.0});
        const DofMap dofmap(mesh, true, true, {}, {}, bc);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dofmap.n_dofs());
        for (NodeIndex n = 0; n < static_cast<NodeIndex>(mesh.node_count()); ++n)
            x[dofmap(n, kTemp)] = 320.0;
        const AssembledSystem sys = assemble(mesh, dofmap, phys, x, {});
        const Eigen::MatrixXd K = Eigen::MatrixXd(sys.tangent);
        CHECK((K - K.transpose()).norm() / K.norm() < 1e-12);
    }

    SECTION("piezoelectric system is the symmetric enthalpy Hessian") {
        auto phys = uniform_physics(mesh, builtin_material("AlN-piezo"), false, true);
        for (auto& p : phys) p.piezoelectric = true;
        std::vector<NodeIndex> phi_nodes(mesh.node_count());
        std::iota(phi_nodes.begin(), phi_nodes.end(), 0);
        const DofMap dofmap(mesh, true, false, phi_nodes, {}, {});
        std::mt19937 rng(12);
        std::uniform_real_distribution<double> du(-1e-9, 1e-9);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dofmap.n_dofs());
        for (int32_t g = 0; g < dofmap.n_dofs(); ++g)
            x[g] = dofmap.field_of(g) == kPhi ? 0.1 * du(rng) * 1e9 : du(rng);
        const AssembledSystem sys = assemble(mesh, dofmap, phys, x, {});
        const Eigen::MatrixXd K = Eigen::MatrixXd(sys.tangent);
        CHECK((K - K.transpose()).norm() / K.norm() < 1e-12);
    }
}

TEST_CASE("tied dofs share one equation") {
    LayeredMeshSpec spec{block_stack(), 1, 1, {1}};
    const Mesh mesh = generate_layered_mesh(spec);
    std::vector<NodeIndex> phi_nodes(mesh.node_count());
    std::iota(phi_nodes.begin(), phi_nodes.end(), 0);

    std::vector<std::pair<NodeIndex, Field>> group;
    for (NodeIndex n : mesh.node_set("top_surface")) group.emplace_back(n, kPhi);
    const DofMap dofmap(mesh, true, false, phi_nodes, {group}, {});

    const int32_t master = dofmap(group[0].first, kPhi);
    for (const auto& [n, f] : group) CHECK(dofmap(n, kPhi) == master);
    // 20 nodes, 60 u dofs + 20 phi dofs - 7 merged = 73
    CHECK(dofmap.n_dofs() == 73);
}
