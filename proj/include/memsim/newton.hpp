#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "memsim/assembly.hpp"
#include "memsim/sparse.hpp"

namespace memsim {

struct SolveSettings {
    double residual_tolerance = 1e-8; // relative, per field
    int max_newton_iterations = 25;
    int initial_load_steps = 10;
    double min_step_fraction = 1.0 / 64.0; // minimum admissible delta-lambda
    bool finite_strain = true;

    void validate() const {
        if (!(residual_tolerance > 0.0)) throw ConfigError("solver.residual_tolerance must be > 0");
        if (max_newton_iterations < 1) throw ConfigError("solver.max_newton_iterations must be >= 1");
        if (initial_load_steps < 1) throw ConfigError("solver.initial_load_steps must be >= 1");
        if (!(min_step_fraction > 0.0)) throw ConfigError("solver.min_step_fraction must be > 0");
    }
};

struct StepRecord {
    double load_factor = 0.0;
    std::vector<double> residual_norms; // overall norm per Newton iteration
};

struct SolveState {
    Eigen::VectorXd x; // all dofs, prescribed included
    double load_factor = 0.0;
    std::vector<StepRecord> history;
};

/// A fully wired FEM problem: mesh, numbering, per-element physics, and the
/// lambda-ramped load description. Eigenstrain factor and pressure vary as
/// base + lambda * range so a solve can either ramp the release loads
/// (base 0, range 1) or hold them and ramp a drive (base 1, range 0).
struct FemProblem {
    const Mesh* mesh = nullptr;
    DofMap dofmap;
    std::vector<ElementPhysics> element_physics;
    double ambient_temperature = units::celsius_to_kelvin(20.0);

    double misfit_base = 0.0;
    double misfit_range = 1.0;
    const std::vector<FaceRef>* pressure_faces = nullptr;
    double pressure_base = 0.0;
    double pressure_range = 0.0;
    const std::vector<FaceRef>* film_faces = nullptr;
    double film_coefficient = 0.0;

    SolveSettings settings;

    ResolvedLoads loads_at(double lambda) const {
        ResolvedLoads l;
        l.misfit_factor = misfit_base + lambda * misfit_range;
        l.pressure_faces = pressure_faces;
        l.pressure = pressure_base + lambda * pressure_range;
        l.film_faces = film_faces;
        l.film_coefficient = film_coefficient;
        l.film_ambient = ambient_temperature;
        return l;
    }

    /// Default initial state: zero displacement and potential, ambient
    /// temperature.
    Eigen::VectorXd initial_state() const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dofmap.n_dofs());
        for (int32_t g = 0; g < dofmap.n_dofs(); ++g)
            if (dofmap.field_of(g) == kTemp) x[g] = ambient_temperature;
        return x;
    }
};

namespace detail {

/// Residual norms split by field family (mechanical / thermal / electric);
/// mixed-unit residuals must converge per family, not in one mixed norm.
inline std::array<double, 3> field_norms(const DofMap& dofmap, const Eigen::VectorXd& full) {
    std::array<double, 3> s{0.0, 0.0, 0.0};
    for (int32_t g : dofmap.free_dofs()) {
        const Field f = dofmap.field_of(g);
        const int fam = f <= kUz ? 0 : (f == kTemp ? 1 : 2);
        s[fam] += full[g] * full[g];
    }
    for (double& v : s) v = std::sqrt(v);
    return s;
}

} // namespace detail

/// Load-stepping Newton continuation: lambda goes 0 -> 1 over
/// initial_load_steps increments, full Newton per step until every field's
/// residual drops below residual_tolerance relative to the largest residual
/// seen in that step. Divergence or element inversion halves the increment;
/// below min_step_fraction the solve fails with diagnostics.
inline SolveState newton_solve(
    const FemProblem& problem, std::optional<Eigen::VectorXd> initial = std::nullopt,
    const std::function<void(const SolveState&)>& on_step = {}) {
    problem.settings.validate();
    const DofMap& dofmap = problem.dofmap;

    SolveState state;
    state.x = initial ? *initial : problem.initial_state();
    if (state.x.size() != dofmap.n_dofs())
        throw InternalError("newton_solve: initial state size mismatch");
    const Eigen::VectorXd x0 = state.x;

    double lambda = 0.0;
    double dlambda = 1.0 / problem.settings.initial_load_steps;
    std::vector<double> last_norms;

    while (lambda < 1.0 - 1e-12) {
        const double target = std::min(lambda + dlambda, 1.0);
        Eigen::VectorXd x_try = state.x;
        dofmap.apply_prescribed(x_try, x0, target);

        StepRecord record;
        record.load_factor = target;
        bool converged = false;
        bool inverted = false;
        std::array<double, 3> ref{0.0, 0.0, 0.0};

        try {
            for (int it = 0; it <= problem.settings.max_newton_iterations; ++it) {
                const AssembledSystem sys = assemble(*problem.mesh, dofmap,
                                                     problem.element_physics, x_try,
                                                     problem.loads_at(target));
                const std::array<double, 3> norms = detail::field_norms(dofmap, sys.residual);
                for (int f = 0; f < 3; ++f) ref[f] = std::max(ref[f], norms[f]);
                record.residual_norms.push_back(
                    std::sqrt(norms[0] * norms[0] + norms[1] * norms[1] + norms[2] * norms[2]));

                bool ok = true;
                for (int f = 0; f < 3; ++f)
                    ok = ok && norms[f] <= problem.settings.residual_tolerance * ref[f] + 1e-250;
                if (ok) {
                    converged = true;
                    break;
                }
                if (it == problem.settings.max_newton_iterations) break;

                const Eigen::VectorXd r_free = free_residual(dofmap, sys.residual);
                const Eigen::VectorXd dx = sparse_solve(sys.tangent, -r_free);
                for (int32_t i = 0; i < dofmap.n_free(); ++i)
                    x_try[dofmap.free_dofs()[i]] += dx[i];
            }
        } catch (const ElementInversionError&) {
            inverted = true;
        }

        if (converged) {
            state.x = x_try;
            lambda = target;
            state.load_factor = lambda;
            last_norms = record.residual_norms;
            state.history.push_back(std::move(record));
            if (on_step) on_step(state);
        } else {
            dlambda *= 0.5;
            if (dlambda < problem.settings.min_step_fraction - 1e-15) {
                std::ostringstream msg;
                msg << "newton_solve: continuation failed at load factor " << lambda
                    << " (step " << dlambda * 2.0 << (inverted ? ", element inversion" : "")
                    << "); residual history of the failed step:";
                for (double r : record.residual_norms) msg << " " << r;
                throw SolverError(msg.str());
            }
        }
    }
    return state;
}

/// Reactions at the converged state: the full residual restricted to
/// prescribed dofs (internal minus external force there).
inline Eigen::VectorXd compute_reactions(const FemProblem& problem, const SolveState& state) {
    const AssembledSystem sys = assemble(*problem.mesh, problem.dofmap, problem.element_physics,
                                         state.x, problem.loads_at(state.load_factor));
    return sys.residual;
}

} // namespace memsim
