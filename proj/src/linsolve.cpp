#include <fvgrad/linsolve.hpp>

namespace fvgrad {

std::pair<DiscreteField, SolveStats> solve(const Mesh& mesh, const LinearSystem& system, const SolverOptions& opts)
{
    auto res = conjugate_gradient(system.matrix, system.rhs, opts);
    return {DiscreteField(mesh, std::move(res.solution)), res.stats};
}

DiscreteField dense_solve(const Mesh& mesh, const LinearSystem& system)
{
    if (system.matrix.rows() > 2000) throw DimensionError("dense_solve: more than 2000 unknowns");
    const Eigen::MatrixXd a = Eigen::MatrixXd(system.matrix);
    return {mesh, dense_solve(a, system.rhs)};
}

} // namespace fvgrad
