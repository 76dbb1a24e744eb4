#include <fvgrad/assembly.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <fvgrad/format.hpp>
#include <fvgrad/mesh_io.hpp>

namespace fvgrad {

double smallest_eigenvalue(const Tensor& m)
{
    if (m.rows() == 2 && m.cols() == 2) {
        const double tr = 0.5 * (m(0, 0) + m(1, 1));
        const double dif = 0.5 * (m(0, 0) - m(1, 1));
        return tr - std::hypot(dif, m(0, 1));
    }
    Eigen::SelfAdjointEigenSolver<Tensor> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double ProblemSpec::alpha_at(const Point& x) const
{
    return alpha ? alpha(x) : smallest_eigenvalue(diffusion(x));
}

namespace {

struct WeightedPoint
{
    Point x;
    double w;
};

// Centroid rule, or one point per triangle of the centroid fan.
std::vector<WeightedPoint> cell_points(const Mesh& mesh, const Cell& c, CellQuadrature rule)
{
    if (rule == CellQuadrature::centroid || c.vertex_ids.size() < 3) return {{c.barycenter, 1.0}};
    std::vector<WeightedPoint> q;
    const std::size_t n = c.vertex_ids.size();
    const Point& z = c.barycenter;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[i])];
        const Point& b = mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[(i + 1) % n])];
        const double area = 0.5 * std::abs((a[0] - z[0]) * (b[1] - z[1]) - (b[0] - z[0]) * (a[1] - z[1]));
        q.push_back({Point((a + b + z) / 3.0), area / c.measure});
    }
    return q;
}

} // namespace

CellTensor cell_tensor(const ProblemSpec& problem, const Mesh& mesh, const AssemblyOptions& opts)
{
    if (!problem.diffusion) throw SpecError("problem has no diffusion tensor");
    const int d = mesh.dimension();
    CellTensor out;
    out.values.reserve(static_cast<std::size_t>(mesh.num_cells()));
    for (const Cell& c : mesh.cells()) {
        const std::string tag = " (cell " + std::to_string(c.id) + ")";
        Tensor acc = Tensor::Zero(d, d);
        for (const auto& qp : cell_points(mesh, c, opts.quadrature)) {
            const Tensor lam = problem.diffusion(qp.x);
            if (lam.rows() != d || lam.cols() != d) throw DimensionError("diffusion tensor has wrong shape" + tag);
            if (!lam.allFinite()) throw SpecError("non-finite diffusion tensor" + tag);
            const double scale = lam.cwiseAbs().maxCoeff();
            if ((lam - lam.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
                throw SpecError("diffusion tensor is not symmetric" + tag);
            }
            const double a = problem.alpha_at(qp.x);
            const double lmin = smallest_eigenvalue(lam);
            if (!(a > 0) || !std::isfinite(a)) throw CoercivityError("alpha must be positive" + tag);
            if (a > opts.alpha_ceiling * lmin * (1 + 1e-12)) {
                throw CoercivityError("alpha " + format_double(a) + " exceeds the admissible bound " +
                                      format_double(opts.alpha_ceiling * lmin) + tag);
            }
            acc += qp.w * (lam - a * Tensor::Identity(d, d));
        }
        out.values.push_back(std::move(acc));
    }
    return out;
}

Discretization discretize(const Mesh& mesh, const ProblemSpec& problem, const AssemblyOptions& opts)
{
    for (const Edge& s : mesh.edges()) {
        if (!std::isfinite(s.transmissibility) || !(s.transmissibility > 0)) {
            throw InadmissibleMeshError("non-finite or non-positive transmissibility on edge " + std::to_string(s.id),
                                        s.inner_cell);
        }
    }
    Discretization disc;
    disc.mesh = &mesh;
    disc.coeffs = edge_coefficients(mesh, opts.variant);
    disc.tensors = cell_tensor(problem, mesh, opts);
    disc.alpha = edge_alpha(mesh, [&](const Point& x) { return problem.alpha_at(x); }, opts.alpha_rule);
    disc.g = problem.dirichlet ? BoundaryData::from_function(mesh, problem.dirichlet) : BoundaryData::zero(mesh);
    disc.source = Eigen::VectorXd::Zero(mesh.num_cells());
    if (problem.source) {
        for (const Cell& c : mesh.cells()) {
            double s = 0;
            for (const auto& qp : cell_points(mesh, c, opts.quadrature)) s += qp.w * problem.source(qp.x);
            if (!std::isfinite(s)) throw EvaluationError("non-finite source integral in cell " + std::to_string(c.id));
            disc.source[c.id] = c.measure * s;
        }
    }
    return disc;
}

LinearSystem assemble(const Discretization& disc)
{
    const Mesh& mesh = *disc.mesh;
    const Index n = mesh.num_cells();
    const int d = mesh.dimension();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 16);
    Eigen::VectorXd rhs = disc.source;

    // Two-point part [u, v]_{D, alpha}; the boundary datum goes to the rhs.
    for (const Edge& s : mesh.edges()) {
        const Index k = s.inner_cell;
        const double w = s.transmissibility * disc.alpha[s.id];
        trip.emplace_back(k, k, w);
        if (s.is_boundary()) {
            rhs[k] += w * disc.g.values[s.id];
        } else {
            const Index l = *s.outer_cell;
            trip.emplace_back(l, l, w);
            trip.emplace_back(k, l, -w);
            trip.emplace_back(l, k, -w);
        }
    }

    // Gradient part: (grad_D u)_K = sum_j c_j u_j + b_K over j in {K} u N_K.
    std::vector<Index> cols;
    std::vector<Eigen::VectorXd> coef;
    for (const Cell& c : mesh.cells()) {
        const Tensor& lam = disc.tensors.values[static_cast<std::size_t>(c.id)];
        if (lam.isZero(0)) continue;
        cols.assign(1, c.id);
        coef.assign(1, Eigen::VectorXd::Zero(d));
        Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
        for (Index e : c.edge_ids) {
            const Edge& s = mesh.edge(e);
            const Eigen::VectorXd a = disc.coeffs.from(s, c.id) / c.measure;
            coef[0] -= a;
            if (s.is_boundary()) {
                b += disc.g.values[e] * a;
            } else {
                cols.push_back(s.neighbor(c.id));
                coef.push_back(a);
            }
        }
        const Eigen::VectorXd lb = lam * b;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const Eigen::VectorXd lj = lam * coef[j];
            rhs[cols[j]] -= c.measure * coef[j].dot(lb);
            for (std::size_t i = 0; i <= j; ++i) {
                const double v = c.measure * coef[i].dot(lj);
                trip.emplace_back(cols[i], cols[j], v);
                if (i != j) trip.emplace_back(cols[j], cols[i], v);
            }
        }
    }

    LinearSystem sys;
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    sys.rhs = std::move(rhs);
    return sys;
}

LinearSystem assemble(const Mesh& mesh, const ProblemSpec& problem, const AssemblyOptions& opts)
{
    return assemble(discretize(mesh, problem, opts));
}

Eigen::VectorXd FluxField::balance() const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh->num_cells());
    for (const Cell& c : mesh->cells()) {
        for (Index e : c.edge_ids) out[c.id] += from(e, c.id);
    }
    return out;
}

FluxField reconstruct_fluxes(const DiscreteField& u, const Discretization& disc)
{
    require_same_mesh(u.mesh, disc.mesh);
    const Mesh& mesh = *disc.mesh;
    const GradientField grad = discrete_gradient(u, disc.g, disc.coeffs);
    auto tensor_flux = [&](const Edge& s, Index k) {
        return (disc.tensors.values[static_cast<std::size_t>(k)] * disc.coeffs.from(s, k)).dot(grad.vectors.col(k));
    };

    FluxField f;
    f.mesh = &mesh;
    f.values = Eigen::VectorXd::Zero(mesh.num_edges());
    for (const Edge& s : mesh.edges()) {
        const Index k = s.inner_cell;
        const double w = s.transmissibility * disc.alpha[s.id];
        if (s.is_boundary()) {
            f.values[s.id] = w * (u.values[k] - disc.g.values[s.id]) - tensor_flux(s, k);
        } else {
            const Index l = *s.outer_cell;
            f.values[s.id] = w * (u.values[k] - u.values[l]) + tensor_flux(s, l) - tensor_flux(s, k);
        }
    }
    return f;
}

std::vector<std::vector<Index>> two_ring_stencil(const Mesh& mesh)
{
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(mesh.num_cells()));
    for (const Cell& c : mesh.cells()) {
        std::set<Index> s{c.id};
        for (Index l : mesh.neighbors(c.id)) {
            s.insert(l);
            for (Index m : mesh.neighbors(l)) s.insert(m);
        }
        out[static_cast<std::size_t>(c.id)].assign(s.begin(), s.end());
    }
    return out;
}

void write_matrix_market(const LinearSystem& system, std::ostream& out, const std::vector<std::string>& comments)
{
    const SparseMatrix& a = system.matrix;
    Index nnz = 0;
    for (Index i = 0; i < a.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            if (it.col() <= i) ++nnz;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    for (const auto& c : comments) out << "% " << c << '\n';
    out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    for (Index i = 0; i < a.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            if (it.col() <= i) out << i + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
}

void write_matrix_market(const LinearSystem& system, const std::filesystem::path& path,
                         const std::vector<std::string>& comments)
{
    std::ostringstream os;
    write_matrix_market(system, os, comments);
    write_file_atomic(path, os.str());
}

} // namespace fvgrad
