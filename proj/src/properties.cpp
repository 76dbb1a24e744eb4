#include <fvgrad/properties.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fvgrad/assembly.hpp>
#include <fvgrad/format.hpp>
#include <fvgrad/linsolve.hpp>
#include <fvgrad/verify.hpp>

namespace fvgrad {

bool PropertyReport::all_passed() const
{
    return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

const PropertyResult& PropertyReport::operator[](const std::string& name) const
{
    for (const auto& r : results)
        if (r.name == name) return r;
    throw SpecError("no property named '" + name + "'");
}

namespace {

class Sampler
{
public:
    explicit Sampler(std::uint64_t seed) : _rng(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(_rng() >> 11) * 0x1.0p-53); }

    Eigen::VectorXd vector(Index n, double lo = -1, double hi = 1)
    {
        Eigen::VectorXd v(n);
        for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 _rng;
};

PropertyResult make(std::string name, double worst, double limit, std::string what)
{
    PropertyResult r;
    r.name = std::move(name);
    r.worst = worst;
    r.passed = worst <= limit;
    r.detail = what + " " + format_double(worst) + " (limit " + format_double(limit) + ")";
    return r;
}

// Smooth, variable, symmetric positive definite test tensor.
ProblemSpec assembly_problem()
{
    ProblemSpec p;
    p.diffusion = [](const Point& x) {
        Tensor lam(2, 2);
        lam << 2 + std::sin(x[0]), 0.5 * std::cos(x[1]), 0.5 * std::cos(x[1]), 2 + std::cos(x[0]);
        return lam;
    };
    p.source = [](const Point& x) { return 1 + x[0] * x[1]; };
    p.dirichlet = [](const Point& x) { return x[0] + 2 * x[1]; };
    return p;
}

} // namespace

PropertyReport property_suite(const Mesh& mesh, const PropertyOptions& opts)
{
    PropertyReport rep;
    Sampler rnd(opts.seed);
    const int d = mesh.dimension();
    const Index n = mesh.num_cells();
    auto add = [&](PropertyResult r) { rep.results.push_back(std::move(r)); };

    // Geometric identities.
    {
        double worst = 0;
        for (const Cell& c : mesh.cells()) {
            for (int t = 0; t < 3; ++t) {
                const Point x0 = c.center + c.diameter * rnd.vector(d);
                const Eigen::VectorXd v = rnd.vector(d);
                Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
                for (Index e : c.edge_ids) {
                    const Edge& s = mesh.edge(e);
                    acc += s.measure * (s.barycenter - x0) * s.normal_from(c.id).dot(v);
                }
                worst = std::max(worst, (acc / c.measure - v).norm() / v.norm());
            }
        }
        add(make("chxs_identity", worst, 1e-10, "max relative residual"));
    }
    {
        double worst = 0;
        for (const Cell& c : mesh.cells()) {
            double s = 0;
            for (Index e : c.edge_ids) s += mesh.edge(e).measure * mesh.edge(e).distance_from(c.id);
            worst = std::max(worst, std::abs(s - d * c.measure) / (d * c.measure));
        }
        add(make("distance_sum", worst, 1e-10, "max relative deviation"));
    }
    {
        double worst = 0;
        for (const Cell& c : mesh.cells()) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
            double perimeter = 0;
            for (Index e : c.edge_ids) {
                acc += mesh.edge(e).measure * mesh.edge(e).normal_from(c.id);
                perimeter += mesh.edge(e).measure;
            }
            worst = std::max(worst, acc.norm() / perimeter);
        }
        add(make("normal_closure", worst, 1e-10, "max relative residual"));
    }
    {
        double worst = 0;
        for (const Edge& s : mesh.edges()) {
            if (s.is_boundary()) continue;
            const Point& xk = mesh.cell(s.inner_cell).center;
            const Point& xl = mesh.cell(*s.outer_cell).center;
            worst = std::max(worst, (s.normal - (xl - xk) / s.center_distance).norm());
        }
        add(make("interior_normal", worst, 1e-10, "max deviation"));
    }

    // Discrete functional inequalities on random fields with g = 0.
    const EdgeCoefficients coeffs = edge_coefficients(mesh);
    {
        double worst_p = 0, worst_g = 0, worst_sym = 0, worst_lin = 0;
        const double grad_const = std::sqrt(2.0 * d) / mesh.theta();
        for (int t = 0; t < opts.samples; ++t) {
            const DiscreteField u(mesh, rnd.vector(n));
            const DiscreteField v(mesh, rnd.vector(n));
            const double nu = discrete_norm(u);
            worst_p = std::max(worst_p, l2_norm(u) / (mesh.domain_diameter() * nu));
            const GradientField gu = discrete_gradient(u, coeffs);
            worst_g = std::max(worst_g, l2_norm(gu) / (grad_const * nu));

            const Eigen::VectorXd alpha = rnd.vector(mesh.num_edges(), opts.alpha0, 3 * opts.alpha0);
            worst_sym = std::max(worst_sym, std::abs(bilinear_form(u, v, alpha) - bilinear_form(v, u, alpha)));

            const double a = rnd.uniform(-2, 2), b = rnd.uniform(-2, 2);
            const GradientField gv = discrete_gradient(v, coeffs);
            const GradientField gw = discrete_gradient(DiscreteField(mesh, a * u.values + b * v.values), coeffs);
            const double scale = std::max(1.0, (std::abs(a) * gu.vectors + std::abs(b) * gv.vectors).cwiseAbs().maxCoeff());
            worst_lin = std::max(worst_lin, (gw.vectors - a * gu.vectors - b * gv.vectors).cwiseAbs().maxCoeff() / scale);
        }
        add(make("poincare", worst_p, 1.0, "max ratio ||u|| / (diam ||u||_D)"));
        add(make("gradient_bound", worst_g, 1.0, "max ratio ||grad_D u|| / (C ||u||_D)"));
        add(make("bilinear_symmetry", worst_sym, 0.0, "max |[u,v] - [v,u]|"));
        add(make("gradient_linearity", worst_lin, 1e-12, "max relative deviation"));
    }
    {
        double worst = 0;
        for (AlphaRule rule : {AlphaRule::diamond_mean, AlphaRule::harmonic_cells}) {
            for (int t = 0; t < opts.samples / 2; ++t) {
                const Eigen::VectorXd cell_alpha = rnd.vector(n, opts.alpha0, 3 * opts.alpha0);
                const Eigen::VectorXd alpha = edge_alpha(mesh, cell_alpha, rule);
                const DiscreteField u(mesh, rnd.vector(n));
                const double nu = discrete_norm(u);
                worst = std::max(worst, opts.alpha0 * nu * nu / bilinear_form(u, u, alpha));
            }
        }
        add(make("coercivity", worst, 1.0 + 1e-12, "max ratio alpha0 ||u||_D^2 / [u,u]"));
    }

    // Assembled system.
    const ProblemSpec problem = assembly_problem();
    Discretization disc;
    LinearSystem sys;
    try {
        disc = discretize(mesh, problem);
        sys = assemble(disc);
    } catch (const Error& e) {
        PropertyResult r;
        r.name = "assembly";
        r.detail = e.what();
        add(std::move(r));
        return rep;
    }
    {
        double worst = 0;
        const Eigen::SparseMatrix<double> t = sys.matrix.transpose();
        const Eigen::SparseMatrix<double> a = sys.matrix;
        const Eigen::SparseMatrix<double> diff = a - t;
        for (Index k = 0; k < diff.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
                const double aij = a.coeff(it.row(), it.col()), aji = a.coeff(it.col(), it.row());
                worst = std::max(worst, std::abs(it.value()) / (std::abs(aij) + std::abs(aji) + 1));
            }
        }
        add(make("matrix_symmetry", worst, 1e-12, "max relative asymmetry"));
    }
    {
        const double a0 = disc.alpha.minCoeff();
        double worst = 0;
        for (int t = 0; t < opts.samples; ++t) {
            const DiscreteField x(mesh, rnd.vector(n));
            const double nx = discrete_norm(x);
            const double xax = x.values.dot(sys.matrix * x.values);
            worst = std::max(worst, xax > 0 ? a0 * nx * nx / xax : std::numeric_limits<double>::infinity());
        }
        add(make("matrix_coercivity", worst, 1.0 + 1e-10, "max ratio alpha0 ||x||_D^2 / x^T A x"));
    }
    {
        const auto ring = two_ring_stencil(mesh);
        bool all_tri = true, all_quad = true;
        for (const Cell& c : mesh.cells()) {
            all_tri = all_tri && c.vertex_ids.size() == 3;
            all_quad = all_quad && c.vertex_ids.size() == 4;
        }
        const Index bound = all_tri ? 10 : all_quad ? 13 : n;
        Index widest = 0, outside = 0;
        for (Index i = 0; i < sys.matrix.outerSize(); ++i) {
            Index count = 0;
            const auto& allowed = ring[static_cast<std::size_t>(i)];
            for (SparseMatrix::InnerIterator it(sys.matrix, i); it; ++it) {
                ++count;
                if (!std::binary_search(allowed.begin(), allowed.end(), static_cast<Index>(it.col()))) ++outside;
            }
            widest = std::max(widest, count);
        }
        PropertyResult r;
        r.name = "stencil";
        r.worst = static_cast<double>(widest);
        r.passed = outside == 0 && widest <= bound;
        r.detail = "widest row " + std::to_string(widest) + " (bound " + std::to_string(bound) + "), " +
                   std::to_string(outside) + " entries outside the two-ring";
        add(std::move(r));
    }
    if (n <= opts.oracle_max_cells) {
        const DenseOracle o = dense_scheme_oracle(disc);
        const Eigen::MatrixXd a = Eigen::MatrixXd(sys.matrix);
        const double dm = (a - o.matrix).cwiseAbs().maxCoeff();
        const double dr = (sys.rhs - o.rhs).cwiseAbs().maxCoeff();
        add(make("oracle_equivalence", std::max(dm, dr), 1e-12, "max entry difference"));
    } else {
        PropertyResult r;
        r.name = "oracle_equivalence";
        r.passed = true;
        r.skipped = true;
        r.detail = "skipped: more than " + std::to_string(opts.oracle_max_cells) + " cells";
        add(std::move(r));
    }
    {
        SolverOptions so;
        try {
            const auto [u, stats] = solve(mesh, sys, so);
            const double true_res = (sys.rhs - sys.matrix * u.values).norm() / sys.rhs.norm();
            add(make("solver_residual", true_res / std::max(stats.final_relative_residual, 1e-300), 2.0,
                     "true / reported residual"));
            const FluxField f = reconstruct_fluxes(u, disc);
            const double bal = (f.balance() - disc.source).cwiseAbs().maxCoeff();
            add(make("flux_conservation", bal, 10 * so.tol * sys.rhs.norm(), "max balance residual"));
            double anti = 0;
            for (const Edge& s : mesh.edges()) {
                if (!s.is_boundary()) anti = std::max(anti, std::abs(f.from(s.id, s.inner_cell) + f.from(s.id, *s.outer_cell)));
            }
            add(make("flux_antisymmetry", anti, 0.0, "max |F_KL + F_LK|"));
        } catch (const Error& e) {
            PropertyResult r;
            r.name = "flux_conservation";
            r.detail = e.what();
            add(std::move(r));
        }
    }
    return rep;
}

} // namespace fvgrad
