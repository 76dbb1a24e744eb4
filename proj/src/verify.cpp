#include <fvgrad/verify.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <type_traits>

#include <fvgrad/format.hpp>

namespace fvgrad {

namespace {

constexpr double pi = std::numbers::pi;

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Fourth-order central difference of f along axis i.
template <class F>
std::decay_t<std::invoke_result_t<const F&, const Point&>> central_diff(const F& f, const Point& x, int i, double h)
{
    Point a = x, b = x, c = x, d = x;
    a[i] += 2 * h;
    b[i] += h;
    c[i] -= h;
    d[i] -= 2 * h;
    return (-f(a) + 8 * f(b) - 8 * f(c) + f(d)) / (12 * h);
}

void gate(const TestCase& tc)
{
    const ResidualCheck r = manufactured_residual(tc);
    if (!r.passed) {
        throw SpecError("manufactured solution of " + tc.name + " fails its residual check (residual " +
                        format_double(r.max_pde_residual) + ", gradient mismatch " +
                        format_double(r.max_gradient_mismatch) + ")");
    }
}

Eigen::Vector2d sin_sin_grad(const Point& x)
{
    return {pi * std::cos(pi * x[0]) * std::sin(pi * x[1]), pi * std::sin(pi * x[0]) * std::cos(pi * x[1])};
}

double sin_sin(const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); }

} // namespace

ResidualCheck manufactured_residual(const TestCase& tc, int samples, std::uint64_t seed)
{
    const ProblemSpec& p = tc.problem;
    if (!p.diffusion || !p.exact_u || !p.exact_grad) throw SpecError("test case lacks diffusion or exact solution");
    std::mt19937_64 rng(seed);
    const double h = 1e-3 * std::min(tc.domain.width(), tc.domain.height());
    auto grad_fd = [&](const Point& x) {
        Eigen::VectorXd g(2);
        for (int i = 0; i < 2; ++i) g[i] = central_diff(p.exact_u, x, i, h);
        return g;
    };
    auto flux = [&](const Point& x) -> Eigen::VectorXd { return p.diffusion(x) * grad_fd(x); };

    ResidualCheck out;
    out.passed = true;
    for (int s = 0; s < samples; ++s) {
        Point x(2);
        x[0] = tc.domain.lo.x() + (0.05 + 0.9 * unit_double(rng)) * tc.domain.width();
        x[1] = tc.domain.lo.y() + (0.05 + 0.9 * unit_double(rng)) * tc.domain.height();
        double div = 0;
        for (int i = 0; i < 2; ++i) div += central_diff(flux, x, i, h)[i];
        const double f = p.source ? p.source(x) : 0.0;
        const double res = std::abs(-div - f) / (1 + std::abs(f));
        const double gm = (grad_fd(x) - p.exact_grad(x)).norm() / (1 + p.exact_grad(x).norm());
        out.max_pde_residual = std::max(out.max_pde_residual, res);
        out.max_gradient_mismatch = std::max(out.max_gradient_mismatch, gm);
        if (!(res <= 1e-6) || !(gm <= 1e-6)) out.passed = false;
    }
    return out;
}

TestCase case1()
{
    TestCase tc;
    tc.name = "case1";
    Tensor lam(2, 2);
    lam << 1.5, 0.5, 0.5, 1.5;
    tc.problem.diffusion = [lam](const Point&) { return lam; };
    tc.problem.source = [](const Point& x) {
        return pi * pi * (3 * sin_sin(x) - std::cos(pi * x[0]) * std::cos(pi * x[1]));
    };
    tc.problem.exact_u = sin_sin;
    tc.problem.exact_grad = [](const Point& x) -> Eigen::VectorXd { return sin_sin_grad(x); };
    tc.alpha_interval = {0.0, 1.0};
    gate(tc);
    return tc;
}

TestCase case2()
{
    TestCase tc;
    tc.name = "case2";
    const Eigen::Vector2d c(0.5, 1.1);
    tc.problem.diffusion = [c](const Point& x) {
        const Eigen::Vector2d er = (Eigen::Vector2d(x[0], x[1]) - c).normalized();
        const Eigen::Vector2d et(-er.y(), er.x());
        Tensor lam = 10 * Tensor::Identity(2, 2);
        lam += 0.2 * (er * et.transpose() + et * er.transpose());
        return lam;
    };
    auto u = [c](const Point& x) { return 0.5 * std::log((x[0] - c.x()) * (x[0] - c.x()) + (x[1] - c.y()) * (x[1] - c.y())); };
    tc.problem.exact_u = u;
    tc.problem.dirichlet = u;
    tc.problem.exact_grad = [c](const Point& x) -> Eigen::VectorXd {
        const Eigen::Vector2d r = Eigen::Vector2d(x[0], x[1]) - c;
        return r / r.squaredNorm();
    };
    tc.alpha_interval = {0.0, 9.8};
    gate(tc);
    return tc;
}

TestCase isotropic_case()
{
    TestCase tc;
    tc.name = "isotropic";
    tc.problem.diffusion = [](const Point&) { return Tensor::Identity(2, 2); };
    tc.problem.alpha = [](const Point&) { return 1.0; };
    tc.problem.source = [](const Point& x) { return 2 * pi * pi * sin_sin(x); };
    tc.problem.exact_u = sin_sin;
    tc.problem.exact_grad = [](const Point& x) -> Eigen::VectorXd { return sin_sin_grad(x); };
    tc.alpha_interval = {0.0, 1.0};
    gate(tc);
    return tc;
}

TestCase make_case(const std::string& name)
{
    if (name == "case1") return case1();
    if (name == "case2") return case2();
    if (name == "isotropic") return isotropic_case();
    throw SpecError("unknown case '" + name + "' (expected case1, case2 or isotropic)");
}

Mesh build_family_mesh(const Rectangle& domain, const FamilyOptions& opts, Index level)
{
    if (opts.family == MeshFamily::rectangular) return build_rectangular_mesh(level, level, domain);
    DelaunayOptions d;
    d.resolution = level;
    d.jitter = opts.jitter;
    d.seed = opts.seed;
    d.domain = domain;
    d.theta_min = opts.theta_min;
    return build_delaunay_mesh(d);
}

CaseSolution solve_case(const TestCase& tc, const Mesh& mesh, const CaseOptions& opts)
{
    ProblemSpec problem = tc.problem;
    if (opts.alpha) {
        const double a = *opts.alpha;
        problem.alpha = [a](const Point&) { return a; };
    }
    CaseSolution out;
    out.disc = discretize(mesh, problem, opts.assembly);
    out.system = assemble(out.disc);
    auto [u, stats] = solve(mesh, out.system, opts.solver);
    out.u = std::move(u);
    out.stats = stats;
    out.grad = discrete_gradient(out.u, out.disc.g, out.disc.coeffs);
    const DiscreteField pu = interpolate(mesh, problem.exact_u);
    out.err_u = l2_norm(DiscreteField(mesh, out.u.values - pu.values));
    out.err_grad = l2_error(out.grad, problem.exact_grad);
    return out;
}

namespace {

ConvergenceRow convergence_level(const TestCase& tc, const ConvergenceOptions& opts, Index level)
{
    const std::string ctx = "level " + std::to_string(level) + ": ";
    try {
        const Mesh mesh = build_family_mesh(tc.domain, opts.mesh, level);
        const CaseSolution s = solve_case(tc, mesh, opts.solve);
        return {mesh.h(), mesh.num_cells(), mesh.theta(), s.err_u, s.err_grad, s.stats.iterations};
    } catch (const NonConvergenceError& e) {
        throw NonConvergenceError(ctx + e.what(), e.stats());
    } catch (const BreakdownError& e) {
        throw BreakdownError(ctx + e.what(), e.stats());
    } catch (const InadmissibleMeshError& e) {
        throw InadmissibleMeshError(ctx + e.what(), e.cell());
    } catch (const CoercivityError& e) {
        throw CoercivityError(ctx + e.what());
    } catch (const DegenerateInputError& e) {
        throw DegenerateInputError(ctx + e.what());
    } catch (const Error& e) {
        throw Error(ctx + e.what());
    }
}

} // namespace

ConvergenceReport run_convergence(const TestCase& tc, const ConvergenceOptions& opts)
{
    if (opts.levels.size() < 3) throw SpecError("a convergence run needs at least three levels");
    for (std::size_t i = 1; i < opts.levels.size(); ++i) {
        if (opts.levels[i] <= opts.levels[i - 1]) throw SpecError("levels must be strictly increasing");
    }
    if (opts.levels.front() < 1) throw SpecError("levels must be positive");
    const double span = static_cast<double>(opts.levels.back()) / static_cast<double>(opts.levels.front());
    if (span * span < 16 * (1 - 1e-12)) throw SpecError("levels must span a factor of at least 16 in cell count");

    ConvergenceReport rep;
    rep.rows.resize(opts.levels.size());
    const std::size_t workers = std::max(1u, opts.threads);
    for (std::size_t start = 0; start < opts.levels.size(); start += workers) {
        const std::size_t stop = std::min(opts.levels.size(), start + workers);
        if (workers == 1) {
            rep.rows[start] = convergence_level(tc, opts, opts.levels[start]);
            continue;
        }
        std::vector<std::future<ConvergenceRow>> jobs;
        for (std::size_t i = start; i < stop; ++i) {
            jobs.push_back(std::async(std::launch::async, convergence_level, std::cref(tc), std::cref(opts),
                                      opts.levels[i]));
        }
        // Wait for every job before rethrowing the first failure.
        for (auto& j : jobs) j.wait();
        for (std::size_t i = start; i < stop; ++i) rep.rows[i] = jobs[i - start].get();
    }

    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        if (!(rep.rows[i].h < rep.rows[i - 1].h)) throw SpecError("mesh size does not decrease across levels");
    }
    std::vector<double> h, eu, eg;
    for (const auto& r : rep.rows) {
        h.push_back(r.h);
        eu.push_back(r.err_u);
        eg.push_back(r.err_grad);
    }
    rep.eoc_u = eoc_regression(h, eu).slope;
    rep.eoc_grad = eoc_regression(h, eg).slope;
    return rep;
}

EocFit eoc_regression(std::span<const double> h, std::span<const double> err)
{
    if (h.size() != err.size()) throw DimensionError("eoc_regression: h and err differ in length");
    EocFit fit;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0) || !std::isfinite(h[i])) throw SpecError("eoc_regression: mesh sizes must be positive");
        if (!(err[i] > 0) || !std::isfinite(err[i])) {
            fit.excluded.push_back(i);
            continue;
        }
        x.push_back(std::log(h[i]));
        y.push_back(std::log(err[i]));
    }
    if (x.size() < 3) throw SpecError("eoc_regression: fewer than three usable points");
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n), yv(y.data(), n);
    const double xm = xv.mean(), ym = yv.mean();
    const Eigen::VectorXd dx = xv.array() - xm;
    const double sxx = dx.squaredNorm();
    if (!(sxx > 0)) throw SpecError("eoc_regression: all mesh sizes are equal");
    fit.slope = dx.dot(yv.array().matrix() - Eigen::VectorXd::Constant(n, ym)) / sxx;
    fit.intercept = ym - fit.slope * xm;
    return fit;
}

AlphaSweepReport alpha_sweep(const TestCase& tc, const Mesh& mesh, std::span<const double> grid, CaseOptions opts,
                             double alpha_ceiling)
{
    if (grid.empty()) throw SpecError("alpha grid is empty");
    opts.assembly.alpha_ceiling = alpha_ceiling;
    AlphaSweepReport rep;
    for (double a : grid) {
        AlphaSweepRow row;
        row.alpha = a;
        try {
            opts.alpha = a;
            const CaseSolution s = solve_case(tc, mesh, opts);
            row.err_u = s.err_u;
            row.err_grad = s.err_grad;
            row.converged = true;
        } catch (const Error& e) {
            row.err_u = std::numeric_limits<double>::quiet_NaN();
            row.err_grad = std::numeric_limits<double>::quiet_NaN();
            row.failure = e.what();
        }
        rep.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        if (!r.converged) continue;
        if (!rep.argmin_u || r.err_u < rep.rows[*rep.argmin_u].err_u) rep.argmin_u = i;
        if (!rep.argmin_grad || r.err_grad < rep.rows[*rep.argmin_grad].err_grad) rep.argmin_grad = i;
    }
    return rep;
}

DenseOracle dense_scheme_oracle(const Discretization& disc)
{
    const Mesh& mesh = *disc.mesh;
    const Index n = mesh.num_cells();
    if (n > 400) throw DimensionError("dense_scheme_oracle: more than 400 cells");
    const BoundaryData zero = BoundaryData::zero(mesh);

    std::vector<DiscreteField> basis;
    std::vector<GradientField> grads;
    for (Index i = 0; i < n; ++i) {
        DiscreteField e = DiscreteField::zero(mesh);
        e.values[i] = 1;
        grads.push_back(discrete_gradient(e, zero, disc.coeffs));
        basis.push_back(std::move(e));
    }
    auto energy = [&](const GradientField& a, const GradientField& b) {
        double s = 0;
        for (const Cell& c : mesh.cells()) {
            s += c.measure * a.vectors.col(c.id).dot(disc.tensors.values[static_cast<std::size_t>(c.id)] *
                                                     b.vectors.col(c.id));
        }
        return s;
    };

    DenseOracle out;
    out.matrix.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            out.matrix(i, j) = energy(grads[j], grads[i]) + bilinear_form(basis[j], basis[i], disc.alpha);

    const DiscreteField lift = DiscreteField::zero(mesh);
    const GradientField glift = discrete_gradient(lift, disc.g, disc.coeffs);
    out.rhs.resize(n);
    for (Index i = 0; i < n; ++i) {
        out.rhs[i] = disc.source[i] - energy(glift, grads[i]) -
                     bilinear_form(lift, basis[i], disc.alpha, disc.g, zero);
    }
    return out;
}

Eigen::MatrixXd two_point_matrix(const Mesh& mesh, const Eigen::VectorXd& alpha)
{
    if (alpha.size() != mesh.num_edges()) throw DimensionError("alpha length differs from edge count");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mesh.num_cells(), mesh.num_cells());
    for (const Cell& c : mesh.cells()) {
        for (Index e : c.edge_ids) {
            const Edge& s = mesh.edge(e);
            const double w = alpha[e] * s.measure / s.center_distance;
            a(c.id, c.id) += w;
            if (!s.is_boundary()) a(c.id, s.neighbor(c.id)) -= w;
        }
    }
    return a;
}

std::vector<ConsistencyRow> gradient_consistency(const ScalarFunction& u, const VectorFunction& grad,
                                                 const Rectangle& domain, const FamilyOptions& family,
                                                 std::span<const Index> levels)
{
    std::vector<ConsistencyRow> out;
    for (Index level : levels) {
        const Mesh mesh = build_family_mesh(domain, family, level);
        const EdgeCoefficients coeffs = edge_coefficients(mesh);
        const GradientField g = discrete_gradient(interpolate(mesh, u), BoundaryData::from_function(mesh, u), coeffs);
        out.push_back({mesh.h(), l2_error(g, grad)});
    }
    return out;
}

} // namespace fvgrad
