#include <fvgrad/generators.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <fvgrad/validate.hpp>

namespace fvgrad {

namespace {

void check_domain(const Rectangle& d)
{
    if (!d.lo.allFinite() || !d.hi.allFinite() || !(d.width() > 0) || !(d.height() > 0)) {
        throw InvalidDomainError("domain rectangle must have positive width and height");
    }
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double hull_area(std::vector<Eigen::Vector2d> p)
{
    std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
        h[k++] = p[i - 1];
    }
    h.resize(k > 0 ? k - 1 : 0);
    return polygon_geometry(h).area;
}

} // namespace

Mesh build_rectangular_mesh(Index nx, Index ny, const Rectangle& domain)
{
    if (nx < 1 || ny < 1) throw DegenerateInputError("nx and ny must be at least 1");
    check_domain(domain);
    const double hx = domain.width() / static_cast<double>(nx);
    const double hy = domain.height() / static_cast<double>(ny);

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (Index j = 0; j <= ny; ++j) {
        for (Index i = 0; i <= nx; ++i) {
            // Pin the far sides exactly to the domain.
            const double x = (i == nx) ? domain.hi.x() : domain.lo.x() + static_cast<double>(i) * hx;
            const double y = (j == ny) ? domain.hi.y() : domain.lo.y() + static_cast<double>(j) * hy;
            vertices.push_back(Point(Eigen::Vector2d(x, y)));
        }
    }
    auto vid = [nx](Index i, Index j) { return j * (nx + 1) + i; };

    std::vector<std::vector<Index>> polys;
    std::vector<std::optional<Point>> centers;
    polys.reserve(static_cast<std::size_t>(nx * ny));
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            polys.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            const auto& a = vertices[static_cast<std::size_t>(vid(i, j))];
            const auto& b = vertices[static_cast<std::size_t>(vid(i + 1, j + 1))];
            centers.emplace_back(Point(0.5 * (a + b)));
        }
    }
    return Mesh::from_polygons(std::move(vertices), polys, centers);
}

std::vector<Eigen::Vector2d> delaunay_lattice(const DelaunayOptions& opts)
{
    check_domain(opts.domain);
    if (opts.resolution < 2) throw DegenerateInputError("resolution must be at least 2");
    if (!(opts.jitter >= 0 && opts.jitter < 0.3)) throw DegenerateInputError("jitter must lie in [0, 0.3)");

    const Index n = opts.resolution;
    const double W = opts.domain.width();
    const double H = opts.domain.height();
    const double dx = W / static_cast<double>(n);

    // Even row count so that the top row is a boundary row of the same parity
    // as the bottom one; row spacing closest to 0.78 dx.
    constexpr double target = 0.78;
    Index m = 2;
    for (Index cand = 2; cand <= 8 * n + 8; cand += 2) {
        const double r = H / (static_cast<double>(cand) * dx);
        const double rb = H / (static_cast<double>(m) * dx);
        if (std::abs(r - target) < std::abs(rb - target)) m = cand;
    }
    const double dy = H / static_cast<double>(m);
    // First point of an offset row; acute boundary triangles need dy < q dx < dx.
    const double q = 0.5 * (1.0 + dy / dx);

    std::vector<Eigen::Vector2d> pts;
    for (Index j = 0; j <= m; ++j) {
        const double y = (j == m) ? opts.domain.hi.y() : opts.domain.lo.y() + static_cast<double>(j) * dy;
        if (j % 2 == 0) {
            for (Index i = 0; i <= n; ++i) {
                const double x = (i == n) ? opts.domain.hi.x() : opts.domain.lo.x() + static_cast<double>(i) * dx;
                pts.emplace_back(x, y);
            }
        } else {
            const double first = opts.domain.lo.x() + q * dx;
            const double last = opts.domain.hi.x() - q * dx;
            if (last - first <= 0.5 * dx) {
                pts.emplace_back(0.5 * (opts.domain.lo.x() + opts.domain.hi.x()), y);
                continue;
            }
            pts.emplace_back(first, y);
            for (Index i = 1; i + 1 < n; ++i) {
                pts.emplace_back(opts.domain.lo.x() + (static_cast<double>(i) + 0.5) * dx, y);
            }
            pts.emplace_back(last, y);
        }
    }

    if (opts.jitter > 0) {
        std::mt19937_64 rng(opts.seed);
        const double radius = 0.25 * opts.jitter * dx;
        for (auto& p : pts) {
            const double u1 = unit(rng);
            const double u2 = unit(rng);
            const double dist = std::min({p.x() - opts.domain.lo.x(), opts.domain.hi.x() - p.x(),
                                          p.y() - opts.domain.lo.y(), opts.domain.hi.y() - p.y()});
            // No displacement within one spacing of the boundary, full beyond three.
            const double ramp = std::clamp((dist / dx - 1.0) / 2.0, 0.0, 1.0);
            if (ramp == 0) continue;
            const double r = ramp * radius * std::sqrt(u1);
            const double a = 2.0 * M_PI * u2;
            p += r * Eigen::Vector2d(std::cos(a), std::sin(a));
        }
    }
    return pts;
}

std::vector<std::array<Index, 3>> bowyer_watson(const std::vector<Eigen::Vector2d>& points)
{
    const Index np = static_cast<Index>(points.size());
    if (np < 3) throw DegenerateInputError("at least three points are required");

    Eigen::Vector2d lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        if (!p.allFinite()) throw DegenerateInputError("non-finite point coordinate");
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double extent = std::max((hi - lo).maxCoeff(), std::numeric_limits<double>::min());
    {
        std::vector<Index> order(static_cast<std::size_t>(np));
        for (Index i = 0; i < np; ++i) order[static_cast<std::size_t>(i)] = i;
        auto at = [&](Index i) -> const Eigen::Vector2d& { return points[static_cast<std::size_t>(i)]; };
        std::sort(order.begin(), order.end(), [&](Index a, Index b) {
            return at(a).x() < at(b).x() || (at(a).x() == at(b).x() && at(a).y() < at(b).y());
        });
        for (std::size_t i = 1; i < order.size(); ++i) {
            if ((at(order[i]) - at(order[i - 1])).norm() <= 1e-12 * extent) {
                throw DegenerateInputError("duplicate points " + std::to_string(order[i - 1]) + " and " +
                                           std::to_string(order[i]));
            }
        }
    }

    std::vector<Eigen::Vector2d> p = points;
    const Eigen::Vector2d mid = 0.5 * (lo + hi);
    const double big = 50.0 * extent;
    p.emplace_back(mid.x() - 2 * big, mid.y() - big);
    p.emplace_back(mid.x() + 2 * big, mid.y() - big);
    p.emplace_back(mid.x(), mid.y() + 2 * big);

    struct Tri
    {
        std::array<Index, 3> v;
        Eigen::Vector2d cc;
        double r2;
    };
    auto make = [&](Index a, Index b, Index c) {
        if (cross(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)], p[static_cast<std::size_t>(c)]) < 0) {
            std::swap(b, c);
        }
        Tri t{{a, b, c}, Eigen::Vector2d::Zero(), 0};
        t.cc = circumcenter(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)], p[static_cast<std::size_t>(c)]);
        t.r2 = (t.cc - p[static_cast<std::size_t>(a)]).squaredNorm();
        return t;
    };

    std::vector<Tri> tris{make(np, np + 1, np + 2)};
    std::vector<Tri> keep;
    std::vector<std::array<Index, 2>> cavity;
    for (Index i = 0; i < np; ++i) {
        const Eigen::Vector2d& x = p[static_cast<std::size_t>(i)];
        keep.clear();
        cavity.clear();
        for (const Tri& t : tris) {
            if ((x - t.cc).squaredNorm() < t.r2) {
                for (int e = 0; e < 3; ++e) cavity.push_back({t.v[e], t.v[(e + 1) % 3]});
            } else {
                keep.push_back(t);
            }
        }
        // Cavity boundary: edges not shared by two removed triangles.
        for (std::size_t a = 0; a < cavity.size(); ++a) {
            bool shared = false;
            for (std::size_t b = 0; b < cavity.size() && !shared; ++b) {
                shared = a != b && cavity[a][0] == cavity[b][1] && cavity[a][1] == cavity[b][0];
            }
            if (!shared) keep.push_back(make(cavity[a][0], cavity[a][1], i));
        }
        std::swap(tris, keep);
    }

    std::vector<std::array<Index, 3>> out;
    for (const Tri& t : tris) {
        if (t.v[0] >= np || t.v[1] >= np || t.v[2] >= np) continue;
        out.push_back(t.v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Mesh triangulate_points(const std::vector<Eigen::Vector2d>& points, double theta_min)
{
    const auto tris = bowyer_watson(points);
    double area = 0;
    std::vector<std::vector<Index>> polys;
    polys.reserve(tris.size());
    for (const auto& t : tris) {
        area += 0.5 * cross(points[static_cast<std::size_t>(t[0])], points[static_cast<std::size_t>(t[1])],
                            points[static_cast<std::size_t>(t[2])]);
        polys.push_back({t[0], t[1], t[2]});
    }
    const double hull = hull_area(points);
    if (!(std::abs(area - hull) <= 1e-9 * hull)) {
        throw DegenerateInputError("triangulation does not cover the convex hull of the points");
    }

    std::vector<Point> vertices;
    vertices.reserve(points.size());
    for (const auto& v : points) vertices.push_back(Point(v));
    Mesh mesh = Mesh::from_polygons(std::move(vertices), polys);

    ValidationOptions vopts;
    vopts.theta_min = theta_min;
    require_admissible(mesh, vopts);
    return mesh;
}

Mesh build_delaunay_mesh(const DelaunayOptions& opts)
{
    return triangulate_points(delaunay_lattice(opts), opts.theta_min);
}

} // namespace fvgrad
