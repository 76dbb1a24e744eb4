#include <fvgrad/cli.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <fvgrad/format.hpp>
#include <fvgrad/linsolve.hpp>
#include <fvgrad/mesh_io.hpp>
#include <fvgrad/properties.hpp>
#include <fvgrad/validate.hpp>
#include <fvgrad/verify.hpp>

namespace fvgrad {

namespace {

using json = nlohmann::json;

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

std::string join_ints(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join_doubles(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

// Config fields that influence the output of the command, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c)
{
    std::vector<std::pair<std::string, std::string>> kv{{"command", c.command}};
    auto add = [&](const char* k, std::string v) { kv.emplace_back(k, std::move(v)); };
    const bool meshed = c.command != "mesh-check";
    const bool solves = c.command == "solve" || c.command == "convergence" || c.command == "alpha-sweep";
    if (!c.input.empty()) {
        add("input", c.input);
        add("allow_invalid", c.allow_invalid ? "true" : "false");
    } else if (meshed) {
        add("mesh", c.mesh);
        if (c.command == "convergence") add("levels", join_ints(c.levels));
        else add("n", std::to_string(c.n));
        if (c.mesh == "delaunay") add("jitter", format_double(c.jitter));
    }
    if (solves) {
        add("case", c.case_name);
        if (c.command == "alpha-sweep") {
            add("alpha_grid", join_doubles(c.alpha_grid));
            add("alpha_ceiling", format_double(c.alpha_ceiling));
        } else {
            add("alpha", c.alpha ? format_double(*c.alpha) : "auto");
        }
        add("variant", c.variant);
        add("alpha_rule", c.alpha_rule);
        add("tol", format_double(c.tol));
        add("max_iter", std::to_string(c.max_iter));
    }
    if (c.command == "properties") add("samples", std::to_string(c.samples));
    return kv;
}

std::vector<std::string> header_lines(const RunConfig& c)
{
    std::string cfg;
    for (const auto& [k, v] : config_echo(c)) cfg += (cfg.empty() ? "" : " ") + k + "=" + v;
    return {std::string("fv ") + tool_version, "config: " + cfg, "seed: " + std::to_string(c.seed)};
}

json meta(const RunConfig& c)
{
    json cfg = json::object();
    for (const auto& [k, v] : config_echo(c)) cfg[k] = v;
    return {{"tool", "fv"}, {"version", tool_version}, {"config", cfg}, {"seed", c.seed}};
}

std::string csv_header(const RunConfig& c)
{
    std::string s;
    for (const auto& l : header_lines(c)) s += "# " + l + "\n";
    return s;
}

void emit(const RunConfig& c, const std::string& content, std::ostream& out)
{
    if (c.output.empty()) out << content;
    else write_file_atomic(c.output, content);
}

std::string dump_json(const json& j) { return j.dump(1) + "\n"; }

void validate(const RunConfig& c)
{
    if (c.command == "mesh-check" && c.input.empty()) throw UsageError("mesh check requires --input");
    if (c.command == "alpha-sweep" && c.alpha_grid.empty()) throw UsageError("alpha-sweep requires --alpha-grid");
    if (c.command == "convergence") {
        if (c.levels.size() < 3) throw UsageError("--levels needs at least three values");
        for (std::size_t i = 1; i < c.levels.size(); ++i)
            if (c.levels[i] <= c.levels[i - 1]) throw UsageError("--levels must be strictly increasing");
        const double span = static_cast<double>(c.levels.back()) / c.levels.front();
        if (span * span < 16) throw UsageError("--levels must span a factor of at least 16 in cell count");
        if (!c.input.empty()) throw UsageError("convergence builds its own meshes; --input is not accepted");
    }
    for (int l : c.levels)
        if (l < 1) throw UsageError("--levels must be positive");
    if (c.alpha && !(*c.alpha > 0)) throw UsageError("--alpha must be positive");
    for (double a : c.alpha_grid)
        if (!(a > 0)) throw UsageError("--alpha-grid values must be positive");
    if (c.mesh == "delaunay" && c.n < 3) throw UsageError("--n must be at least 3 for delaunay meshes");
    if (!(c.jitter >= 0 && c.jitter < 0.3)) throw UsageError("--jitter must lie in [0, 0.3)");
}

unsigned worker_count(std::size_t jobs)
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw UsageError("FV_THREADS must be a positive integer");
        n = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

FamilyOptions family(const RunConfig& c)
{
    FamilyOptions f;
    f.family = c.mesh == "delaunay" ? MeshFamily::delaunay : MeshFamily::rectangular;
    f.jitter = c.jitter;
    f.seed = c.seed;
    return f;
}

Mesh load_mesh(const RunConfig& c, const Rectangle& domain)
{
    if (!c.input.empty()) {
        ImportOptions io;
        io.allow_invalid = c.allow_invalid;
        return import_mesh(c.input, io);
    }
    return build_family_mesh(domain, family(c), c.n);
}

CaseOptions case_options(const RunConfig& c)
{
    CaseOptions o;
    o.alpha = c.alpha;
    o.assembly.variant = c.variant == "barycenter" ? GradientVariant::barycenter : GradientVariant::center;
    o.assembly.alpha_rule = c.alpha_rule == "harmonic_cells" ? AlphaRule::harmonic_cells : AlphaRule::diamond_mean;
    o.solver.tol = c.tol;
    o.solver.max_iter = c.max_iter;
    return o;
}

int cmd_mesh_gen(const RunConfig& c, std::ostream& out)
{
    const Mesh mesh = load_mesh(c, Rectangle{});
    json doc = json::parse(mesh_to_string(mesh));
    doc["meta"] = meta(c);
    emit(c, dump_json(doc), out);
    return 0;
}

int cmd_mesh_check(const RunConfig& c, std::ostream& out)
{
    ImportOptions io;
    io.allow_invalid = true;
    const Mesh mesh = import_mesh(c.input, io);
    const ValidationReport r = validate_admissibility(mesh);
    if (c.format == "json") {
        json v = json::array();
        for (const auto& x : r.violations) {
            v.push_back({{"kind", to_string(x.kind)}, {"cell", x.cell}, {"edge", x.edge}, {"value", x.value},
                         {"message", x.message}});
        }
        const json doc{{"meta", meta(c)},
                       {"admissible", r.admissible()},
                       {"cells", mesh.num_cells()},
                       {"theta", r.theta},
                       {"h", r.h},
                       {"max_orthogonality_deviation", r.max_orthogonality_deviation},
                       {"max_chxs_residual", r.max_chxs_residual},
                       {"hypregee_sufficient", r.hypregee_sufficient},
                       {"centers_on_boundary", r.centers_on_boundary},
                       {"violations", v}};
        emit(c, dump_json(doc), out);
    } else {
        std::string s = csv_header(c);
        s += "kind,cell,edge,value\n";
        for (const auto& x : r.violations) {
            s += std::string(to_string(x.kind)) + "," + std::to_string(x.cell) + "," + std::to_string(x.edge) + "," +
                 format_double(x.value) + "\n";
        }
        s += "# admissible=" + std::string(r.admissible() ? "true" : "false") + "\n";
        s += "# cells=" + std::to_string(mesh.num_cells()) + "\n";
        s += "# theta=" + format_double(r.theta) + "\n";
        s += "# h=" + format_double(r.h) + "\n";
        s += "# max_orthogonality_deviation=" + format_double(r.max_orthogonality_deviation) + "\n";
        s += "# max_chxs_residual=" + format_double(r.max_chxs_residual) + "\n";
        s += "# hypregee_sufficient=" + std::string(r.hypregee_sufficient ? "true" : "false") + "\n";
        emit(c, s, out);
    }
    return r.admissible() ? 0 : 1;
}

int cmd_solve(const RunConfig& c, std::ostream& out)
{
    const TestCase tc = make_case(c.case_name);
    const Mesh mesh = load_mesh(c, tc.domain);
    const CaseSolution s = solve_case(tc, mesh, case_options(c));
    if (!c.dump_matrix.empty()) write_matrix_market(s.system, c.dump_matrix, header_lines(c));

    if (c.format == "json") {
        json cells = json::array();
        for (const Cell& k : mesh.cells()) {
            cells.push_back({{"cell_id", k.id}, {"x", std::vector<double>(k.center.begin(), k.center.end())},
                             {"u", s.u.values[k.id]}});
        }
        const json doc{{"meta", meta(c)},       {"iterations", s.stats.iterations},
                       {"relative_residual", s.stats.final_relative_residual},
                       {"err_u_l2", s.err_u},   {"err_grad_l2", s.err_grad},
                       {"cells", cells}};
        emit(c, dump_json(doc), out);
        return 0;
    }
    std::string t = csv_header(c);
    t += "cell_id";
    const char* axes[] = {"x", "y", "z"};
    for (int i = 0; i < mesh.dimension(); ++i) t += std::string(",") + (i < 3 ? axes[i] : "x" + std::to_string(i));
    t += ",u\n";
    for (const Cell& k : mesh.cells()) {
        t += std::to_string(k.id);
        for (int i = 0; i < mesh.dimension(); ++i) t += "," + format_double(k.center[i]);
        t += "," + format_double(s.u.values[k.id]) + "\n";
    }
    t += "# iterations=" + std::to_string(s.stats.iterations) + "\n";
    t += "# relative_residual=" + format_double(s.stats.final_relative_residual) + "\n";
    t += "# err_u_l2=" + format_double(s.err_u) + "\n";
    t += "# err_grad_l2=" + format_double(s.err_grad) + "\n";
    emit(c, t, out);
    return 0;
}

int cmd_convergence(const RunConfig& c, std::ostream& out)
{
    const TestCase tc = make_case(c.case_name);
    ConvergenceOptions o;
    o.mesh = family(c);
    o.levels.assign(c.levels.begin(), c.levels.end());
    o.solve = case_options(c);
    o.threads = worker_count(c.levels.size());
    const ConvergenceReport r = run_convergence(tc, o);

    if (c.format == "json") {
        json rows = json::array();
        for (const auto& x : r.rows) {
            rows.push_back({{"h", x.h}, {"cells", x.cells}, {"theta", x.theta}, {"err_u_l2", x.err_u},
                            {"err_grad_l2", x.err_grad}, {"iterations", x.iterations}});
        }
        emit(c, dump_json({{"meta", meta(c)}, {"rows", rows}, {"eoc_u", r.eoc_u}, {"eoc_grad", r.eoc_grad}}), out);
        return 0;
    }
    std::string t = csv_header(c) + "h,cells,theta,err_u_l2,err_grad_l2\n";
    for (const auto& x : r.rows) {
        t += format_double(x.h) + "," + std::to_string(x.cells) + "," + format_double(x.theta) + "," +
             format_double(x.err_u) + "," + format_double(x.err_grad) + "\n";
    }
    t += "# eoc_u=" + format_double(r.eoc_u) + "\n";
    t += "# eoc_grad=" + format_double(r.eoc_grad) + "\n";
    emit(c, t, out);
    return 0;
}

int cmd_alpha_sweep(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const TestCase tc = make_case(c.case_name);
    const Mesh mesh = load_mesh(c, tc.domain);
    const AlphaSweepReport r = alpha_sweep(tc, mesh, c.alpha_grid, case_options(c), c.alpha_ceiling);
    for (const auto& x : r.rows)
        if (!x.converged) err << "alpha " << format_double(x.alpha) << ": " << x.failure << "\n";

    auto argmin = [&](const std::optional<std::size_t>& i) {
        return i ? format_double(r.rows[*i].alpha) : std::string("none");
    };
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& x : r.rows) {
            json row{{"alpha", x.alpha}, {"converged", x.converged}};
            row["err_u_l2"] = x.converged ? json(x.err_u) : json(nullptr);
            row["err_grad_l2"] = x.converged ? json(x.err_grad) : json(nullptr);
            if (!x.converged) row["failure"] = x.failure;
            rows.push_back(row);
        }
        emit(c, dump_json({{"meta", meta(c)}, {"rows", rows}, {"argmin_u", argmin(r.argmin_u)},
                           {"argmin_grad", argmin(r.argmin_grad)}}),
             out);
        return 0;
    }
    std::string t = csv_header(c) + "alpha,err_u_l2,err_grad_l2,converged\n";
    for (const auto& x : r.rows) {
        t += format_double(x.alpha) + "," + (x.converged ? format_double(x.err_u) : "nan") + "," +
             (x.converged ? format_double(x.err_grad) : "nan") + "," + (x.converged ? "true" : "false") + "\n";
    }
    t += "# argmin_u=" + argmin(r.argmin_u) + "\n";
    t += "# argmin_grad=" + argmin(r.argmin_grad) + "\n";
    emit(c, t, out);
    return 0;
}

int cmd_properties(const RunConfig& c, std::ostream& out)
{
    const Mesh mesh = load_mesh(c, Rectangle{});
    PropertyOptions po;
    po.seed = c.seed;
    po.samples = c.samples;
    const PropertyReport r = property_suite(mesh, po);
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& x : r.results) {
            rows.push_back({{"property", x.name}, {"passed", x.passed}, {"skipped", x.skipped}, {"worst", x.worst},
                            {"detail", x.detail}});
        }
        emit(c, dump_json({{"meta", meta(c)}, {"properties", rows}, {"all_passed", r.all_passed()}}), out);
    } else {
        std::string t = csv_header(c) + "property,passed,skipped,worst\n";
        for (const auto& x : r.results) {
            t += x.name + "," + (x.passed ? "true" : "false") + "," + (x.skipped ? "true" : "false") + "," +
                 format_double(x.worst) + "\n";
        }
        emit(c, t, out);
    }
    return r.all_passed() ? 0 : 1;
}

void add_mesh_options(CLI::App* app, RunConfig& c, bool family_levels)
{
    app->add_option("--mesh", c.mesh, "mesh family")->check(CLI::IsMember({"rect", "delaunay"}));
    if (family_levels) {
        app->add_option("--levels", c.levels, "refinement levels, comma separated")->delimiter(',');
    } else {
        app->add_option("--n", c.n, "cells per side (rect) or lattice columns (delaunay)")
            ->check(CLI::Range(1, 100000));
        app->add_option("--input", c.input, "mesh file instead of a generated mesh")->check(CLI::ExistingFile);
        app->add_flag("--allow-invalid", c.allow_invalid, "skip the admissibility gate on --input");
    }
    app->add_option("--seed", c.seed, "seed for jittered meshes and random fields");
    app->add_option("--jitter", c.jitter, "relative vertex jitter for delaunay meshes");
}

void add_output_options(CLI::App* app, RunConfig& c)
{
    app->add_option("--output", c.output, "output file (default: standard output)");
    app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "json"}));
}

void add_solver_options(CLI::App* app, RunConfig& c)
{
    app->add_option("--case", c.case_name, "test case")->check(CLI::IsMember({"case1", "case2", "isotropic"}));
    app->add_option("--variant", c.variant, "gradient variant")->check(CLI::IsMember({"center", "barycenter"}));
    app->add_option("--alpha-rule", c.alpha_rule, "edge alpha rule")
        ->check(CLI::IsMember({"diamond_mean", "harmonic_cells"}));
    app->add_option("--tol", c.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", c.max_iter, "iteration cap")->check(CLI::PositiveNumber);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    CLI::App app{"Finite volume solver for anisotropic diffusion", "fv"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    auto* mesh = app.add_subcommand("mesh", "generate or check meshes");
    mesh->require_subcommand(1);
    auto* gen = mesh->add_subcommand("gen", "generate a mesh file");
    add_mesh_options(gen, c, false);
    add_output_options(gen, c);
    auto* check = mesh->add_subcommand("check", "validate a mesh file");
    check->add_option("--input", c.input, "mesh file")->required()->check(CLI::ExistingFile);
    add_output_options(check, c);

    auto* solve = app.add_subcommand("solve", "solve one case on one mesh");
    add_mesh_options(solve, c, false);
    add_solver_options(solve, c);
    add_output_options(solve, c);
    solve->add_option("--alpha", c.alpha, "constant alpha (default: smallest eigenvalue of the tensor)");
    solve->add_option("--dump-matrix", c.dump_matrix, "MatrixMarket dump of the system matrix");

    auto* conv = app.add_subcommand("convergence", "convergence study over a mesh family");
    add_mesh_options(conv, c, true);
    add_solver_options(conv, c);
    add_output_options(conv, c);
    conv->add_option("--alpha", c.alpha, "constant alpha (default: smallest eigenvalue of the tensor)");

    auto* sweep = app.add_subcommand("alpha-sweep", "errors over a grid of constant alpha values");
    add_mesh_options(sweep, c, false);
    add_solver_options(sweep, c);
    add_output_options(sweep, c);
    sweep->add_option("--alpha-grid", c.alpha_grid, "alpha values, comma separated")->delimiter(',')->required();
    sweep->add_option("--alpha-ceiling", c.alpha_ceiling, "largest alpha as a multiple of the smallest eigenvalue")
        ->check(CLI::PositiveNumber);

    auto* props = app.add_subcommand("properties", "run the property suite on a mesh");
    add_mesh_options(props, c, false);
    add_output_options(props, c);
    props->add_option("--samples", c.samples, "random fields per property")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, x;
        const int code = app.exit(e, o, x);
        out << o.str();
        err << x.str();
        return code == 0 ? 0 : 2;
    }

    if (*gen) c.command = "mesh-gen";
    else if (*check) c.command = "mesh-check";
    else if (*solve) c.command = "solve";
    else if (*conv) c.command = "convergence";
    else if (*sweep) c.command = "alpha-sweep";
    else c.command = "properties";

    try {
        validate(c);
        if (c.command == "mesh-gen") return cmd_mesh_gen(c, out);
        if (c.command == "mesh-check") return cmd_mesh_check(c, out);
        if (c.command == "solve") return cmd_solve(c, out);
        if (c.command == "convergence") return cmd_convergence(c, out);
        if (c.command == "alpha-sweep") return cmd_alpha_sweep(c, out, err);
        return cmd_properties(c, out);
    } catch (const UsageError& e) {
        err << "fv: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "fv: " << e.what() << "\n";
        return 1;
    }
}

} // namespace fvgrad
