#include "capbem/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "capbem/error.hpp"
#include "capbem/mesh.hpp"
#include "capbem/mesh_io.hpp"
#include "capbem/report.hpp"
#include "capbem/varprinciple.hpp"

namespace capbem::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Bad symform/1 content; mapped to kInput.
class InputError : public Error {
public:
    using Error::Error;
};

// Flag combinations CLI11 cannot express; mapped to kUsage.
class UsageError : public Error {
public:
    using Error::Error;
};

struct MeshSource {
    std::string shape;
    double radius = 1.0;
    double side = 1.0;
    std::vector<double> semiaxes;
    std::vector<int> subdiv;
    std::vector<int> panels_per_edge;
    std::string mesh_path;
    std::string format;
};

struct Common {
    int quad_order = 4;
    std::string solver = "direct";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_path;
    bool json_output = false;
};

void add_mesh_source(CLI::App* cmd, MeshSource& src, bool with_file)
{
    cmd->add_option("--shape", src.shape, "Built-in shape")
        ->check(CLI::IsMember({"icosphere", "cube", "ellipsoid"}));
    cmd->add_option("--radius", src.radius, "Icosphere radius")->check(CLI::PositiveNumber);
    cmd->add_option("--side", src.side, "Cube side length")->check(CLI::PositiveNumber);
    cmd->add_option("--semiaxes", src.semiaxes, "Ellipsoid semi-axes a b c")->expected(3)->check(CLI::PositiveNumber);
    cmd->add_option("--subdiv", src.subdiv, "Icosphere/ellipsoid subdivision level(s)")
        ->expected(1, 16)
        ->check(CLI::Range(0, 7));
    cmd->add_option("--panels-per-edge", src.panels_per_edge, "Cube panels per edge")
        ->expected(1, 16)
        ->check(CLI::Range(1, 256));
    if (with_file)
        cmd->add_option("--mesh", src.mesh_path, "Input mesh file (OBJ or STL)");
}

void add_solver_options(CLI::App* cmd, Common& c)
{
    cmd->add_option("--quad-order", c.quad_order, "Outer quadrature degree")->check(CLI::Range(1, 7));
    cmd->add_option("--solver", c.solver, "Linear solver")->check(CLI::IsMember({"direct", "cg", "auto"}));
    cmd->add_option("--seed", c.seed, "Seed for randomized diagnostics");
    cmd->add_option("--threads", c.threads, "Assembly worker count (0 = runtime default)")->check(CLI::NonNegativeNumber);
}

SolverKind solver_kind(const std::string& name)
{
    if (name == "direct")
        return SolverKind::direct;
    if (name == "cg")
        return SolverKind::cg;
    return SolverKind::automatic;
}

int single(const std::vector<int>& values, int fallback, const char* flag)
{
    if (values.empty())
        return fallback;
    if (values.size() != 1)
        throw UsageError(std::string(flag) + " takes a single value for this command");
    return values.front();
}

void require_shape_source(const MeshSource& src)
{
    if (src.shape.empty())
        throw UsageError("--shape is required");
    if (src.shape == "ellipsoid" && src.semiaxes.size() != 3)
        throw UsageError("ellipsoid needs --semiaxes a b c");
    if (src.shape == "cube" && !src.subdiv.empty())
        throw UsageError("cube takes --panels-per-edge, not --subdiv");
    if (src.shape != "cube" && !src.panels_per_edge.empty())
        throw UsageError(src.shape + " takes --subdiv, not --panels-per-edge");
}

SurfaceMesh shape_mesh(const MeshSource& src, int level)
{
    if (src.shape == "icosphere")
        return make_icosphere(src.radius, level);
    if (src.shape == "cube")
        return make_cube(src.side, level);
    return make_ellipsoid(src.semiaxes[0], src.semiaxes[1], src.semiaxes[2], level);
}

int default_level(const MeshSource& src)
{
    return src.shape == "cube" ? single(src.panels_per_edge, 8, "--panels-per-edge") : single(src.subdiv, 3, "--subdiv");
}

const char* format_name(MeshFormat fmt)
{
    switch (fmt) {
    case MeshFormat::obj:
        return "obj";
    case MeshFormat::stl_ascii:
        return "stl-ascii";
    case MeshFormat::stl_binary:
        return "stl-binary";
    }
    return "?";
}

json shape_json(const MeshSource& src)
{
    json j = {{"kind", "shape"}, {"shape", src.shape}};
    if (src.shape == "icosphere")
        j["radius"] = src.radius;
    else if (src.shape == "cube")
        j["side"] = src.side;
    else
        j["semiaxes"] = src.semiaxes;
    return j;
}

// Mesh for generate/solve: exactly one of --shape or --mesh.
std::pair<SurfaceMesh, json> load_source(const MeshSource& src)
{
    const bool has_shape = !src.shape.empty();
    const bool has_file = !src.mesh_path.empty();
    if (has_shape == has_file)
        throw UsageError("give exactly one mesh source: --shape or --mesh");
    if (has_file) {
        if (!src.subdiv.empty() || !src.panels_per_edge.empty() || !src.semiaxes.empty())
            throw UsageError("shape parameters cannot be combined with --mesh");
        // Plain "stl" leaves ASCII vs binary to the file content.
        const MeshFormat fmt = src.format.empty() || src.format == "stl" ? detect_mesh_format(src.mesh_path)
                                                                          : parse_mesh_format(src.format);
        json j = {{"kind", "file"}, {"path", src.mesh_path}, {"format", format_name(fmt)}};
        return {load_mesh(src.mesh_path, fmt), j};
    }
    require_shape_source(src);
    const int level = default_level(src);
    json j = shape_json(src);
    j[src.shape == "cube" ? "panelsPerEdge" : "subdivisions"] = level;
    return {shape_mesh(src, level), j};
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.flush();
    if (!f)
        throw IoError("write to " + path.string() + " failed");
}

std::string read_text(const fs::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    if (f.bad())
        throw IoError("read error on " + path.string());
    return ss.str();
}

// Shortest round-trip formatting keeps the output bitwise reproducible.
std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

// symform/1: {"schema": "symform/1" (optional), "matrix": [[...]], "u": [...]}.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> parse_symform(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw InputError("symform input must be a JSON object");
    if (doc.contains("schema") && doc["schema"] != "symform/1")
        throw InputError("unsupported schema " + doc["schema"].dump() + ", expected \"symform/1\"");
    if (!doc.contains("matrix") || !doc["matrix"].is_array() || doc["matrix"].empty())
        throw InputError("\"matrix\" must be a non-empty array of rows");
    if (!doc.contains("u") || !doc["u"].is_array())
        throw InputError("\"u\" must be an array of numbers");

    const auto& rows = doc["matrix"];
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw InputError("matrix row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& x = row[static_cast<std::size_t>(k)];
            if (!x.is_number())
                throw InputError("matrix entry (" + std::to_string(i) + ", " + std::to_string(k) + ") is not a number");
            m(i, k) = x.get<double>();
        }
    }
    const auto& uj = doc["u"];
    if (static_cast<Eigen::Index>(uj.size()) != n)
        throw InputError("\"u\" has " + std::to_string(uj.size()) + " entries, matrix is " + std::to_string(n) + "x" +
                         std::to_string(n));
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& x = uj[static_cast<std::size_t>(i)];
        if (!x.is_number())
            throw InputError("u entry " + std::to_string(i) + " is not a number");
        u[i] = x.get<double>();
    }
    if (!m.allFinite() || !u.allFinite())
        throw InputError("input contains non-finite values");
    return {m, u};
}

json error_json(int code, const std::string& kind, const std::string& message)
{
    return {{"schema", "caperror/1"}, {"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
}

int fail(std::ostream& out, std::ostream& err, json doc)
{
    const int code = doc["error"]["code"].get<int>();
    err << "error: " << doc["error"]["message"].get<std::string>() << '\n';
    out << dump(doc);
    return code;
}

int cmd_generate(const MeshSource& src, const Common& c, std::ostream& out)
{
    if (c.out_path.empty())
        throw UsageError("generate needs --out");
    if (!src.mesh_path.empty())
        throw UsageError("generate takes a built-in --shape, not --mesh");
    require_shape_source(src);
    const int level = default_level(src);
    const SurfaceMesh mesh = shape_mesh(src, level);

    MeshFormat fmt;
    if (src.format.empty()) {
        const auto ext = fs::path(c.out_path).extension().string();
        if (ext == ".obj" || ext == ".OBJ")
            fmt = MeshFormat::obj;
        else if (ext == ".stl" || ext == ".STL")
            fmt = MeshFormat::stl_ascii;
        else
            throw UsageError("cannot infer the mesh format from '" + c.out_path + "'; pass --format");
    } else {
        fmt = parse_mesh_format(src.format);
    }
    save_mesh(c.out_path, mesh, fmt);

    json j = shape_json(src);
    j[src.shape == "cube" ? "panelsPerEdge" : "subdivisions"] = level;
    out << dump({{"schema", "capgenerate/1"},
                 {"source", j},
                 {"path", c.out_path},
                 {"format", format_name(fmt)},
                 {"triangles", mesh.num_triangles()},
                 {"vertices", mesh.num_vertices()}});
    return kOk;
}

int cmd_solve(const MeshSource& src, const Common& c, const std::string& dump_prefix, std::ostream& out)
{
    auto [mesh, source] = load_source(src);
    SolveSettings settings;
    settings.quad_order = c.quad_order;
    settings.solver = solver_kind(c.solver);
    settings.seed = c.seed;
    settings.threads = c.threads;

    std::function<void(const GalerkinSystem&)> inspect;
    if (!dump_prefix.empty())
        inspect = [&](const GalerkinSystem& sys) { dump_matrix(sys, dump_prefix + ".bin", dump_prefix + ".json"); };

    const CapacitanceReport report = solve_mesh(mesh, settings, inspect);
    const std::string text = dump(capbem::to_json(report, source));
    if (!c.out_path.empty())
        write_text(c.out_path, text);
    else
        out << text;
    return kOk;
}

int cmd_converge(const MeshSource& src, const Common& c, std::optional<double> order, std::ostream& out)
{
    if (!src.mesh_path.empty())
        throw UsageError("converge refines a built-in --shape; --mesh is not accepted");
    require_shape_source(src);
    const bool cube = src.shape == "cube";
    const std::vector<int> params = cube ? src.panels_per_edge : src.subdiv;
    if (params.size() < 2)
        throw UsageError(std::string("converge needs at least two refinements via ") +
                         (cube ? "--panels-per-edge" : "--subdiv"));

    std::vector<LevelInput> levels;
    for (int p : params) {
        LevelInput in;
        in.parameter = p;
        in.h = cube ? 1.0 / p : std::ldexp(1.0, -p);
        in.make = [&src, p] { return shape_mesh(src, p); };
        levels.push_back(std::move(in));
    }
    for (std::size_t k = 1; k < levels.size(); ++k) {
        if (!(levels[k].h < levels[k - 1].h))
            throw UsageError("refinements must be strictly increasing");
    }

    std::optional<double> exact;
    if (src.shape == "icosphere")
        exact = 4.0 * std::numbers::pi * src.radius;
    else if (src.shape == "ellipsoid")
        exact = ellipsoid_capacitance(src.semiaxes[0], src.semiaxes[1], src.semiaxes[2]);
    // Edges and corners limit the cube to first order; smooth shapes converge
    // at second order with flat panels.
    const double nominal = order.value_or(cube ? 1.0 : 2.0);

    SolveSettings settings;
    settings.quad_order = c.quad_order;
    settings.solver = solver_kind(c.solver);
    settings.seed = c.seed;
    settings.threads = c.threads;
    const ConvergenceStudy study = run_convergence(levels, settings, nominal, exact);

    json source = shape_json(src);
    source[cube ? "panelsPerEdge" : "subdivisions"] = params;
    const std::string text = dump(capbem::to_json(study, source));
    if (!c.out_path.empty())
        write_text(c.out_path, text);
    if (c.json_output)
        out << text;
    else
        out << to_table(study);
    return kOk;
}

int cmd_verify(const std::string& input, const Common& c, const VerifyOptions& base, std::ostream& out)
{
    const std::string text = read_text(input);
    auto [m, u] = parse_symform(text);
    std::optional<SymmetricForm> form;
    try {
        form.emplace(m);
    } catch (const InvalidArgument& e) {
        throw InputError(e.what());
    }
    VerifyOptions options = base;
    options.seed = c.seed;
    const PrincipleReport report = verify_principle(*form, u, options);
    const json doc = capbem::to_json(*form, report);
    const std::string rendered = dump(doc);
    if (!c.out_path.empty())
        write_text(c.out_path, rendered);
    else
        out << rendered;
    return matches_classification(report) ? kOk : kPrincipleMismatch;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Capacitance of closed surfaces by a Galerkin panel method"};
    app.name("capbem");
    app.require_subcommand(1);

    MeshSource src;
    Common c;
    std::string dump_prefix;
    std::optional<double> order;
    std::string input;
    VerifyOptions verify;

    auto* gen = app.add_subcommand("generate", "Write a built-in shape to OBJ or STL");
    add_mesh_source(gen, src, false);
    gen->add_option("--format", src.format, "Output format; stl is full-precision ASCII, stl-binary stores float32")
        ->check(CLI::IsMember({"obj", "stl", "stl-ascii", "stl-binary"}));
    gen->add_option("--out", c.out_path, "Output mesh path")->required();

    auto* solve = app.add_subcommand("solve", "Capacitance and bounds for one mesh");
    add_mesh_source(solve, src, true);
    solve->add_option("--format", src.format, "Input mesh format (default: from extension)")
        ->check(CLI::IsMember({"obj", "stl", "stl-ascii", "stl-binary"}));
    add_solver_options(solve, c);
    solve->add_option("--out", c.out_path, "Write the report here instead of stdout");
    solve->add_flag("--json", c.json_output, "JSON output (the default for solve)");
    solve->add_option("--dump-matrix", dump_prefix, "Write PREFIX.bin (row-major float64) and PREFIX.json");

    auto* conv = app.add_subcommand("converge", "Refinement study with Richardson extrapolation");
    add_mesh_source(conv, src, false);
    add_solver_options(conv, c);
    conv->add_option("--order", order, "Nominal order for pairwise extrapolation (default 1 cube, 2 otherwise)")
        ->check(CLI::PositiveNumber);
    conv->add_option("--out", c.out_path, "Also write the JSON study here");
    conv->add_flag("--json", c.json_output, "Print JSON instead of the text table");

    auto* ver = app.add_subcommand("verify-principle", "Check the max-quotient principle on a symmetric matrix");
    ver->add_option("input,--input", input, "symform/1 JSON file")->required();
    ver->add_option("--seed", c.seed, "Probe seed");
    ver->add_option("--trials", verify.random_trials, "Random probes")->check(CLI::NonNegativeNumber);
    ver->add_option("--sweep-steps", verify.witness.sweep_steps, "Witness sweep length")->check(CLI::Range(1, 200));
    ver->add_option("--approach-factor", verify.witness.approach_factor, "Geometric step of the sweep")
        ->check(CLI::Range(0.01, 0.99));
    ver->add_option("--fallback-budget", verify.fallback_budget, "Random pair budget when no eigen-witness applies")
        ->check(CLI::NonNegativeNumber);
    ver->add_option("--out", c.out_path, "Write the report here instead of stdout");
    ver->add_flag("--json", c.json_output, "JSON output (the default)");

    try {
        // CLI11 wants the arguments in reverse order.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, err, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, err, err);
    } catch (const CLI::ParseError& e) {
        return fail(out, err, error_json(kUsage, "usage", e.what()));
    }

    try {
        if (gen->parsed())
            return cmd_generate(src, c, out);
        if (solve->parsed())
            return cmd_solve(src, c, dump_prefix, out);
        if (conv->parsed())
            return cmd_converge(src, c, order, out);
        return cmd_verify(input, c, verify, out);
    } catch (const UsageError& e) {
        return fail(out, err, error_json(kUsage, "usage", e.what()));
    } catch (const InputError& e) {
        return fail(out, err, error_json(kInput, "input", e.what()));
    } catch (const InvalidArgument& e) {
        return fail(out, err, error_json(kUsage, "invalid_argument", e.what()));
    } catch (const IoError& e) {
        return fail(out, err, error_json(kIo, "io", e.what()));
    } catch (const MeshParseError& e) {
        json doc = error_json(kMeshParse, "mesh_parse", e.what());
        doc["error"]["line"] = e.line();
        return fail(out, err, doc);
    } catch (const MeshWatertightError& e) {
        json doc = error_json(kMeshInvalid, "mesh_watertight", e.what());
        json edges = json::array();
        for (const auto& edge : e.edges())
            edges.push_back({edge[0], edge[1]});
        doc["error"]["boundaryEdges"] = edges;
        return fail(out, err, doc);
    } catch (const MeshDegenerateError& e) {
        json doc = error_json(kMeshInvalid, "mesh_degenerate", e.what());
        doc["error"]["triangle"] = e.triangle();
        return fail(out, err, doc);
    } catch (const MeshIndexError& e) {
        json doc = error_json(kMeshInvalid, "mesh_index", e.what());
        doc["error"]["triangle"] = e.triangle();
        return fail(out, err, doc);
    } catch (const MeshError& e) {
        return fail(out, err, error_json(kMeshInvalid, "mesh", e.what()));
    } catch (const SolveError& e) {
        json doc = error_json(kNumerical, "solve", e.what());
        doc["error"]["residual"] = std::isfinite(e.residual()) ? json(e.residual()) : json(nullptr);
        return fail(out, err, doc);
    } catch (const DimensionMismatch& e) {
        return fail(out, err, error_json(kNumerical, "dimension", e.what()));
    } catch (const NumericalError& e) {
        return fail(out, err, error_json(kNumerical, "numerical", e.what()));
    } catch (const std::exception& e) {
        return fail(out, err, error_json(kInternal, "internal", e.what()));
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace capbem::cli
