#include <fvgrad/mesh_io.hpp>

#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace fvgrad {

namespace {

using json = nlohmann::json;

long line_of(std::string_view text, std::size_t byte)
{
    long line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

// Scanner over an already-validated document: finds where a field path such as
// "cells[3].vertices" starts.
struct Locator
{
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws()
    {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    std::string read_string()
    {
        std::string out;
        ++pos;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\') ++pos;
            if (pos < text.size()) out += text[pos++];
        }
        ++pos;
        return out;
    }

    void skip_value()
    {
        skip_ws();
        if (pos >= text.size()) return;
        const char c = text[pos];
        if (c == '"') {
            read_string();
        } else if (c == '{' || c == '[') {
            const char close = c == '{' ? '}' : ']';
            ++pos;
            skip_ws();
            while (pos < text.size() && text[pos] != close) {
                if (c == '{') {
                    read_string();
                    skip_ws();
                    ++pos;
                }
                skip_value();
                skip_ws();
                if (pos < text.size() && text[pos] == ',') ++pos;
                skip_ws();
            }
            ++pos;
        } else {
            while (pos < text.size() && !std::strchr(",]} \t\r\n", text[pos])) ++pos;
        }
    }

    // Moves to the start of child `key` (object) or element `index` (array).
    bool enter(const std::string& key, long index)
    {
        skip_ws();
        if (pos >= text.size()) return false;
        const char c = text[pos];
        if ((c == '{') != (index < 0) || (c != '{' && c != '[')) return false;
        ++pos;
        for (long i = 0;; ++i) {
            skip_ws();
            if (pos >= text.size() || text[pos] == '}' || text[pos] == ']') return false;
            bool hit = i == index;
            if (c == '{') {
                hit = read_string() == key;
                skip_ws();
                ++pos;
                skip_ws();
            }
            if (hit) return true;
            skip_value();
            skip_ws();
            if (pos < text.size() && text[pos] == ',') ++pos;
        }
    }
};

long locate_field(std::string_view text, const std::string& field)
{
    Locator loc{text};
    static const std::regex segment(R"(([A-Za-z_]+)|\[(\d+)\])");
    for (auto it = std::sregex_iterator(field.begin(), field.end(), segment); it != std::sregex_iterator(); ++it) {
        const bool ok = (*it)[1].matched ? loc.enter((*it)[1].str(), -1) : loc.enter({}, std::stol((*it)[2].str()));
        if (!ok) break;
    }
    return line_of(text, loc.pos);
}

Point read_point(const json& j, int dim, const std::string& field)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        throw ParseError(field + ": expected an array of " + std::to_string(dim) + " numbers", -1, field);
    }
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ParseError(field + ": non-numeric coordinate", -1, field);
        p[i] = j[static_cast<std::size_t>(i)].get<double>();
        if (!std::isfinite(p[i])) throw ParseError(field + ": non-finite coordinate", -1, field);
    }
    return p;
}

} // namespace

static Mesh read_document(const json& doc, const ImportOptions& opts);

Mesh parse_mesh(std::string_view text, const ImportOptions& opts)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed mesh document: ") + e.what(), line_of(text, e.byte));
    }
    try {
        return read_document(doc, opts);
    } catch (const ParseError& e) {
        if (e.line() >= 0 || e.field().empty()) throw;
        throw ParseError(e.what(), locate_field(text, e.field()), e.field());
    }
}

static Mesh read_document(const json& doc, const ImportOptions& opts)
{
    if (!doc.is_object()) throw ParseError("mesh document must be an object");
    for (const char* key : {"dimension", "vertices", "cells"}) {
        if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'", -1, key);
    }
    if (!doc["dimension"].is_number_integer()) throw ParseError("dimension must be an integer", -1, "dimension");
    const int dim = doc["dimension"].get<int>();
    if (dim != 2) throw ParseError("only dimension 2 polygon meshes can be imported", -1, "dimension");

    const json& jv = doc["vertices"];
    if (!jv.is_array()) throw ParseError("vertices must be an array", -1, "vertices");
    std::vector<Point> vertices;
    vertices.reserve(jv.size());
    for (std::size_t i = 0; i < jv.size(); ++i) {
        vertices.push_back(read_point(jv[i], dim, "vertices[" + std::to_string(i) + "]"));
    }

    const json& jc = doc["cells"];
    if (!jc.is_array()) throw ParseError("cells must be an array", -1, "cells");
    std::vector<std::vector<Index>> polys;
    std::vector<std::optional<Point>> centers;
    for (std::size_t k = 0; k < jc.size(); ++k) {
        const std::string field = "cells[" + std::to_string(k) + "]";
        const json& c = jc[k];
        if (!c.is_object() || !c.contains("vertices") || !c["vertices"].is_array()) {
            throw ParseError(field + ": expected an object with a 'vertices' array", -1, field);
        }
        std::vector<Index> poly;
        for (const auto& id : c["vertices"]) {
            if (!id.is_number_integer()) throw ParseError(field + ".vertices: non-integer index", -1, field + ".vertices");
            const auto v = id.get<long long>();
            if (v < 0 || v >= static_cast<long long>(vertices.size())) {
                throw ParseError(field + ".vertices: missing vertex " + std::to_string(v), -1, field + ".vertices");
            }
            poly.push_back(static_cast<Index>(v));
        }
        polys.push_back(std::move(poly));
        if (c.contains("center")) {
            centers.emplace_back(read_point(c["center"], dim, field + ".center"));
        } else {
            centers.emplace_back(std::nullopt);
        }
    }

    Mesh mesh;
    try {
        mesh = Mesh::from_polygons(std::move(vertices), polys, centers);
    } catch (const DegenerateInputError& e) {
        throw ParseError(e.what());
    }
    if (!opts.allow_invalid) require_admissible(mesh, opts.validation);
    return mesh;
}

Mesh import_mesh(const std::filesystem::path& path, const ImportOptions& opts)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open mesh file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_mesh(ss.str(), opts);
}

std::string mesh_to_string(const Mesh& mesh)
{
    if (mesh.dimension() != 2) throw DimensionError("only 2D polygon meshes can be exported");
    json doc;
    doc["dimension"] = mesh.dimension();
    json jv = json::array();
    for (const auto& v : mesh.vertices()) jv.push_back({v[0], v[1]});
    doc["vertices"] = std::move(jv);
    json jc = json::array();
    for (const auto& c : mesh.cells()) {
        if (c.vertex_ids.empty()) throw DimensionError("cell without polygon description cannot be exported");
        json o;
        o["vertices"] = c.vertex_ids;
        o["center"] = {c.center[0], c.center[1]};
        jc.push_back(std::move(o));
    }
    doc["cells"] = std::move(jc);
    return doc.dump(1) + "\n";
}

void export_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
    write_file_atomic(path, mesh_to_string(mesh));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace fvgrad
