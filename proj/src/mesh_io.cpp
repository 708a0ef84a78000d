#include "capbem/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "capbem/error.hpp"

namespace capbem {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Merges points closer than `tol` using a uniform grid of cell size tol.
class VertexWelder {
public:
    explicit VertexWelder(double tol) : tol_(tol) {}

    std::size_t insert(const Vec3& p)
    {
        const auto cell = cell_of(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid_.find({cell[0] + dx, cell[1] + dy, cell[2] + dz});
                    if (it == grid_.end())
                        continue;
                    for (std::size_t idx : it->second)
                        if ((points_[idx] - p).norm() <= tol_)
                            return idx;
                }
        points_.push_back(p);
        grid_[cell].push_back(points_.size() - 1);
        return points_.size() - 1;
    }

    std::vector<Vec3> take() { return std::move(points_); }

private:
    std::array<std::int64_t, 3> cell_of(const Vec3& p) const
    {
        return {static_cast<std::int64_t>(std::floor(p.x() / tol_)),
                static_cast<std::int64_t>(std::floor(p.y() / tol_)),
                static_cast<std::int64_t>(std::floor(p.z() / tol_))};
    }

    double tol_;
    std::vector<Vec3> points_;
    std::map<std::array<std::int64_t, 3>, std::vector<std::size_t>> grid_;
};

SurfaceMesh weld_triangle_soup(const std::vector<std::array<Vec3, 3>>& soup)
{
    if (soup.empty())
        throw MeshParseError("STL contains no facets", 0);
    std::vector<Vec3> all;
    all.reserve(soup.size() * 3);
    for (const auto& f : soup)
        all.insert(all.end(), f.begin(), f.end());
    const double diag = bounding_box(all).diagonal();
    double tol = 1e-9 * diag;
    if (!(tol > 0.0))
        tol = std::numeric_limits<double>::min();

    VertexWelder welder(tol);
    std::vector<Triangle> tris;
    tris.reserve(soup.size());
    for (const auto& f : soup)
        tris.push_back({welder.insert(f[0]), welder.insert(f[1]), welder.insert(f[2])});
    return SurfaceMesh(welder.take(), std::move(tris));
}

std::uint32_t read_u32_le(const unsigned char* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32_le(const unsigned char* p)
{
    return std::bit_cast<float>(read_u32_le(p));
}

void write_u32_le(std::ostream& out, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

void write_f32_le(std::ostream& out, float f)
{
    write_u32_le(out, std::bit_cast<std::uint32_t>(f));
}

bool looks_like_binary_stl(const std::string& data)
{
    if (data.size() < 84)
        return false;
    const auto count = read_u32_le(reinterpret_cast<const unsigned char*>(data.data()) + 80);
    return data.size() == 84 + 50 * static_cast<std::uint64_t>(count);
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open mesh file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

MeshFormat parse_mesh_format(std::string_view name)
{
    const std::string s = lower(name);
    if (s == "obj")
        return MeshFormat::obj;
    if (s == "stl-ascii" || s == "stl")
        return MeshFormat::stl_ascii;
    if (s == "stl-binary")
        return MeshFormat::stl_binary;
    throw InvalidArgument("unknown mesh format '" + std::string(name) + "'");
}

MeshFormat detect_mesh_format(const std::filesystem::path& path)
{
    const std::string ext = lower(path.extension().string());
    if (ext == ".obj")
        return MeshFormat::obj;
    if (ext == ".stl")
        return looks_like_binary_stl(slurp(path)) ? MeshFormat::stl_binary : MeshFormat::stl_ascii;
    throw InvalidArgument("cannot infer mesh format from extension of " + path.string());
}

SurfaceMesh read_obj(std::istream& in)
{
    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw MeshParseError("malformed vertex record at line " + std::to_string(line_no), line_no);
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<std::size_t> poly;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                long long idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stoll(head, &used);
                    if (used != head.size())
                        throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    throw MeshParseError("bad face index '" + tok + "' at line " + std::to_string(line_no),
                                         line_no);
                }
                const long long nv = static_cast<long long>(verts.size());
                const long long zero_based = idx > 0 ? idx - 1 : nv + idx;
                if (idx == 0 || zero_based < 0 || zero_based >= nv)
                    throw MeshParseError("face index " + std::to_string(idx) + " out of range at line " +
                                             std::to_string(line_no),
                                         line_no);
                poly.push_back(static_cast<std::size_t>(zero_based));
            }
            if (poly.size() < 3)
                throw MeshParseError("face with fewer than 3 vertices at line " + std::to_string(line_no),
                                     line_no);
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                tris.push_back({poly[0], poly[k], poly[k + 1]});
        }
        // Other records (vn, vt, o, g, s, usemtl, ...) carry nothing we need.
    }
    if (in.bad())
        throw IoError("read error while parsing OBJ");
    if (tris.empty())
        throw MeshParseError("OBJ contains no faces", line_no);
    return SurfaceMesh(std::move(verts), std::move(tris));
}

SurfaceMesh read_stl_ascii(std::istream& in)
{
    std::vector<std::array<Vec3, 3>> soup;
    std::array<Vec3, 3> facet;
    int in_facet = -1;  // vertices seen in the current facet, -1 outside one
    std::string line;
    std::size_t line_no = 0;
    bool saw_solid = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        tag = lower(tag);
        if (tag == "solid") {
            saw_solid = true;
        } else if (tag == "facet") {
            if (in_facet >= 0)
                throw MeshParseError("nested facet at line " + std::to_string(line_no), line_no);
            in_facet = 0;
        } else if (tag == "vertex") {
            if (in_facet < 0 || in_facet >= 3)
                throw MeshParseError("unexpected vertex at line " + std::to_string(line_no), line_no);
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw MeshParseError("malformed vertex at line " + std::to_string(line_no), line_no);
            facet[in_facet++] = Vec3(x, y, z);
        } else if (tag == "endfacet") {
            if (in_facet != 3)
                throw MeshParseError("facet without exactly 3 vertices ending at line " +
                                         std::to_string(line_no),
                                     line_no);
            soup.push_back(facet);
            in_facet = -1;
        } else if (tag == "outer" || tag == "endloop" || tag == "endsolid") {
            continue;
        } else {
            throw MeshParseError("unknown STL keyword '" + tag + "' at line " + std::to_string(line_no),
                                 line_no);
        }
    }
    if (!saw_solid)
        throw MeshParseError("ASCII STL must start with 'solid'", 1);
    if (in_facet >= 0)
        throw MeshParseError("unterminated facet", line_no);
    return weld_triangle_soup(soup);
}

SurfaceMesh read_stl_binary(std::istream& in)
{
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    if (data.size() < 84)
        throw MeshParseError("binary STL shorter than its 84-byte header", 0);
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint32_t count = read_u32_le(bytes + 80);
    if (data.size() < 84 + 50 * static_cast<std::uint64_t>(count))
        throw MeshParseError("binary STL truncated: header announces " + std::to_string(count) + " facets", 0);

    std::vector<std::array<Vec3, 3>> soup(count);
    for (std::uint32_t f = 0; f < count; ++f) {
        const unsigned char* rec = bytes + 84 + 50 * static_cast<std::size_t>(f) + 12;  // skip normal
        for (int k = 0; k < 3; ++k) {
            soup[f][k] = Vec3(read_f32_le(rec + 12 * k), read_f32_le(rec + 12 * k + 4),
                              read_f32_le(rec + 12 * k + 8));
        }
    }
    return weld_triangle_soup(soup);
}

SurfaceMesh load_mesh(const std::filesystem::path& path, MeshFormat format)
{
    std::ifstream in(path, format == MeshFormat::obj ? std::ios::in : std::ios::in | std::ios::binary);
    if (!in)
        throw IoError("cannot open mesh file " + path.string());
    switch (format) {
    case MeshFormat::obj: return read_obj(in);
    case MeshFormat::stl_ascii: return read_stl_ascii(in);
    case MeshFormat::stl_binary: return read_stl_binary(in);
    }
    throw InvalidArgument("unsupported mesh format");
}

SurfaceMesh load_mesh(const std::filesystem::path& path)
{
    return load_mesh(path, detect_mesh_format(path));
}

void write_obj(std::ostream& out, const SurfaceMesh& mesh)
{
    out << "# " << mesh.num_vertices() << " vertices, " << mesh.num_triangles() << " triangles\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& v : mesh.vertices())
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles())
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_stl_ascii(std::ostream& out, const SurfaceMesh& mesh)
{
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "solid capbem\n";
    const auto& vs = mesh.vertices();
    for (const auto& t : mesh.triangles()) {
        const Vec3 n = (vs[t[1]] - vs[t[0]]).cross(vs[t[2]] - vs[t[0]]).normalized();
        out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
        for (std::size_t idx : t)
            out << "      vertex " << vs[idx].x() << ' ' << vs[idx].y() << ' ' << vs[idx].z() << '\n';
        out << "    endloop\n  endfacet\n";
    }
    out << "endsolid capbem\n";
}

void write_stl_binary(std::ostream& out, const SurfaceMesh& mesh)
{
    std::array<char, 80> header{};
    const char tag[] = "capbem binary STL";
    std::memcpy(header.data(), tag, sizeof(tag) - 1);
    out.write(header.data(), header.size());
    write_u32_le(out, static_cast<std::uint32_t>(mesh.num_triangles()));
    const auto& vs = mesh.vertices();
    for (const auto& t : mesh.triangles()) {
        const Vec3 n = (vs[t[1]] - vs[t[0]]).cross(vs[t[2]] - vs[t[0]]).normalized();
        for (int k = 0; k < 3; ++k)
            write_f32_le(out, static_cast<float>(n[k]));
        for (std::size_t idx : t)
            for (int k = 0; k < 3; ++k)
                write_f32_le(out, static_cast<float>(vs[idx][k]));
        const char attr[2] = {0, 0};
        out.write(attr, 2);
    }
}

void save_mesh(const std::filesystem::path& path, const SurfaceMesh& mesh, MeshFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    switch (format) {
    case MeshFormat::obj: write_obj(out, mesh); break;
    case MeshFormat::stl_binary: write_stl_binary(out, mesh); break;
    case MeshFormat::stl_ascii: write_stl_ascii(out, mesh); break;
    }
    out.flush();
    if (!out)
        throw IoError("write to " + path.string() + " failed");
}

SurfaceMesh float32_rounded(const SurfaceMesh& mesh)
{
    std::vector<Vec3> verts = mesh.vertices();
    // Through a volatile: GCC 11 at -O3 folds the vectorized double -> float
    // -> double round trip away for some elements.
    for (auto& v : verts)
        for (int k = 0; k < 3; ++k) {
            const volatile float f = static_cast<float>(v[k]);
            v[k] = f;
        }
    return SurfaceMesh(std::move(verts), mesh.triangles());
}

} // namespace capbem
