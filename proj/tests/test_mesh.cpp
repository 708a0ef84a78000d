#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "capbem/error.hpp"
#include "capbem/mesh.hpp"
#include "capbem/mesh_io.hpp"
#include "capbem/panels.hpp"
#include "helpers.hpp"

using namespace capbem;

namespace {

// Every undirected edge is used exactly twice.
bool watertight(const SurfaceMesh& m)
{
    std::map<std::pair<std::size_t, std::size_t>, int> uses;
    for (const auto& t : m.triangles())
        for (int k = 0; k < 3; ++k) {
            auto a = t[k], b = t[(k + 1) % 3];
            ++uses[{std::min(a, b), std::max(a, b)}];
        }
    for (const auto& [e, n] : uses)
        if (n != 2)
            return false;
    return true;
}

double area_sum(const SurfaceMesh& m)
{
    return build_panels(m).total_area();
}

// Signed volume; positive when every face normal points outward.
double volume(const SurfaceMesh& m)
{
    double v = 0.0;
    for (const auto& t : m.triangles())
        v += m.vertices()[t[0]].dot(m.vertices()[t[1]].cross(m.vertices()[t[2]])) / 6.0;
    return v;
}

const char* kCubeObj = R"(# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

} // namespace

TEST_CASE("icosphere: combinatorics, area, orientation")
{
    const auto s0 = make_icosphere(1.0, 0);
    CHECK(s0.num_triangles() == 20);
    CHECK(s0.num_vertices() == 12);

    const auto s3 = make_icosphere(1.0, 3);
    CHECK(s3.num_triangles() == 1280);
    CHECK(s3.num_vertices() == 642);
    CHECK(watertight(s3));
    CHECK(s3.consistently_oriented());
    CHECK(volume(s3) > 0.0);
    const double a3 = area_sum(s3);
    CHECK(a3 < 4.0 * std::numbers::pi);
    CHECK(std::abs(a3 - 4.0 * std::numbers::pi) < 0.01 * 4.0 * std::numbers::pi);
    for (const auto& v : s3.vertices())
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-15));

    // Radius 2: areas scale by exactly 4 (power-of-two scaling is exact).
    CHECK(area_sum(make_icosphere(2.0, 2)) == 4.0 * area_sum(make_icosphere(1.0, 2)));

    const double a4 = area_sum(make_icosphere(1.0, 4));
    CHECK(a4 >= 12.50);
    CHECK(a4 <= 12.5664);
}

TEST_CASE("icosphere: invalid parameters")
{
    CHECK_THROWS_AS(make_icosphere(0.0, 2), InvalidArgument);
    CHECK_THROWS_AS(make_icosphere(-1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(make_icosphere(1.0, -1), InvalidArgument);
    CHECK_THROWS_AS(make_icosphere(1.0, 8), InvalidArgument);
    CHECK_THROWS_AS(make_icosphere(NAN, 1), InvalidArgument);
}

TEST_CASE("generators are deterministic")
{
    const auto a = make_icosphere(1.3, 3);
    const auto b = make_icosphere(1.3, 3);
    REQUIRE(a.num_vertices() == b.num_vertices());
    for (std::size_t i = 0; i < a.num_vertices(); ++i)
        CHECK((a.vertices()[i].array() == b.vertices()[i].array()).all());
    CHECK(a.triangles() == b.triangles());
    CHECK(make_cube(1.0, 5).triangles() == make_cube(1.0, 5).triangles());
}

TEST_CASE("cube: combinatorics, area, orientation")
{
    const auto c1 = make_cube(1.0, 1);
    CHECK(c1.num_triangles() == 12);
    CHECK(c1.num_vertices() == 8);
    CHECK(area_sum(c1) == doctest::Approx(6.0).epsilon(1e-14));

    const auto c4 = make_cube(1.0, 4);
    CHECK(c4.num_triangles() == 192);
    CHECK(c4.num_vertices() == 6 * 16 + 2);
    CHECK(area_sum(c4) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(watertight(c4));
    CHECK(c4.consistently_oriented());
    CHECK(volume(c4) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(area_sum(make_cube(3.0, 2)) == doctest::Approx(54.0).epsilon(1e-14));
    CHECK(make_cube(1.0, 8).num_triangles() == 768);

    const auto box = make_cube(2.0, 3).bounds();
    CHECK(box.min.isApprox(Vec3(-1, -1, -1)));
    CHECK(box.max.isApprox(Vec3(1, 1, 1)));

    CHECK_THROWS_AS(make_cube(1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(make_cube(-2.0, 2), InvalidArgument);
}

TEST_CASE("ellipsoid")
{
    const auto e = make_ellipsoid(1, 1, 1, 2);
    const auto s = make_icosphere(1, 2);
    REQUIRE(e.num_vertices() == s.num_vertices());
    for (std::size_t i = 0; i < e.num_vertices(); ++i)
        CHECK((e.vertices()[i].array() == s.vertices()[i].array()).all());
    CHECK(e.triangles() == s.triangles());

    const auto e211 = make_ellipsoid(2, 1, 1, 3);
    CHECK(e211.num_triangles() == 1280);
    CHECK(watertight(e211));
    CHECK(e211.consistently_oriented());
    CHECK(e211.bounds().max.x() == doctest::Approx(2.0));

    const auto flat = make_ellipsoid(1, 1, 0.5, 2);
    const auto panels = build_panels(flat);
    CHECK(panels.areas().minCoeff() > 0.0);

    CHECK_THROWS_AS(make_ellipsoid(1, 0, 1, 2), InvalidArgument);
}

TEST_CASE("mesh validation errors")
{
    const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    SUBCASE("open fan lists its boundary edges")
    {
        try {
            SurfaceMesh m(v, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}});
            FAIL("expected MeshWatertightError");
        } catch (const MeshWatertightError& e) {
            const std::vector<Edge> expected = {{1, 2}, {1, 3}, {2, 3}};
            CHECK(e.edges() == expected);
        }
    }
    SUBCASE("index out of range")
    {
        CHECK_THROWS_AS(SurfaceMesh(v, {{0, 1, 7}}), MeshIndexError);
    }
    SUBCASE("degenerate triangle")
    {
        const std::vector<Vec3> w = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}};
        CHECK_THROWS_AS(SurfaceMesh(w, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}), MeshDegenerateError);
    }
    SUBCASE("edge used three times")
    {
        const std::vector<Vec3> w = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {1, 1, 1}};
        // Tetrahedron plus a fin on edge (0,1).
        CHECK_THROWS_AS(SurfaceMesh(w, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}, {0, 1, 5}}), MeshWatertightError);
    }
    SUBCASE("empty and non-finite")
    {
        CHECK_THROWS_AS(SurfaceMesh(v, {}), MeshError);
        std::vector<Vec3> bad = v;
        bad[3] = Vec3(0, 0, INFINITY);
        CHECK_THROWS_AS(SurfaceMesh(bad, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}}), MeshError);
    }
    SUBCASE("inconsistent orientation is reported, not rejected")
    {
        const SurfaceMesh m(v, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 2, 3}});
        CHECK_FALSE(m.consistently_oriented());
    }
}

TEST_CASE("panels: right triangle and cube")
{
    const auto ps = PanelSystem::from_triangles({{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}});
    CHECK(ps.size() == 1);
    CHECK(ps.areas()[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ps.centroids().row(0).transpose().isApprox(Vec3(1.0 / 3, 1.0 / 3, 0)));
    CHECK(build_panels(make_cube(1.0, 3)).total_area() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("area scales with s^2")
{
    const auto m = make_ellipsoid(1.0, 0.7, 0.4, 2);
    for (double s : {0.1, 2.5, 10.0})
        CHECK(test::rel(area_sum(scaled(m, s)), s * s * area_sum(m)) <= 1e-12);
}

TEST_CASE("OBJ input")
{
    std::istringstream in(kCubeObj);
    const auto m = read_obj(in);
    CHECK(m.num_vertices() == 8);
    CHECK(m.num_triangles() == 12);
    CHECK(area_sum(m) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(m.consistently_oriented());

    SUBCASE("quads, negative indices, texture references")
    {
        std::istringstream q(R"(v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
vn 0 0 1
f 1/1/1 4/2/1 3/3/1 2/4/1
f -4 -3 -2 -1
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
)");
        const auto qm = read_obj(q);
        CHECK(qm.num_triangles() == 12);
        CHECK(area_sum(qm) == doctest::Approx(6.0).epsilon(1e-15));
    }
    SUBCASE("malformed records report the line")
    {
        std::istringstream bad("v 0 0 0\nv 1 0\n");
        try {
            read_obj(bad);
            FAIL("expected MeshParseError");
        } catch (const MeshParseError& e) {
            CHECK(e.line() == 2);
        }
        std::istringstream range("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n");
        CHECK_THROWS_AS(read_obj(range), MeshParseError);
        std::istringstream empty("# nothing\n");
        CHECK_THROWS_AS(read_obj(empty), MeshParseError);
    }
}

TEST_CASE("STL ASCII input and open fan")
{
    std::ostringstream s;
    const auto cube = make_cube(1.0, 1);
    s << "solid cube\n";
    for (const auto& t : cube.triangles()) {
        s << " facet normal 0 0 0\n  outer loop\n";
        for (auto i : t)
            s << "   vertex " << cube.vertices()[i].x() << ' ' << cube.vertices()[i].y() << ' '
              << cube.vertices()[i].z() << '\n';
        s << "  endloop\n endfacet\n";
    }
    s << "endsolid cube\n";
    std::istringstream in(s.str());
    const auto m = read_stl_ascii(in);
    CHECK(m.num_triangles() == 12);
    CHECK(m.num_vertices() == 8);
    CHECK(area_sum(m) == doctest::Approx(6.0).epsilon(1e-15));

    std::istringstream fan(R"(solid fan
facet normal 0 0 1
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 0 1 0
 endloop
endfacet
facet normal 0 0 1
 outer loop
  vertex 0 0 0
  vertex 0 1 0
  vertex -1 0 0
 endloop
endfacet
endsolid fan
)");
    try {
        read_stl_ascii(fan);
        FAIL("expected MeshWatertightError");
    } catch (const MeshWatertightError& e) {
        // Shared edge (0,0,0)-(0,1,0) is interior; the other four are boundary.
        CHECK(e.edges().size() == 4);
    }
}

TEST_CASE("binary STL round trip")
{
    test::TempDir dir("stl");
    const auto mesh = make_icosphere(1.0, 3);
    const auto path = dir / "s.stl";
    save_mesh(path, mesh, MeshFormat::stl_binary);
    CHECK(std::filesystem::file_size(path) == 84 + 50 * 1280);
    CHECK(detect_mesh_format(path) == MeshFormat::stl_binary);

    const auto back = load_mesh(path);
    CHECK(back.num_triangles() == 1280);
    CHECK(back.num_vertices() == 642);

    // STL stores float32, so compare with the float32-rounded original.
    const auto expected = build_panels(float32_rounded(mesh));
    const auto got = build_panels(back);
    REQUIRE(got.size() == expected.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got.areas()[i] - expected.areas()[i]) / expected.areas()[i]);
    CHECK(worst <= 1e-12);
}

TEST_CASE("OBJ round trip is exact")
{
    test::TempDir dir("obj");
    const auto mesh = make_ellipsoid(2, 1, 0.7, 2);
    const auto path = dir / "e.obj";
    save_mesh(path, mesh, MeshFormat::obj);
    CHECK(detect_mesh_format(path) == MeshFormat::obj);
    const auto back = load_mesh(path);
    REQUIRE(back.num_vertices() == mesh.num_vertices());
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
        CHECK((back.vertices()[i].array() == mesh.vertices()[i].array()).all());
    CHECK(back.triangles() == mesh.triangles());
}

TEST_CASE("ASCII STL round trip is exact")
{
    test::TempDir dir("stla");
    const auto mesh = make_ellipsoid(2, 1, 0.7, 2);
    const auto path = dir / "e.stl";
    save_mesh(path, mesh, MeshFormat::stl_ascii);
    CHECK(detect_mesh_format(path) == MeshFormat::stl_ascii);
    const auto back = load_mesh(path);
    REQUIRE(back.num_vertices() == mesh.num_vertices());
    REQUIRE(back.num_triangles() == mesh.num_triangles());
    // Vertices are renumbered by first use; compare per triangle corner.
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k)
            CHECK((back.vertices()[back.triangles()[t][k]].array() ==
                   mesh.vertices()[mesh.triangles()[t][k]].array())
                      .all());
}

TEST_CASE("ASCII STL detection and format names")
{
    test::TempDir dir("fmt");
    const auto path = dir / "t.stl";
    {
        std::ofstream f(path);
        f << "solid t\nendsolid t\n";
    }
    CHECK(detect_mesh_format(path) == MeshFormat::stl_ascii);
    CHECK(parse_mesh_format("obj") == MeshFormat::obj);
    CHECK(parse_mesh_format("stl-ascii") == MeshFormat::stl_ascii);
    CHECK(parse_mesh_format("stl") == MeshFormat::stl_ascii);
    CHECK(parse_mesh_format("STL-Binary") == MeshFormat::stl_binary);
    CHECK_THROWS_AS(parse_mesh_format("ply"), InvalidArgument);
    CHECK_THROWS_AS(load_mesh(dir / "missing.obj"), IoError);
    CHECK_THROWS_AS(save_mesh(dir / "no-such-dir" / "x.stl", make_cube(1, 1), MeshFormat::stl_ascii), IoError);
}

TEST_CASE("rigid motion preserves areas")
{
    const auto m = make_cube(1.0, 3);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    const auto moved = transformed(m, r, Vec3(5, -2, 0.25));
    CHECK(test::rel(area_sum(moved), 6.0) < 1e-13);
}
