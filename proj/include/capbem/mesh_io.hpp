#pragma once

#include <filesystem>
#include <string_view>

#include "capbem/mesh.hpp"

namespace capbem {

enum class MeshFormat { obj, stl_ascii, stl_binary };

// Parses "obj", "stl-ascii", "stl-binary" and "stl" (same as "stl-ascii");
// throws InvalidArgument otherwise.
MeshFormat parse_mesh_format(std::string_view name);

// Format from the file extension; for .stl the content decides between
// ASCII and binary.
MeshFormat detect_mesh_format(const std::filesystem::path& path);

// OBJ: "v x y z" and "f a b c ..." records with 1-based (or negative,
// relative) indices; polygons are fan-triangulated, texture/normal
// references after '/' are ignored.
SurfaceMesh read_obj(std::istream& in);

// STL vertices are welded when closer than 1e-9 * bounding-box diagonal.
SurfaceMesh read_stl_ascii(std::istream& in);
SurfaceMesh read_stl_binary(std::istream& in);

SurfaceMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
SurfaceMesh load_mesh(const std::filesystem::path& path);

// OBJ coordinates are written with round-trip precision.
void write_obj(std::ostream& out, const SurfaceMesh& mesh);
// ASCII STL with round-trip precision, so a reload reproduces the vertices.
void write_stl_ascii(std::ostream& out, const SurfaceMesh& mesh);
// 80-byte header, uint32 count, then per triangle 12 little-endian float32
// (normal, three vertices) and a zero uint16 attribute.
void write_stl_binary(std::ostream& out, const SurfaceMesh& mesh);

void save_mesh(const std::filesystem::path& path, const SurfaceMesh& mesh, MeshFormat format);

// Vertices rounded to float32, as a binary STL round trip stores them.
SurfaceMesh float32_rounded(const SurfaceMesh& mesh);

} // namespace capbem
