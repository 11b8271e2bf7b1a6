#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ps2r/vec3.hpp"

namespace ps2r {

/// Indexed triangle set; the unit of simulation input.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::string name;

    /// Throws std::invalid_argument if indices are out of range, a
    /// coordinate is non-finite, or triangles exist without vertices.
    void validate() const;

    /// Max vertex distance from the origin.
    double bounding_radius() const;
};

/// Parse failure with 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// ASCII OFF reader. Faces with more than 3 vertices are fan-triangulated
/// around their first vertex.
Mesh parse_off(std::istream& in, const std::string& name = "");
Mesh parse_off_file(const std::string& path);

/// Wavefront OBJ subset: "v x y z" and "f i j k ..." records (1-based,
/// "/..." suffixes stripped); everything else is ignored.
Mesh parse_obj(std::istream& in, const std::string& name = "");
Mesh parse_obj_file(const std::string& path);

/// Writers round-trip exactly: re-parsing yields identical vertices and
/// triangles.
void write_off(std::ostream& out, const Mesh& mesh);
void write_off_file(const std::string& path, const Mesh& mesh);
void write_obj(std::ostream& out, const Mesh& mesh);

} // namespace ps2r
