#include "ps2r/mesh.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ps2r {

void Mesh::validate() const {
    if (!triangles.empty() && vertices.size() < 3)
        throw std::invalid_argument("mesh '" + name + "': triangles without enough vertices");
    for (const auto& v : vertices)
        if (!v.finite()) throw std::invalid_argument("mesh '" + name + "': non-finite vertex");
    for (const auto& t : triangles)
        for (std::uint32_t i : t)
            if (i >= vertices.size())
                throw std::invalid_argument("mesh '" + name + "': triangle index out of range");
}

double Mesh::bounding_radius() const {
    double r2 = 0.0;
    for (const auto& v : vertices) r2 = std::max(r2, v.squared_norm());
    return std::sqrt(r2);
}

namespace {

// Whitespace tokens of non-blank, non-comment lines, with 1-based line tracking.
class LineTokens {
public:
    explicit LineTokens(std::istream& in) : in_(in) {}

    // Fetches the next token, reading further lines as needed.
    // Returns false at end of input.
    bool next(std::string& tok) {
        while (pos_ >= toks_.size()) {
            std::string line;
            if (!std::getline(in_, line)) return false;
            ++line_;
            toks_.clear();
            pos_ = 0;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string t;
            while (ls >> t) toks_.push_back(t);
        }
        tok = toks_[pos_++];
        return true;
    }

    int line() const { return line_; }

private:
    std::istream& in_;
    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
    int line_ = 0;
};

double require_double(LineTokens& lt, const char* what) {
    std::string tok;
    if (!lt.next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what, lt.line());
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", lt.line());
    return v;
}

long require_long(LineTokens& lt, const char* what) {
    std::string tok;
    if (!lt.next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what, lt.line());
    long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", lt.line());
    return v;
}

// Fan-triangulates a polygon around its first vertex.
void emit_fan(Mesh& mesh, const std::vector<std::uint32_t>& poly) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
}

} // namespace

Mesh parse_off(std::istream& in, const std::string& name) {
    LineTokens lt(in);
    std::string tok;
    if (!lt.next(tok) || tok != "OFF") throw ParseError("missing OFF header", std::max(lt.line(), 1));

    const long nv = require_long(lt, "vertex count");
    const long nf = require_long(lt, "face count");
    require_long(lt, "edge count");
    if (nv < 0 || nf < 0) throw ParseError("negative count", lt.line());

    Mesh mesh;
    mesh.name = name;
    mesh.vertices.reserve(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        const double x = require_double(lt, "vertex coordinate");
        const double y = require_double(lt, "vertex coordinate");
        const double z = require_double(lt, "vertex coordinate");
        mesh.vertices.emplace_back(x, y, z);
    }

    std::vector<std::uint32_t> poly;
    for (long f = 0; f < nf; ++f) {
        const long n = require_long(lt, "face vertex count");
        if (n < 3) throw ParseError("face with fewer than 3 vertices", lt.line());
        poly.clear();
        for (long k = 0; k < n; ++k) {
            const long idx = require_long(lt, "face index");
            if (idx < 0 || idx >= nv) throw ParseError("face index out of range", lt.line());
            poly.push_back(static_cast<std::uint32_t>(idx));
        }
        emit_fan(mesh, poly);
    }
    mesh.validate();
    return mesh;
}

Mesh parse_obj(std::istream& in, const std::string& name) {
    Mesh mesh;
    mesh.name = name;
    std::string line;
    int line_no = 0;
    std::vector<std::uint32_t> poly;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string rec;
        if (!(ls >> rec)) continue;
        if (rec == "v") {
            Vec3 v;
            std::string tok;
            double* out[3] = {&v.x, &v.y, &v.z};
            for (int i = 0; i < 3; ++i) {
                if (!(ls >> tok)) throw ParseError("vertex with fewer than 3 coordinates", line_no);
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), *out[i]);
                if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                    throw ParseError("non-numeric vertex coordinate '" + tok + "'", line_no);
            }
            mesh.vertices.push_back(v);
        } else if (rec == "f") {
            poly.clear();
            std::string tok;
            while (ls >> tok) {
                // strip "/texture/normal" suffixes
                const auto slash = tok.find('/');
                if (slash != std::string::npos) tok.erase(slash);
                long idx = 0;
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
                if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                    throw ParseError("non-numeric face index '" + tok + "'", line_no);
                if (idx <= 0 || idx > static_cast<long>(mesh.vertices.size()))
                    throw ParseError("face index out of range", line_no);
                poly.push_back(static_cast<std::uint32_t>(idx - 1));
            }
            if (poly.size() < 3) throw ParseError("face with fewer than 3 vertices", line_no);
            emit_fan(mesh, poly);
        }
        // all other record types ignored
    }
    mesh.validate();
    return mesh;
}

namespace {

Mesh parse_file(const std::string& path, Mesh (*parser)(std::istream&, const std::string&)) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    auto stem = path;
    const auto slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem.erase(0, slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem.erase(dot);
    return parser(in, stem);
}

void print_coord(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

Mesh parse_off_file(const std::string& path) { return parse_file(path, &parse_off); }
Mesh parse_obj_file(const std::string& path) { return parse_file(path, &parse_obj); }

void write_off(std::ostream& out, const Mesh& mesh) {
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
    for (const auto& v : mesh.vertices) {
        print_coord(out, v.x);
        out << ' ';
        print_coord(out, v.y);
        out << ' ';
        print_coord(out, v.z);
        out << '\n';
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off_file(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write mesh file: " + path);
    write_off(out, mesh);
}

void write_obj(std::ostream& out, const Mesh& mesh) {
    for (const auto& v : mesh.vertices) {
        out << "v ";
        print_coord(out, v.x);
        out << ' ';
        print_coord(out, v.y);
        out << ' ';
        print_coord(out, v.z);
        out << '\n';
    }
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

} // namespace ps2r
