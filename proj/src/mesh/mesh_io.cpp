#include "crimesim/error.hpp"
#include "crimesim/mesh.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace crimesim {

namespace {

/// Yields non-comment, non-blank lines together with their line numbers.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    }
    std::size_t lineno() const { return lineno_; }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

template <typename T>
std::vector<T> parse_fields(const std::string& line, std::size_t count, std::size_t lineno) {
    std::vector<T> out;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p == end) break;
        T value{};
        auto [ptr, ec] = std::from_chars(p, end, value);
        if (ec != std::errc() || (ptr < end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r'))
            throw ParseError("malformed number", lineno);
        out.push_back(value);
        p = ptr;
    }
    if (out.size() != count)
        throw ParseError("expected " + std::to_string(count) + " values, found " + std::to_string(out.size()), lineno);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw ParseError("empty mesh file", reader.lineno());

    std::istringstream header(line);
    std::string magic;
    long node_count = -1, quad_count = -1;
    header >> magic >> node_count >> quad_count;
    if (magic != "mesh2d" || header.fail() || node_count < 0 || quad_count < 0)
        throw ParseError("expected header `mesh2d <node_count> <quad_count>`", reader.lineno());
    std::string trailing;
    if (header >> trailing) throw ParseError("unexpected text after header", reader.lineno());

    std::vector<Point> nodes;
    nodes.reserve(node_count);
    for (long i = 0; i < node_count; ++i) {
        if (!reader.next(line)) throw ParseError("unexpected end of file in node block", reader.lineno());
        auto v = parse_fields<double>(line, 2, reader.lineno());
        nodes.push_back({v[0], v[1]});
    }
    std::vector<Quad> quads;
    quads.reserve(quad_count);
    for (long e = 0; e < quad_count; ++e) {
        if (!reader.next(line)) throw ParseError("unexpected end of file in element block", reader.lineno());
        auto v = parse_fields<long>(line, 4, reader.lineno());
        Quad q{};
        for (int k = 0; k < 4; ++k) {
            if (v[k] < 0 || v[k] >= node_count)
                throw TopologyError("node index " + std::to_string(v[k]) + " out of range", static_cast<std::size_t>(e));
            q[k] = static_cast<int>(v[k]);
        }
        quads.push_back(q);
    }
    if (reader.next(line)) throw ParseError("trailing data after element block", reader.lineno());
    return Mesh(std::move(nodes), std::move(quads));
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file: " + path);
    return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "mesh2d " << mesh.node_count() << ' ' << mesh.quad_count() << '\n';
    for (const Point& p : mesh.nodes()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
    for (const Quad& q : mesh.quads()) out << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh file: " + path);
    write_mesh(mesh, out);
    if (!out) throw IoError("error while writing mesh file: " + path);
}

}  // namespace crimesim
