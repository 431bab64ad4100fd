#include "crimesim/io.hpp"

#include "crimesim/error.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace crimesim::io {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string vtk_string(const Mesh& mesh, std::span<const NamedField> fields, std::string_view title) {
    for (const auto& f : fields) {
        if (f.values.size() != mesh.node_count())
            throw ParameterError("field '" + f.name + "' does not match the mesh node count");
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos)
            throw ParameterError("VTK field names must be non-empty and contain no whitespace");
    }
    if (title.find('\n') != std::string_view::npos) throw ParameterError("VTK title must be a single line");
    std::string s;
    s.reserve(64 * mesh.node_count());
    s += "# vtk DataFile Version 3.0\n";
    s += title;
    s += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    s += "POINTS " + std::to_string(mesh.node_count()) + " double\n";
    for (const Point& p : mesh.nodes()) s += format_double(p.x) + ' ' + format_double(p.y) + " 0\n";
    const std::size_t q = mesh.quad_count();
    s += "CELLS " + std::to_string(q) + ' ' + std::to_string(5 * q) + '\n';
    for (const Quad& c : mesh.quads())
        s += "4 " + std::to_string(c[0]) + ' ' + std::to_string(c[1]) + ' ' + std::to_string(c[2]) + ' ' +
             std::to_string(c[3]) + '\n';
    s += "CELL_TYPES " + std::to_string(q) + '\n';
    for (std::size_t e = 0; e < q; ++e) s += "9\n";
    if (!fields.empty()) {
        s += "POINT_DATA " + std::to_string(mesh.node_count()) + '\n';
        for (const auto& f : fields) {
            s += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) s += format_double(v) + '\n';
        }
    }
    return s;
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, std::span<const NamedField> fields,
               std::string_view title) {
    write_text(path, vtk_string(mesh, fields, title));
}

Mesh VtkData::mesh() const { return Mesh(nodes, quads); }

const std::vector<double>& VtkData::field(std::string_view name) const {
    for (const auto& f : fields)
        if (f.first == name) return f.second;
    throw IoError("VTK file has no field named '" + std::string(name) + "'");
}

namespace {

class Tokens {
public:
    explicit Tokens(std::string_view text) : text_(text) {}

    std::string_view line() {
        if (pos_ >= text_.size()) throw ParseError("unexpected end of file", lineno_ + 1);
        const auto nl = text_.find('\n', pos_);
        const auto end = nl == std::string_view::npos ? text_.size() : nl;
        std::string_view l = text_.substr(pos_, end - pos_);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        pos_ = end + 1;
        ++lineno_;
        return l;
    }
    bool done() {
        while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r' || text_[pos_] == ' ')) {
            if (text_[pos_] == '\n') ++lineno_;
            ++pos_;
        }
        return pos_ >= text_.size();
    }
    std::size_t lineno() const { return lineno_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t lineno_ = 0;
};

std::vector<std::string_view> split(std::string_view l) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < l.size()) {
        while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < l.size() && l[j] != ' ' && l[j] != '\t') ++j;
        if (j > i) out.push_back(l.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
T number(std::string_view tok, std::size_t lineno) {
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("malformed number '" + std::string(tok) + "'", lineno);
    return v;
}

std::vector<std::string_view> expect(Tokens& t, std::string_view keyword, std::size_t count) {
    auto f = split(t.line());
    if (f.empty() || f[0] != keyword || f.size() != count)
        throw ParseError("expected '" + std::string(keyword) + "' with " + std::to_string(count - 1) + " arguments",
                         t.lineno());
    return f;
}

}  // namespace

VtkData parse_vtk(std::string_view text) {
    Tokens t(text);
    VtkData d;
    if (t.line().rfind("# vtk DataFile", 0) != 0) throw ParseError("missing VTK header", 1);
    d.title = std::string(t.line());
    if (t.line() != "ASCII") throw ParseError("only ASCII VTK files are supported", t.lineno());
    if (t.line() != "DATASET UNSTRUCTURED_GRID") throw ParseError("expected an unstructured grid", t.lineno());

    const auto pts = expect(t, "POINTS", 3);
    const auto n = number<std::size_t>(pts[1], t.lineno());
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = split(t.line());
        if (f.size() != 3) throw ParseError("point needs 3 coordinates", t.lineno());
        d.nodes.push_back({number<double>(f[0], t.lineno()), number<double>(f[1], t.lineno())});
    }
    const auto cells = expect(t, "CELLS", 3);
    const auto q = number<std::size_t>(cells[1], t.lineno());
    for (std::size_t e = 0; e < q; ++e) {
        const auto f = split(t.line());
        if (f.size() != 5 || f[0] != "4") throw ParseError("only quadrilateral cells are supported", t.lineno());
        d.quads.push_back({number<int>(f[1], t.lineno()), number<int>(f[2], t.lineno()), number<int>(f[3], t.lineno()),
                           number<int>(f[4], t.lineno())});
    }
    const auto types = expect(t, "CELL_TYPES", 2);
    if (number<std::size_t>(types[1], t.lineno()) != q) throw ParseError("cell type count mismatch", t.lineno());
    for (std::size_t e = 0; e < q; ++e)
        if (t.line() != "9") throw ParseError("cell type must be 9 (quad)", t.lineno());
    if (t.done()) return d;

    const auto pd = expect(t, "POINT_DATA", 2);
    if (number<std::size_t>(pd[1], t.lineno()) != n) throw ParseError("point data count mismatch", t.lineno());
    while (!t.done()) {
        const auto head = split(t.line());
        if (head.size() < 3 || head[0] != "SCALARS") throw ParseError("expected SCALARS", t.lineno());
        if (split(t.line()) != std::vector<std::string_view>{"LOOKUP_TABLE", "default"})
            throw ParseError("expected LOOKUP_TABLE default", t.lineno());
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto f = split(t.line());
            if (f.size() != 1) throw ParseError("expected one value per line", t.lineno());
            v[i] = number<double>(f[0], t.lineno());
        }
        d.fields.emplace_back(std::string(head[1]), std::move(v));
    }
    return d;
}

VtkData read_vtk(const std::filesystem::path& path) { return parse_vtk(read_text(path)); }

std::string csv_string(std::span<const std::string> header, std::span<const std::vector<std::string>> rows) {
    std::string s;
    auto line = [&](std::span<const std::string> cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(header);
    for (const auto& r : rows) {
        if (r.size() != header.size()) throw ParameterError("CSV row width does not match header");
        line(r);
    }
    return s;
}

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<std::string>> rows) {
    write_text(path, csv_string(header, rows));
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) { return fnv1a(read_text(path)); }

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double steady_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RunManifest::RunManifest(std::string command, std::map<std::string, std::string> config, std::uint64_t seed)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed), started_(utc_now()),
      start_clock_(steady_seconds()) {}

void RunManifest::add_file(const std::filesystem::path& out_dir, const std::filesystem::path& relative) {
    files_.emplace_back(relative.generic_string(), hex64(fnv1a_file(out_dir / relative)));
}

void RunManifest::set_status(std::string status, std::string message) {
    status_ = std::move(status);
    message_ = std::move(message);
}

void RunManifest::add_note(const std::string& key, const std::string& value) { notes_[key] = value; }

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["version"] = std::string(kVersion);
    j["seed"] = seed_;
    j["config"] = config_;
    j["started_utc"] = started_;
    j["finished_utc"] = utc_now();
    j["wall_seconds"] = steady_seconds() - start_clock_;
    j["status"] = status_;
    if (!message_.empty()) j["message"] = message_;
    if (!notes_.empty()) j["notes"] = notes_;
    auto files = nlohmann::ordered_json::array();
    for (const auto& [path, sum] : files_) files.push_back({{"path", path}, {"fnv1a64", sum}});
    j["files"] = files;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) { write_text(path, to_json()); }

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(manifest));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest: " + std::string(e.what()));
    }
    std::vector<std::string> bad;
    for (const auto& f : j.at("files")) {
        const std::string path = f.at("path");
        std::string sum;
        try {
            sum = hex64(fnv1a_file(out_dir / path));
        } catch (const IoError&) {
            sum.clear();
        }
        if (sum != f.at("fnv1a64").get<std::string>()) bad.push_back(path);
    }
    return bad;
}

}  // namespace crimesim::io
