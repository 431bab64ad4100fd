#pragma once

#include "crimesim/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crimesim::io {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// Legacy ASCII VTK unstructured grid with quads (cell type 9) and one
/// POINT_DATA scalar block per field.
std::string vtk_string(const Mesh& mesh, std::span<const NamedField> fields, std::string_view title);
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, std::span<const NamedField> fields,
               std::string_view title);

struct VtkData {
    std::string title;
    std::vector<Point> nodes;
    std::vector<Quad> quads;
    std::vector<std::pair<std::string, std::vector<double>>> fields;

    Mesh mesh() const;
    /// Values of a named field; throws IoError when absent.
    const std::vector<double>& field(std::string_view name) const;
};

/// Reads files written by write_vtk. Throws ParseError on malformed input.
VtkData read_vtk(const std::filesystem::path& path);
VtkData parse_vtk(std::string_view text);

/// Header plus rows, comma separated, "\n" line endings.
std::string csv_string(std::span<const std::string> header, std::span<const std::vector<std::string>> rows);
void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<std::string>> rows);

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Run record: configuration echo, version, seed, wall-clock span and the
/// checksum of every emitted file.
class RunManifest {
public:
    RunManifest(std::string command, std::map<std::string, std::string> config, std::uint64_t seed);

    /// Records `path` (relative to the output directory) with its current checksum.
    void add_file(const std::filesystem::path& out_dir, const std::filesystem::path& relative);
    void set_status(std::string status, std::string message = {});
    void add_note(const std::string& key, const std::string& value);
    const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

    std::string to_json() const;
    void write(const std::filesystem::path& path);

private:
    std::string command_;
    std::map<std::string, std::string> config_;
    std::uint64_t seed_;
    std::string started_;
    double start_clock_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::map<std::string, std::string> notes_;
    std::string status_ = "ok";
    std::string message_;
};

/// Parses a manifest and checks every listed checksum against the files in
/// `out_dir`. Returns the paths that do not match.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

}  // namespace crimesim::io
