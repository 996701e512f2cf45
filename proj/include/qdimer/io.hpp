#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "qdimer/lindblad.hpp"
#include "qdimer/types.hpp"

namespace qdimer {

/// CSV writer with fixed formatting ("%.17g" for doubles) so repeated runs
/// produce byte-identical payloads.
class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::vector<std::string>& columns);
    ~CsvFile();
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;

    void begin_row();
    void field(double value);
    void field(long value);
    void field(int value) { field(static_cast<long>(value)); }
    void field(const std::string& value);
    void end_row();

    template <typename... Ts>
    void row(Ts... values) {
        begin_row();
        (field(values), ...);
        end_row();
    }

    const std::filesystem::path& path() const { return path_; }
    void close();

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    bool row_started_ = false;
};

/// FNV-1a checksum of a file's bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);
std::uint64_t fnv1a(const std::string& bytes);

/// Collects the outputs of one CLI run and emits manifest.json exactly once.
/// Files that appear in the output directory without being registered fail
/// the final self-check.
class RunWriter {
public:
    RunWriter(std::filesystem::path out_dir, std::string command, std::string config_dump);

    const std::filesystem::path& dir() const { return out_dir_; }
    std::filesystem::path register_file(const std::string& name);
    void warn(const std::string& message);

    /// Writes manifest.json, verifying checksums and scanning for orphans.
    void finalize();

private:
    std::filesystem::path out_dir_;
    std::string command_;
    std::string config_dump_;
    std::vector<std::filesystem::path> files_;
    std::vector<std::string> warnings_;
    double start_seconds_ = 0.0;
    bool finalized_ = false;
};

/// Density-matrix binary dump: u64 dimension header, then row-major
/// little-endian f64 pairs (re, im).
void write_density_binary(const std::filesystem::path& path, const Matrix& rho);
Matrix read_density_binary(const std::filesystem::path& path);

}  // namespace qdimer
