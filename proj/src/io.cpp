#include "qdimer/io.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <fstream>

#include <json.hpp>

namespace qdimer {

namespace {

double monotonic_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

CsvFile::CsvFile(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : path_(path) {
    file_ = std::fopen(path.string().c_str(), "wb");
    if (!file_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (size_t i = 0; i < columns.size(); ++i)
        std::fprintf(file_, "%s%s", i ? "," : "", columns[i].c_str());
    std::fputc('\n', file_);
}

CsvFile::~CsvFile() { close(); }

void CsvFile::close() {
    if (file_) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

void CsvFile::begin_row() { row_started_ = false; }

void CsvFile::field(double value) {
    std::fprintf(file_, "%s%.17g", row_started_ ? "," : "", value);
    row_started_ = true;
}

void CsvFile::field(long value) {
    std::fprintf(file_, "%s%ld", row_started_ ? "," : "", value);
    row_started_ = true;
}

void CsvFile::field(const std::string& value) {
    std::fprintf(file_, "%s%s", row_started_ ? "," : "", value.c_str());
    row_started_ = true;
}

void CsvFile::end_row() { std::fputc('\n', file_); }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a(bytes);
}

RunWriter::RunWriter(std::filesystem::path out_dir, std::string command, std::string config_dump)
    : out_dir_(std::move(out_dir)), command_(std::move(command)), config_dump_(std::move(config_dump)) {
    std::filesystem::create_directories(out_dir_);
    start_seconds_ = monotonic_seconds();
}

std::filesystem::path RunWriter::register_file(const std::string& name) {
    auto path = out_dir_ / name;
    files_.push_back(path);
    return path;
}

void RunWriter::warn(const std::string& message) { warnings_.push_back(message); }

void RunWriter::finalize() {
    if (finalized_) throw std::logic_error("RunWriter::finalize called twice");
    finalized_ = true;

    nlohmann::json manifest;
    manifest["command"] = command_;
    manifest["code_version"] = "qdimer 0.1.0";
    manifest["config"] = nlohmann::json::parse(config_dump_);
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof hash_hex, "%016" PRIx64, fnv1a(config_dump_));
    manifest["config_hash"] = hash_hex;
    manifest["wall_seconds"] = monotonic_seconds() - start_seconds_;
    manifest["timestamp"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    manifest["warnings"] = warnings_;

    auto outputs = nlohmann::json::array();
    for (const auto& path : files_) {
        if (!std::filesystem::exists(path))
            throw std::runtime_error("manifest self-check: registered file missing: " + path.string());
        char checksum_hex[32];
        std::snprintf(checksum_hex, sizeof checksum_hex, "%016" PRIx64, file_checksum(path));
        outputs.push_back({{"file", path.filename().string()}, {"fnv1a", checksum_hex}});
    }
    manifest["outputs"] = outputs;

    // orphan scan: everything in the directory must be accounted for
    for (const auto& entry : std::filesystem::directory_iterator(out_dir_)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        const bool known = std::any_of(files_.begin(), files_.end(), [&](const auto& p) {
            return p.filename().string() == name;
        });
        if (!known)
            throw std::runtime_error("manifest self-check: orphan file in output directory: " + name);
    }

    std::ofstream out(out_dir_ / "manifest.json");
    out << manifest.dump(2) << '\n';
}

void write_density_binary(const std::filesystem::path& path, const Matrix& rho) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::uint64_t dim = static_cast<std::uint64_t>(rho.rows());
    std::fwrite(&dim, sizeof dim, 1, f);
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            const double re = rho(r, c).real(), im = rho(r, c).imag();
            std::fwrite(&re, sizeof re, 1, f);
            std::fwrite(&im, sizeof im, 1, f);
        }
    std::fclose(f);
}

Matrix read_density_binary(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t dim = 0;
    if (std::fread(&dim, sizeof dim, 1, f) != 1 || dim == 0 || dim > (1u << 16)) {
        std::fclose(f);
        throw std::runtime_error("bad density binary header in " + path.string());
    }
    Matrix rho(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::uint64_t r = 0; r < dim; ++r)
        for (std::uint64_t c = 0; c < dim; ++c) {
            double re = 0, im = 0;
            if (std::fread(&re, sizeof re, 1, f) != 1 || std::fread(&im, sizeof im, 1, f) != 1) {
                std::fclose(f);
                throw std::runtime_error("truncated density binary " + path.string());
            }
            rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(re, im);
        }
    std::fclose(f);
    return rho;
}

}  // namespace qdimer
