#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace nesdf::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256File(const std::filesystem::path& path);

/// Record of one stage run. Input and output digests are keyed by file name relative to the
/// output directory (or the absolute path for files outside it).
struct RunManifest {
    std::string stage;
    std::string toolVersion = kToolVersion;
    std::map<std::string, std::string> config;
    std::map<std::string, double> wallSeconds; // per phase, plus "total"
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;
};

std::filesystem::path manifestPath(const std::filesystem::path& dir, const std::string& stage);

/// Written to a temporary file and renamed into place.
void writeManifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest readManifest(const std::filesystem::path& path);

/// Checks `file` against the digest the producing stage recorded in its manifest inside `dir`.
/// Returns the current digest. A missing manifest is accepted (externally supplied input);
/// a mismatch or a manifest that does not list the file throws FormatError.
std::string verifyInput(const std::filesystem::path& dir, const std::string& producerStage,
                        const std::filesystem::path& file);

/// Exclusive lock on an output directory for the lifetime of the object.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

} // namespace nesdf::cli
