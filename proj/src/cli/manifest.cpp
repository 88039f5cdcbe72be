#include "nesdf/cli/manifest.hpp"

#include "nesdf/cli/config.hpp"
#include "nesdf/common.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <fcntl.h>
#include <fstream>
#include <memory>
#include <unistd.h>

namespace nesdf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256File(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot read " + path.string() + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest init failed");
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

fs::path manifestPath(const fs::path& dir, const std::string& stage) { return dir / (stage + ".manifest.json"); }

void writeManifest(const fs::path& dir, const RunManifest& m)
{
    json j;
    j["stage"] = m.stage;
    j["tool_version"] = m.toolVersion;
    j["config"] = m.config;
    j["wall_seconds"] = m.wallSeconds;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    const fs::path target = manifestPath(dir, m.stage);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(2) << '\n';
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
}

RunManifest readManifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open manifest " + path.string());
    RunManifest m;
    try {
        const json j = json::parse(in);
        m.stage = j.at("stage").get<std::string>();
        m.toolVersion = j.at("tool_version").get<std::string>();
        m.config = j.at("config").get<std::map<std::string, std::string>>();
        m.wallSeconds = j.at("wall_seconds").get<std::map<std::string, double>>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest " + path.string() + ": " + e.what());
    }
    return m;
}

std::string verifyInput(const fs::path& dir, const std::string& producerStage, const fs::path& file)
{
    if (!fs::exists(file))
        throw ConfigError("missing input " + file.string() + " (run " + producerStage + " first)");
    const std::string digest = sha256File(file);
    const fs::path mpath = manifestPath(dir, producerStage);
    if (!fs::exists(mpath))
        return digest;
    const RunManifest m = readManifest(mpath);
    auto it = m.outputs.find(file.filename().string());
    if (it == m.outputs.end())
        throw FormatError(mpath.string() + " does not list " + file.filename().string());
    if (it->second != digest)
        throw FormatError("digest mismatch for " + file.string() + ": modified since " + producerStage +
                          " wrote it");
    return digest;
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".nesdf.lock")
{
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw ConfigError("output directory " + dir.string() + " is locked by another run (" + path_.string() +
                          ")");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

DirectoryLock::~DirectoryLock()
{
    std::error_code ec;
    fs::remove(path_, ec);
}

} // namespace nesdf::cli
