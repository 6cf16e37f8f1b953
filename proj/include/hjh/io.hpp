// Artifact emission: CSV ('.' decimal, '\n' endings, UTF-8, header row),
// JSON sidecars, and the run manifest. Every artifact funnels through one
// writer so the manifest can list each file with its content hash, and
// identical configs reproduce identical bytes regardless of worker count.
#pragma once

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "hjh/common.hpp"

namespace hjh {

inline constexpr const char* kToolVersion = "0.1.0";

class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path out_dir)
        : dir_(std::move(out_dir)) {
        std::filesystem::create_directories(dir_);
    }

    void put(const std::string& name, const std::string& bytes) {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os) throw Error("cannot write artifact " + name);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        hashes_[name] = hex64(fnv1a64(bytes));
    }

    const std::map<std::string, std::string>& hashes() const { return hashes_; }
    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;
};

class Csv {
  public:
    explicit Csv(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    const std::string& str() const { return body_; }

  private:
    std::string body_;
};

inline std::string num(double v) { return format_double(v); }

// Run manifest: config hash, tool version, artifact hashes, timings and the
// audit summary. Timings are wall clock and excluded from the determinism
// contract; everything else must reproduce bit for bit.
struct RunManifest {
    std::string config_hash;
    nlohmann::json audits = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();
    int cache_hits = 0;
    int cache_misses = 0;
    bool pass = true;

    void write(ArtifactWriter& w) const {
        nlohmann::json j;
        j["config_hash"] = config_hash;
        j["tool_version"] = kToolVersion;
        nlohmann::json arts = nlohmann::json::object();
        for (const auto& [name, hash] : w.hashes()) arts[name] = hash;
        j["artifacts"] = arts;
        j["audits"] = audits;
        j["timings"] = timings;
        j["cache"] = {{"hits", cache_hits}, {"misses", cache_misses}};
        j["pass"] = pass;
        w.put("manifest.json", j.dump(2) + "\n");
    }
};

}  // namespace hjh
