#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mediaprof/features.hpp"

namespace mediaprof {

enum class FeatureFileFormat { JsonLines, PackedBinary };

// Per-medium feature persistence under <root>/<medium_id>.{jsonl,fbin}.
// JSON-lines: one vector per line. Packed binary: a JSON header naming ids,
// dims and missing flags, followed by little-endian 32-bit floats.
class FeatureStore {
public:
    explicit FeatureStore(std::filesystem::path root,
                          FeatureFileFormat format = FeatureFileFormat::JsonLines);

    void save(const FeatureBundle& bundle) const;
    std::optional<FeatureBundle> load(const std::string& medium_id) const;
    bool has(const std::string& medium_id) const;
    std::vector<std::string> media() const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_for(const std::string& medium_id) const;
    std::filesystem::path root_;
    FeatureFileFormat format_;
};

} // namespace mediaprof
