#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mediaprof/errors.hpp"

namespace mediaprof {

// Stable codes; confusion matrices and reports are ordered by these.
enum class BiasLabel : int { Left = 0, Center = 1, Right = 2 };
enum class FactualityLabel : int { Low = 0, Mixed = 1, High = 2 };

// The raw annotation scale, present only before normalization.
enum class RawBiasLabel : int {
    ExtremeLeft = 0,
    Left = 1,
    CenterLeft = 2,
    Center = 3,
    CenterRight = 4,
    Right = 5,
    ExtremeRight = 6,
};

enum class Task { Bias, Factuality };

constexpr int kNumClasses = 3;

// Extreme labels fold into their side; the transitional center-left and
// center-right labels drop the record from the bias task entirely.
std::optional<BiasLabel> normalize_bias(RawBiasLabel raw);

std::string to_string(BiasLabel v);
std::string to_string(FactualityLabel v);
std::string to_string(RawBiasLabel v);
std::string to_string(Task t);
RawBiasLabel parse_raw_bias(const std::string& s);
FactualityLabel parse_factuality(const std::string& s);
Task parse_task(const std::string& s);
std::string class_name(Task t, int code);

struct SourceHandles {
    std::optional<std::string> twitter_handle;
    std::optional<std::string> youtube_channel_id;
    std::optional<std::string> facebook_interest_id;
    std::optional<std::string> wikipedia_title;

    bool operator==(const SourceHandles&) const = default;
};

struct MediumRecord {
    std::string medium_id;
    std::string domain_url;
    std::optional<RawBiasLabel> raw_bias;
    std::optional<BiasLabel> bias; // derived from raw_bias, never stored
    std::optional<FactualityLabel> factuality;
    SourceHandles handles;
    nlohmann::json extra = nlohmann::json::object(); // unknown snapshot keys, preserved verbatim

    std::optional<int> label_code(Task t) const;

    bool operator==(const MediumRecord&) const = default;
};

struct Provenance {
    std::string snapshot_id;
    std::string timestamp;

    bool operator==(const Provenance&) const = default;
};

class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<MediumRecord> media, Provenance provenance);

    const std::vector<MediumRecord>& media() const { return media_; }
    const Provenance& provenance() const { return provenance_; }
    std::size_t size() const { return media_.size(); }
    const MediumRecord* find(const std::string& medium_id) const;

    bool operator==(const Dataset& other) const {
        return media_ == other.media_ && provenance_ == other.provenance_;
    }

private:
    std::vector<MediumRecord> media_;
    Provenance provenance_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Snapshot I/O. One JSON object per line; a leading line without `medium_id`
// is the provenance header. When no header is present the snapshot id is the
// content hash of the file.
Dataset load_dataset(const std::filesystem::path& path);
Dataset dataset_from_jsonl(const std::string& text, const std::string& fallback_snapshot_id);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
std::string dataset_to_jsonl(const Dataset& ds);

nlohmann::json medium_to_json(const MediumRecord& m);
MediumRecord medium_from_json(const nlohmann::json& j, long line = -1);

// Counts over records that carry the task's label, indexed by class code.
std::array<long, kNumClasses> label_counts(const Dataset& ds, Task task);

} // namespace mediaprof
