#include "mediaprof/domain.hpp"

#include <fstream>
#include <sstream>

#include "mediaprof/util.hpp"

namespace mediaprof {

using nlohmann::json;

std::optional<BiasLabel> normalize_bias(RawBiasLabel raw) {
    switch (raw) {
        case RawBiasLabel::ExtremeLeft:
        case RawBiasLabel::Left: return BiasLabel::Left;
        case RawBiasLabel::Center: return BiasLabel::Center;
        case RawBiasLabel::ExtremeRight:
        case RawBiasLabel::Right: return BiasLabel::Right;
        case RawBiasLabel::CenterLeft:
        case RawBiasLabel::CenterRight: return std::nullopt;
    }
    throw ValidationError("invalid raw bias code");
}

std::string to_string(BiasLabel v) {
    switch (v) {
        case BiasLabel::Left: return "left";
        case BiasLabel::Center: return "center";
        case BiasLabel::Right: return "right";
    }
    return "?";
}

std::string to_string(FactualityLabel v) {
    switch (v) {
        case FactualityLabel::Low: return "low";
        case FactualityLabel::Mixed: return "mixed";
        case FactualityLabel::High: return "high";
    }
    return "?";
}

std::string to_string(RawBiasLabel v) {
    switch (v) {
        case RawBiasLabel::ExtremeLeft: return "extreme-left";
        case RawBiasLabel::Left: return "left";
        case RawBiasLabel::CenterLeft: return "center-left";
        case RawBiasLabel::Center: return "center";
        case RawBiasLabel::CenterRight: return "center-right";
        case RawBiasLabel::Right: return "right";
        case RawBiasLabel::ExtremeRight: return "extreme-right";
    }
    return "?";
}

std::string to_string(Task t) { return t == Task::Bias ? "bias" : "factuality"; }

RawBiasLabel parse_raw_bias(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "extreme-left" || v == "extreme_left") return RawBiasLabel::ExtremeLeft;
    if (v == "left") return RawBiasLabel::Left;
    if (v == "center-left" || v == "left-center" || v == "center_left") return RawBiasLabel::CenterLeft;
    if (v == "center") return RawBiasLabel::Center;
    if (v == "center-right" || v == "right-center" || v == "center_right") return RawBiasLabel::CenterRight;
    if (v == "right") return RawBiasLabel::Right;
    if (v == "extreme-right" || v == "extreme_right") return RawBiasLabel::ExtremeRight;
    throw ParseError("unknown bias label '" + s + "'");
}

FactualityLabel parse_factuality(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "low") return FactualityLabel::Low;
    if (v == "mixed") return FactualityLabel::Mixed;
    if (v == "high") return FactualityLabel::High;
    throw ParseError("unknown factuality label '" + s + "'");
}

Task parse_task(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "bias") return Task::Bias;
    if (v == "factuality" || v == "fact") return Task::Factuality;
    throw ParseError("unknown task '" + s + "' (expected bias|factuality)");
}

std::string class_name(Task t, int code) {
    if (code < 0 || code >= kNumClasses) return std::to_string(code);
    return t == Task::Bias ? to_string(static_cast<BiasLabel>(code))
                           : to_string(static_cast<FactualityLabel>(code));
}

std::optional<int> MediumRecord::label_code(Task t) const {
    if (t == Task::Bias) {
        if (bias) return static_cast<int>(*bias);
        return std::nullopt;
    }
    if (factuality) return static_cast<int>(*factuality);
    return std::nullopt;
}

Dataset::Dataset(std::vector<MediumRecord> media, Provenance provenance)
    : media_(std::move(media)), provenance_(std::move(provenance)) {
    for (std::size_t i = 0; i < media_.size(); ++i) {
        auto [it, inserted] = index_.emplace(media_[i].medium_id, i);
        if (!inserted)
            throw ValidationError("duplicate medium_id '" + media_[i].medium_id + "'");
    }
}

const MediumRecord* Dataset::find(const std::string& medium_id) const {
    auto it = index_.find(medium_id);
    if (it == index_.end()) return nullptr;
    return &media_[it->second];
}

namespace {

const char* kKnownKeys[] = {"medium_id", "domain_url", "raw_bias", "factuality", "handles"};

bool is_known_key(const std::string& k) {
    for (const char* known : kKnownKeys)
        if (k == known) return true;
    return false;
}

std::optional<std::string> opt_string(const json& j, const char* key, long line) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(std::string("handles.") + key + " must be a string", line);
    return it->get<std::string>();
}

} // namespace

json medium_to_json(const MediumRecord& m) {
    json j = json::object();
    j["medium_id"] = m.medium_id;
    j["domain_url"] = m.domain_url;
    if (m.raw_bias) j["raw_bias"] = to_string(*m.raw_bias);
    if (m.factuality) j["factuality"] = to_string(*m.factuality);
    json handles = json::object();
    if (m.handles.twitter_handle) handles["twitter_handle"] = *m.handles.twitter_handle;
    if (m.handles.youtube_channel_id) handles["youtube_channel_id"] = *m.handles.youtube_channel_id;
    if (m.handles.facebook_interest_id) handles["facebook_interest_id"] = *m.handles.facebook_interest_id;
    if (m.handles.wikipedia_title) handles["wikipedia_title"] = *m.handles.wikipedia_title;
    if (!handles.empty()) j["handles"] = handles;
    for (auto it = m.extra.begin(); it != m.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

MediumRecord medium_from_json(const json& j, long line) {
    if (!j.is_object()) throw ParseError("snapshot line is not a JSON object", line);
    MediumRecord m;
    auto id = j.find("medium_id");
    if (id == j.end() || !id->is_string() || id->get<std::string>().empty())
        throw ParseError("missing or empty medium_id", line);
    m.medium_id = id->get<std::string>();
    auto url = j.find("domain_url");
    if (url == j.end() || !url->is_string() || url->get<std::string>().empty())
        throw ParseError("missing or empty domain_url for '" + m.medium_id + "'", line);
    m.domain_url = url->get<std::string>();
    if (auto it = j.find("raw_bias"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError("raw_bias must be a string", line);
        try {
            m.raw_bias = parse_raw_bias(it->get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
        m.bias = normalize_bias(*m.raw_bias);
    }
    if (auto it = j.find("factuality"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError("factuality must be a string", line);
        try {
            m.factuality = parse_factuality(it->get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
    }
    if (auto it = j.find("handles"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ParseError("handles must be an object", line);
        m.handles.twitter_handle = opt_string(*it, "twitter_handle", line);
        m.handles.youtube_channel_id = opt_string(*it, "youtube_channel_id", line);
        m.handles.facebook_interest_id = opt_string(*it, "facebook_interest_id", line);
        m.handles.wikipedia_title = opt_string(*it, "wikipedia_title", line);
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!is_known_key(it.key())) m.extra[it.key()] = it.value();
    return m;
}

Dataset dataset_from_jsonl(const std::string& text, const std::string& fallback_snapshot_id) {
    std::vector<MediumRecord> media;
    Provenance prov{fallback_snapshot_id, ""};
    std::istringstream in(text);
    std::string linebuf;
    long lineno = 0;
    bool first_content_line = true;
    while (std::getline(in, linebuf)) {
        ++lineno;
        const std::string stripped = trim(linebuf);
        if (stripped.empty()) continue;
        json j;
        try {
            j = json::parse(stripped);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (first_content_line && j.is_object() && !j.contains("medium_id")) {
            // provenance header
            prov.snapshot_id = j.value("snapshot_id", fallback_snapshot_id);
            prov.timestamp = j.value("timestamp", "");
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        media.push_back(medium_from_json(j, lineno));
    }
    try {
        return Dataset(std::move(media), std::move(prov));
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()) + " in snapshot");
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open dataset snapshot: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_jsonl(buf.str(), content_key(buf.str()));
}

std::string dataset_to_jsonl(const Dataset& ds) {
    std::ostringstream out;
    json header = json::object();
    header["snapshot_id"] = ds.provenance().snapshot_id;
    header["timestamp"] = ds.provenance().timestamp;
    out << header.dump() << "\n";
    for (const auto& m : ds.media()) out << medium_to_json(m).dump() << "\n";
    return out.str();
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write dataset snapshot: " + path.string());
    out << dataset_to_jsonl(ds);
}

std::array<long, kNumClasses> label_counts(const Dataset& ds, Task task) {
    std::array<long, kNumClasses> counts{0, 0, 0};
    for (const auto& m : ds.media())
        if (auto code = m.label_code(task)) ++counts[static_cast<std::size_t>(*code)];
    return counts;
}

} // namespace mediaprof
