#include "mediaprof/feature_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mediaprof/util.hpp"

namespace mediaprof {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "packed feature files assume a little-endian host");

FeatureStore::FeatureStore(fs::path root, FeatureFileFormat format)
    : root_(std::move(root)), format_(format) {
    fs::create_directories(root_);
}

fs::path FeatureStore::path_for(const std::string& medium_id) const {
    return root_ / (medium_id + (format_ == FeatureFileFormat::JsonLines ? ".jsonl" : ".fbin"));
}

void FeatureStore::save(const FeatureBundle& bundle) const {
    const fs::path path = path_for(bundle.medium_id);
    const fs::path tmp = path.string() + ".tmp";
    if (format_ == FeatureFileFormat::JsonLines) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        for (const auto& [id, v] : bundle.vectors) {
            json j{{"id", id}, {"dim", v.dim()}, {"missing", v.missing}, {"values", v.values}};
            out << j.dump() << "\n";
        }
    } else {
        json header{{"medium_id", bundle.medium_id}, {"vectors", json::array()}};
        for (const auto& [id, v] : bundle.vectors)
            header["vectors"].push_back({{"id", id}, {"dim", v.dim()}, {"missing", v.missing}});
        const std::string header_str = header.dump();
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write("MPFB", 4);
        const std::uint32_t version = 1;
        const std::uint32_t header_len = static_cast<std::uint32_t>(header_str.size());
        out.write(reinterpret_cast<const char*>(&version), 4);
        out.write(reinterpret_cast<const char*>(&header_len), 4);
        out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
        for (const auto& [id, v] : bundle.vectors)
            for (double d : v.values) {
                const float f = static_cast<float>(d);
                out.write(reinterpret_cast<const char*>(&f), 4);
            }
    }
    fs::rename(tmp, path);
}

std::optional<FeatureBundle> FeatureStore::load(const std::string& medium_id) const {
    const fs::path path = path_for(medium_id);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    FeatureBundle bundle;
    bundle.medium_id = medium_id;
    if (format_ == FeatureFileFormat::JsonLines) {
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw ParseError("feature file " + path.string() + ": " + e.what(), lineno);
            }
            FeatureVector v;
            v.id = j.at("id").get<std::string>();
            v.missing = j.value("missing", false);
            v.values = j.at("values").get<std::vector<double>>();
            if (j.contains("dim") && j["dim"].get<std::size_t>() != v.values.size())
                throw ParseError("feature '" + v.id + "' dim header mismatch", lineno);
            v.validate();
            bundle.vectors.emplace(v.id, std::move(v));
        }
    } else {
        char magic[4];
        std::uint32_t version = 0, header_len = 0;
        in.read(magic, 4);
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&header_len), 4);
        if (!in || std::memcmp(magic, "MPFB", 4) != 0 || version != 1)
            throw ParseError("bad packed feature file " + path.string());
        std::string header_str(header_len, '\0');
        in.read(header_str.data(), header_len);
        json header;
        try {
            header = json::parse(header_str);
        } catch (const json::exception& e) {
            throw ParseError("packed feature header: " + std::string(e.what()));
        }
        for (const auto& vj : header.at("vectors")) {
            FeatureVector v;
            v.id = vj.at("id").get<std::string>();
            v.missing = vj.value("missing", false);
            const std::size_t dim = vj.at("dim").get<std::size_t>();
            v.values.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                float f = 0.0f;
                in.read(reinterpret_cast<char*>(&f), 4);
                v.values[i] = static_cast<double>(f);
            }
            if (!in) throw ParseError("packed feature file truncated: " + path.string());
            v.validate();
            bundle.vectors.emplace(v.id, std::move(v));
        }
    }
    return bundle;
}

bool FeatureStore::has(const std::string& medium_id) const { return fs::exists(path_for(medium_id)); }

std::vector<std::string> FeatureStore::media() const {
    std::vector<std::string> out;
    const char* ext = format_ == FeatureFileFormat::JsonLines ? ".jsonl" : ".fbin";
    for (const auto& entry : fs::directory_iterator(root_))
        if (entry.is_regular_file() && entry.path().extension() == ext)
            out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mediaprof
