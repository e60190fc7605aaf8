#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mediaprof/errors.hpp"
#include "mediaprof/ingest.hpp"
#include "mediaprof/providers.hpp"
#include "mediaprof/vtt.hpp"

namespace mediaprof {

// A named medium-level feature vector. A missing source is represented by an
// all-zero vector with the flag set; the two are kept in lockstep.
struct FeatureVector {
    std::string id;
    std::vector<double> values;
    bool missing = false;

    std::size_t dim() const { return values.size(); }
    static FeatureVector of(std::string id, std::vector<double> values);
    static FeatureVector absent(std::string id, std::size_t dim);
    void validate() const;

    bool operator==(const FeatureVector&) const = default;
};

struct FeatureBundle {
    std::string medium_id;
    std::map<std::string, FeatureVector> vectors;

    const FeatureVector* find(const std::string& id) const;
    bool all_missing() const;
};

enum class Aspect { WhatWasWritten, WhoReadIt, WrittenAboutMedium };

struct RegistryEntry {
    std::string id;
    std::size_t dim = 0;
    Aspect aspect = Aspect::WhatWasWritten;
    std::string provider; // informational: which provider kind feeds it
};

// Fixed dimension contracts for every feature set; concatenation order is
// registry order.
class FeatureRegistry {
public:
    static FeatureRegistry standard(int article_prob_classes = 3);

    void add(RegistryEntry entry);
    const RegistryEntry& entry(const std::string& id) const;
    bool contains(const std::string& id) const;
    const std::vector<RegistryEntry>& entries() const { return entries_; }
    std::size_t order_of(const std::string& id) const;

    // Sum of dims, in registry order; unknown ids throw.
    std::size_t concat_dim(const std::vector<std::string>& ids) const;

private:
    std::vector<RegistryEntry> entries_;
    std::map<std::string, std::size_t> index_;
};

// A span of consecutive subtitle cues, at most 15 s unless a single cue alone
// exceeds the budget (then flagged).
struct Episode {
    std::string video_id;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string text;
    bool over_length = false;

    bool operator==(const Episode&) const = default;
};

constexpr std::int64_t kEpisodeMs = 15000;

// Greedy left-to-right packing: an episode closes at the last cue whose end
// keeps the episode span within `episode_ms` of its first cue's start.
std::vector<Episode> segment_episodes(const std::string& video_id,
                                      const std::vector<CaptionCue>& cues,
                                      std::int64_t episode_ms = kEpisodeMs);

// Client-side truncation to the first `max_tokens` whitespace tokens, then
// the provider call; validates the response against the encoder's contract.
EmbeddingResponse embed_text(const TextEncoder& encoder, EmbeddingRequest request);

struct ArticleFeatures {
    FeatureVector nela; // articles.nela
    FeatureVector enc;  // articles.enc
    FeatureVector prob; // articles.prob
};

struct YouTubeFeatures {
    FeatureVector nela;     // yt.nela
    FeatureVector lld;      // yt.lld
    FeatureVector enc_meta; // yt.enc.meta
    FeatureVector enc_cap;  // yt.enc.cap
    FeatureVector stats;    // yt.stats
};

class Featurizer {
public:
    Featurizer(const FeatureRegistry& registry, ProviderSet providers, int reference_year = 2020);

    ArticleFeatures featurize_articles(const std::vector<ArticleRecord>& articles) const;
    FeatureVector featurize_twitter_profile(const TwitterProfileRecord& profile) const;
    FeatureVector featurize_followers(const std::vector<FollowerBioRecord>& bios) const;
    YouTubeFeatures featurize_youtube(const std::vector<YouTubeVideoRecord>& videos) const;
    FeatureVector featurize_facebook(const FacebookAudienceRecord& record) const;
    FeatureVector featurize_wikipedia(const WikipediaPageRecord& page) const;
    // Bundled fallback extractor (token/sentence statistics, lexicon
    // sentiment), registered separately; not a substitute for the external
    // linguistic toolkit.
    FeatureVector featurize_articles_basic(const std::vector<ArticleRecord>& articles) const;

    const FeatureRegistry& registry() const { return registry_; }

private:
    const FeatureRegistry& registry_;
    ProviderSet providers_;
    int reference_year_;
};

// Bundle assembly: every part must match its registry dim.
FeatureBundle assemble_bundle(const FeatureRegistry& registry, const std::string& medium_id,
                              std::vector<FeatureVector> parts);

// Concatenation in registry order; dim is the sum of part dims. Missing iff
// every part is missing.
FeatureVector concat(const FeatureRegistry& registry, const FeatureBundle& bundle,
                     std::vector<std::string> ids);

std::string concat_id(const FeatureRegistry& registry, std::vector<std::string> ids);

std::vector<double> basic_linguistic_features(const std::string& text);
constexpr std::size_t kBasicLinguisticDim = 8;

} // namespace mediaprof
