#include "mediaprof/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mediaprof/util.hpp"

namespace mediaprof {

FeatureVector FeatureVector::of(std::string id, std::vector<double> values) {
    FeatureVector v{std::move(id), std::move(values), false};
    v.validate();
    return v;
}

FeatureVector FeatureVector::absent(std::string id, std::size_t dim) {
    return FeatureVector{std::move(id), std::vector<double>(dim, 0.0), true};
}

void FeatureVector::validate() const {
    for (double v : values)
        if (!std::isfinite(v))
            throw ValidationError("feature vector '" + id + "' has a non-finite value");
    if (missing)
        for (double v : values)
            if (v != 0.0)
                throw ValidationError("feature vector '" + id + "' is flagged missing but non-zero");
}

const FeatureVector* FeatureBundle::find(const std::string& id) const {
    auto it = vectors.find(id);
    return it == vectors.end() ? nullptr : &it->second;
}

bool FeatureBundle::all_missing() const {
    for (const auto& [id, v] : vectors)
        if (!v.missing) return false;
    return true;
}

void FeatureRegistry::add(RegistryEntry entry) {
    if (index_.count(entry.id)) throw ValidationError("registry: duplicate id '" + entry.id + "'");
    index_[entry.id] = entries_.size();
    entries_.push_back(std::move(entry));
}

const RegistryEntry& FeatureRegistry::entry(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("registry: unknown feature id '" + id + "'");
    return entries_[it->second];
}

bool FeatureRegistry::contains(const std::string& id) const { return index_.count(id) > 0; }

std::size_t FeatureRegistry::order_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("registry: unknown feature id '" + id + "'");
    return it->second;
}

std::size_t FeatureRegistry::concat_dim(const std::vector<std::string>& ids) const {
    std::size_t total = 0;
    for (const auto& id : ids) total += entry(id).dim;
    return total;
}

FeatureRegistry FeatureRegistry::standard(int article_prob_classes) {
    if (article_prob_classes < 2)
        throw ValidationError("registry: article_prob_classes must be at least 2");
    FeatureRegistry r;
    r.add({"articles.nela", 141, Aspect::WhatWasWritten, "nela"});
    r.add({"articles.enc", 768, Aspect::WhatWasWritten, "article-encoder"});
    r.add({"articles.prob", static_cast<std::size_t>(article_prob_classes),
           Aspect::WhatWasWritten, "article-encoder"});
    r.add({"twitter.profile", 779, Aspect::WhatWasWritten, "sentence-encoder"});
    r.add({"yt.nela", 260, Aspect::WhatWasWritten, "nela"});
    r.add({"yt.lld", 385, Aspect::WhatWasWritten, "acoustic"});
    r.add({"yt.enc.meta", 768, Aspect::WhatWasWritten, "document-encoder"});
    r.add({"yt.enc.cap", 768, Aspect::WhatWasWritten, "document-encoder"});
    r.add({"yt.stats", 5, Aspect::WhoReadIt, "none"});
    r.add({"twitter.followers", 768, Aspect::WhoReadIt, "sentence-encoder"});
    r.add({"fb.audience", 6, Aspect::WhoReadIt, "none"});
    r.add({"wiki.enc", 768, Aspect::WrittenAboutMedium, "document-encoder"});
    r.add({"demo.ling", kBasicLinguisticDim, Aspect::WhatWasWritten, "builtin"});
    return r;
}

std::vector<Episode> segment_episodes(const std::string& video_id,
                                      const std::vector<CaptionCue>& cues,
                                      std::int64_t episode_ms) {
    validate_cues(cues);
    std::vector<Episode> episodes;
    std::size_t i = 0;
    while (i < cues.size()) {
        Episode ep;
        ep.video_id = video_id;
        ep.start_ms = cues[i].start_ms;
        if (cues[i].end_ms - cues[i].start_ms > episode_ms) {
            // A single cue longer than the budget becomes its own episode.
            ep.end_ms = cues[i].end_ms;
            ep.text = cues[i].text;
            ep.over_length = true;
            episodes.push_back(std::move(ep));
            ++i;
            continue;
        }
        std::string text;
        std::size_t j = i;
        while (j < cues.size() && cues[j].end_ms - ep.start_ms <= episode_ms) {
            if (!text.empty() && !cues[j].text.empty()) text.push_back(' ');
            text += cues[j].text;
            ep.end_ms = cues[j].end_ms;
            ++j;
        }
        ep.text = std::move(text);
        episodes.push_back(std::move(ep));
        i = j;
    }
    return episodes;
}

EmbeddingResponse embed_text(const TextEncoder& encoder, EmbeddingRequest request) {
    request.encoder_id = encoder.id();
    request.text = truncate_tokens(request.text, static_cast<std::size_t>(request.max_tokens));
    EmbeddingResponse resp = encoder.encode(request);
    if (resp.embedding.size() != static_cast<std::size_t>(encoder.dim()))
        throw ValidationError("encoder '" + encoder.id() + "' returned dim " +
                              std::to_string(resp.embedding.size()) + ", contract is " +
                              std::to_string(encoder.dim()));
    for (double v : resp.embedding)
        if (!std::isfinite(v))
            throw ValidationError("encoder '" + encoder.id() + "' returned a non-finite value");
    if (resp.posterior) {
        if (resp.posterior->size() != static_cast<std::size_t>(encoder.posterior_classes()))
            throw ValidationError("encoder '" + encoder.id() + "' posterior class mismatch");
        double sum = 0.0;
        for (double v : *resp.posterior) sum += v;
        if (std::abs(sum - 1.0) > 1e-6)
            throw ValidationError("encoder '" + encoder.id() + "' posterior sums to " +
                                  std::to_string(sum));
    } else if (encoder.posterior_classes() > 0) {
        throw ValidationError("encoder '" + encoder.id() + "' did not return posteriors");
    }
    return resp;
}

namespace {

std::vector<double> mean_of(const std::vector<std::vector<double>>& rows) {
    std::vector<double> out(rows.at(0).size(), 0.0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += r[i];
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& v : out) v *= inv;
    return out;
}

} // namespace

Featurizer::Featurizer(const FeatureRegistry& registry, ProviderSet providers, int reference_year)
    : registry_(registry), providers_(std::move(providers)), reference_year_(reference_year) {}

ArticleFeatures Featurizer::featurize_articles(const std::vector<ArticleRecord>& articles) const {
    const std::size_t prob_dim = registry_.entry("articles.prob").dim;
    std::vector<std::vector<double>> nela_rows, enc_rows, prob_rows;
    for (const auto& a : articles) {
        const std::string text = trim(a.title.empty() ? a.body_text : a.title + "\n" + a.body_text);
        if (text.empty()) continue; // degenerate item, skipped from the means
        nela_rows.push_back(providers_.nela->features(text, 141));
        if (nela_rows.back().size() != 141)
            throw ValidationError("nela provider returned dim " +
                                  std::to_string(nela_rows.back().size()) + ", contract is 141");
        auto resp = embed_text(*providers_.article, {"", text});
        enc_rows.push_back(std::move(resp.embedding));
        if (!resp.posterior || resp.posterior->size() != prob_dim)
            throw ValidationError("article encoder posterior does not match registry dim " +
                                  std::to_string(prob_dim));
        prob_rows.push_back(std::move(*resp.posterior));
    }
    if (nela_rows.empty())
        return {FeatureVector::absent("articles.nela", 141),
                FeatureVector::absent("articles.enc", 768),
                FeatureVector::absent("articles.prob", prob_dim)};
    return {FeatureVector::of("articles.nela", mean_of(nela_rows)),
            FeatureVector::of("articles.enc", mean_of(enc_rows)),
            FeatureVector::of("articles.prob", mean_of(prob_rows))};
}

FeatureVector Featurizer::featurize_twitter_profile(const TwitterProfileRecord& profile) const {
    if (!profile.exists) return FeatureVector::absent("twitter.profile", 779);
    auto resp = embed_text(*providers_.sentence, {"", profile.description});
    std::vector<double> v = std::move(resp.embedding);
    v.reserve(779);
    v.push_back(profile.verified ? 1.0 : 0.0);
    const int age = profile.created_year ? std::max(0, reference_year_ - *profile.created_year) : 0;
    v.push_back(static_cast<double>(age));
    v.push_back(profile.has_location ? 1.0 : 0.0);
    v.push_back(std::log1p(static_cast<double>(profile.followers_count)));
    v.push_back(std::log1p(static_cast<double>(profile.friends_count)));
    v.push_back(std::log1p(static_cast<double>(profile.statuses_count)));
    v.push_back(std::log1p(static_cast<double>(profile.favourites_count)));
    v.push_back(std::log1p(static_cast<double>(profile.listed_count)));
    v.push_back(profile.has_url ? 1.0 : 0.0);
    v.push_back(profile.default_profile ? 1.0 : 0.0);
    v.push_back(static_cast<double>(tokenize(profile.description).size()));
    return FeatureVector::of("twitter.profile", std::move(v));
}

FeatureVector Featurizer::featurize_followers(const std::vector<FollowerBioRecord>& bios) const {
    std::vector<std::vector<double>> rows;
    for (const auto& b : bios) {
        if (b.language != "en") continue;
        if (trim(b.bio_text).empty()) continue;
        rows.push_back(embed_text(*providers_.sentence, {"", b.bio_text}).embedding);
    }
    if (rows.empty()) return FeatureVector::absent("twitter.followers", 768);
    return FeatureVector::of("twitter.followers", mean_of(rows));
}

YouTubeFeatures Featurizer::featurize_youtube(const std::vector<YouTubeVideoRecord>& videos) const {
    const int lld_dim = providers_.acoustic->dim();
    if (videos.empty())
        return {FeatureVector::absent("yt.nela", 260), FeatureVector::absent("yt.lld", 385),
                FeatureVector::absent("yt.enc.meta", 768), FeatureVector::absent("yt.enc.cap", 768),
                FeatureVector::absent("yt.stats", 5)};

    std::vector<std::vector<double>> nela_rows, lld_rows, meta_rows, cap_rows;
    double views = 0, likes = 0, dislikes = 0, comments = 0;
    for (const auto& video : videos) {
        const std::string meta_text = trim(video.title + "\n" + video.description);
        nela_rows.push_back(providers_.nela->features(meta_text, 260));
        if (nela_rows.back().size() != 260)
            throw ValidationError("nela provider returned dim " +
                                  std::to_string(nela_rows.back().size()) + ", contract is 260");

        std::string tag_text = meta_text;
        for (const auto& t : video.tags) {
            tag_text.push_back('\n');
            tag_text += t;
        }
        meta_rows.push_back(embed_text(*providers_.document, {"", tag_text}).embedding);

        const auto episodes = segment_episodes(video.video_id, video.captions);
        std::string caption_text;
        std::vector<std::vector<double>> episode_llds;
        for (const auto& ep : episodes) {
            if (!caption_text.empty() && !ep.text.empty()) caption_text.push_back(' ');
            caption_text += ep.text;
            auto lld = providers_.acoustic->lld(ep.video_id, ep.start_ms, ep.end_ms);
            if (lld.size() != static_cast<std::size_t>(lld_dim))
                throw ValidationError("acoustic provider dim mismatch");
            episode_llds.push_back(std::move(lld));
        }
        cap_rows.push_back(embed_text(*providers_.document, {"", caption_text}).embedding);
        // episode level first, then video level
        if (!episode_llds.empty()) lld_rows.push_back(mean_of(episode_llds));

        views += static_cast<double>(video.views);
        likes += static_cast<double>(video.likes);
        dislikes += static_cast<double>(video.dislikes);
        comments += static_cast<double>(video.comments);
    }
    const double inv = 1.0 / static_cast<double>(videos.size());
    // slots: mean views/likes/dislikes/comments + video count
    std::vector<double> stats{views * inv, likes * inv, dislikes * inv, comments * inv,
                              static_cast<double>(videos.size())};
    return {FeatureVector::of("yt.nela", mean_of(nela_rows)),
            lld_rows.empty() ? FeatureVector::absent("yt.lld", 385)
                             : FeatureVector::of("yt.lld", mean_of(lld_rows)),
            FeatureVector::of("yt.enc.meta", mean_of(meta_rows)),
            FeatureVector::of("yt.enc.cap", mean_of(cap_rows)),
            FeatureVector::of("yt.stats", std::move(stats))};
}

FeatureVector Featurizer::featurize_facebook(const FacebookAudienceRecord& record) const {
    if (!record.exists) return FeatureVector::absent("fb.audience", 6);
    record.validate();
    std::vector<double> v(6, 0.0);
    if (record.total_audience > 0) {
        const double total = static_cast<double>(record.total_audience);
        v[0] = static_cast<double>(record.very_conservative) / total;
        v[1] = static_cast<double>(record.conservative) / total;
        v[2] = static_cast<double>(record.moderate) / total;
        v[3] = static_cast<double>(record.liberal) / total;
        v[4] = static_cast<double>(record.very_liberal) / total;
        v[5] = std::log1p(total);
    }
    return FeatureVector::of("fb.audience", std::move(v));
}

FeatureVector Featurizer::featurize_wikipedia(const WikipediaPageRecord& page) const {
    if (!page.exists) return FeatureVector::absent("wiki.enc", 768);
    return FeatureVector::of("wiki.enc",
                             embed_text(*providers_.document, {"", page.page_text}).embedding);
}

FeatureVector Featurizer::featurize_articles_basic(
    const std::vector<ArticleRecord>& articles) const {
    std::vector<std::vector<double>> rows;
    for (const auto& a : articles) {
        const std::string text = trim(a.title + "\n" + a.body_text);
        if (text.empty()) continue;
        rows.push_back(basic_linguistic_features(text));
    }
    if (rows.empty()) return FeatureVector::absent("demo.ling", kBasicLinguisticDim);
    return FeatureVector::of("demo.ling", mean_of(rows));
}

FeatureBundle assemble_bundle(const FeatureRegistry& registry, const std::string& medium_id,
                              std::vector<FeatureVector> parts) {
    FeatureBundle bundle;
    bundle.medium_id = medium_id;
    for (auto& part : parts) {
        part.validate();
        const auto& entry = registry.entry(part.id);
        if (part.dim() != entry.dim)
            throw ValidationError("feature '" + part.id + "' has dim " +
                                  std::to_string(part.dim()) + ", registry says " +
                                  std::to_string(entry.dim));
        if (bundle.vectors.count(part.id))
            throw ValidationError("duplicate feature '" + part.id + "' in bundle");
        bundle.vectors.emplace(part.id, std::move(part));
    }
    return bundle;
}

std::string concat_id(const FeatureRegistry& registry, std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        return registry.order_of(a) < registry.order_of(b);
    });
    std::string name;
    for (const auto& id : ids) {
        if (!name.empty()) name.push_back('+');
        name += id;
    }
    return name;
}

FeatureVector concat(const FeatureRegistry& registry, const FeatureBundle& bundle,
                     std::vector<std::string> ids) {
    if (ids.empty()) throw ValidationError("concat: no feature ids");
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw ValidationError("concat: duplicate feature ids");
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        return registry.order_of(a) < registry.order_of(b);
    });
    std::vector<double> values;
    values.reserve(registry.concat_dim(ids));
    bool all_missing = true;
    for (const auto& id : ids) {
        const auto& entry = registry.entry(id);
        const FeatureVector* part = bundle.find(id);
        if (!part)
            throw NotFoundError("concat: bundle for '" + bundle.medium_id +
                                "' lacks feature '" + id + "'");
        if (part->dim() != entry.dim)
            throw ValidationError("concat: feature '" + id + "' dim mismatch");
        if (!part->missing) all_missing = false;
        values.insert(values.end(), part->values.begin(), part->values.end());
    }
    FeatureVector out{concat_id(registry, ids), std::move(values), all_missing};
    out.validate();
    return out;
}

std::vector<double> basic_linguistic_features(const std::string& text) {
    static const std::set<std::string> positive = {
        "good", "great", "excellent", "positive", "success", "win",  "best",
        "hope", "support", "benefit",  "improve",  "strong",  "love", "right"};
    static const std::set<std::string> negative = {
        "bad",  "terrible", "negative", "failure", "lose",  "worst", "fear",
        "against", "harm",  "weak",     "wrong",   "crisis", "hate",  "attack"};

    const auto tokens = tokenize(lower(text));
    long sentences = 0;
    for (char c : text)
        if (c == '.' || c == '!' || c == '?') ++sentences;
    long exclamations = std::count(text.begin(), text.end(), '!');
    long questions = std::count(text.begin(), text.end(), '?');
    std::set<std::string> types(tokens.begin(), tokens.end());
    double total_len = 0.0;
    long pos_hits = 0, neg_hits = 0;
    for (const auto& t : tokens) {
        total_len += static_cast<double>(t.size());
        if (positive.count(t)) ++pos_hits;
        if (negative.count(t)) ++neg_hits;
    }
    const double n = static_cast<double>(tokens.size());
    return {std::log1p(n),
            std::log1p(static_cast<double>(sentences)),
            n > 0 ? static_cast<double>(types.size()) / n : 0.0,
            n > 0 ? total_len / n : 0.0,
            std::log1p(static_cast<double>(exclamations)),
            std::log1p(static_cast<double>(questions)),
            n > 0 ? static_cast<double>(pos_hits) / n : 0.0,
            n > 0 ? static_cast<double>(neg_hits) / n : 0.0};
}

} // namespace mediaprof
