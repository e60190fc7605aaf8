#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mediaprof {

class LanguageDetector {
public:
    virtual ~LanguageDetector() = default;
    // ISO-639-1 code of the best match, "und" when there is no usable signal.
    virtual std::string detect(std::string_view text) const = 0;
};

// Ranked character n-gram profiles (out-of-place distance). Profiles are
// built once from bundled sample text; add_profile extends the set.
class TrigramLanguageDetector : public LanguageDetector {
public:
    // Loads the bundled profiles (en, es, fr, de).
    TrigramLanguageDetector();

    void add_profile(const std::string& code, std::string_view sample_text);
    std::string detect(std::string_view text) const override;

private:
    struct Profile {
        std::string code;
        std::map<std::string, int> rank; // ngram -> rank, 0 is most frequent
    };
    static std::map<std::string, int> ranked_ngrams(std::string_view text, std::size_t max_ngrams);
    std::vector<Profile> profiles_;
};

std::unique_ptr<LanguageDetector> make_language_detector(const std::string& kind);

} // namespace mediaprof
