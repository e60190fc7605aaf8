#include "mediaprof/langid.hpp"

#include <algorithm>
#include <cctype>

#include "mediaprof/errors.hpp"

namespace mediaprof {

namespace {

constexpr std::size_t kProfileSize = 320;
constexpr std::size_t kMaxNgram = 3;

// Bundled sample text, generic prose per language. Enough for ranked-profile
// separation of short self-description texts.
const char* kEnglishSample =
    "The quick brown fox jumps over the lazy dog while the morning news spreads across the "
    "country and people share their thoughts about politics the economy and the weather with "
    "their friends and followers every single day because this is what they like to do when "
    "they read and write about the world around them and the stories that matter most to the "
    "public here and there with news from the city and reports about the government and the "
    "people who live and work in this country writing about what happened today and what will "
    "happen tomorrow in the life of the nation";

const char* kSpanishSample =
    "El rapido zorro marron salta sobre el perro perezoso mientras las noticias de la manana "
    "se difunden por el pais y la gente comparte sus opiniones sobre la politica la economia y "
    "el tiempo con sus amigos y seguidores todos los dias porque esto es lo que les gusta "
    "hacer cuando leen y escriben sobre el mundo que les rodea y las historias que mas "
    "importan al publico aqui y alla con noticias de la ciudad y reportajes sobre el gobierno "
    "y las personas que viven y trabajan en este pais escribiendo sobre lo que paso hoy y lo "
    "que pasara manana en la vida de la nacion";

const char* kFrenchSample =
    "Le rapide renard brun saute par dessus le chien paresseux pendant que les nouvelles du "
    "matin se repandent dans le pays et que les gens partagent leurs opinions sur la politique "
    "l economie et le temps avec leurs amis et leurs abonnes chaque jour parce que c est ce qu "
    "ils aiment faire quand ils lisent et ecrivent sur le monde qui les entoure et les "
    "histoires qui comptent le plus pour le public ici et la avec des nouvelles de la ville et "
    "des reportages sur le gouvernement et les personnes qui vivent et travaillent dans ce "
    "pays en ecrivant sur ce qui s est passe aujourd hui et ce qui se passera demain dans la "
    "vie de la nation";

const char* kGermanSample =
    "Der schnelle braune Fuchs springt ueber den faulen Hund waehrend sich die Nachrichten des "
    "Morgens im ganzen Land verbreiten und die Menschen ihre Gedanken ueber die Politik die "
    "Wirtschaft und das Wetter mit ihren Freunden und Followern jeden Tag teilen weil es das "
    "ist was sie gerne tun wenn sie ueber die Welt um sie herum lesen und schreiben und ueber "
    "die Geschichten die der Oeffentlichkeit am wichtigsten sind hier und dort mit Nachrichten "
    "aus der Stadt und Berichten ueber die Regierung und die Menschen die in diesem Land leben "
    "und arbeiten und darueber schreiben was heute geschah und was morgen im Leben der Nation "
    "geschehen wird";

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    out.push_back(' ');
    for (char c : text) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) out.push_back(static_cast<char>(std::tolower(u)));
        else if (u >= 0x80) out.push_back(c); // keep multibyte text as-is
        else if (!out.empty() && out.back() != ' ') out.push_back(' ');
    }
    if (out.back() != ' ') out.push_back(' ');
    return out;
}

} // namespace

std::map<std::string, int> TrigramLanguageDetector::ranked_ngrams(std::string_view text,
                                                                  std::size_t max_ngrams) {
    const std::string norm = normalize(text);
    std::map<std::string, long> counts;
    for (std::size_t n = 1; n <= kMaxNgram; ++n)
        for (std::size_t i = 0; i + n <= norm.size(); ++i) {
            std::string g = norm.substr(i, n);
            if (g == std::string(n, ' ')) continue;
            ++counts[g];
        }
    std::vector<std::pair<std::string, long>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::map<std::string, int> rank;
    for (std::size_t i = 0; i < sorted.size() && i < max_ngrams; ++i)
        rank[sorted[i].first] = static_cast<int>(i);
    return rank;
}

TrigramLanguageDetector::TrigramLanguageDetector() {
    add_profile("en", kEnglishSample);
    add_profile("es", kSpanishSample);
    add_profile("fr", kFrenchSample);
    add_profile("de", kGermanSample);
}

void TrigramLanguageDetector::add_profile(const std::string& code, std::string_view sample_text) {
    profiles_.push_back({code, ranked_ngrams(sample_text, kProfileSize)});
}

std::string TrigramLanguageDetector::detect(std::string_view text) const {
    long letters = 0;
    for (char c : text)
        if (std::isalpha(static_cast<unsigned char>(c))) ++letters;
    if (letters < 4) return "und";
    const auto doc = ranked_ngrams(text, kProfileSize);
    if (doc.empty()) return "und";
    std::string best = "und";
    long best_dist = -1;
    for (const auto& profile : profiles_) {
        long dist = 0;
        for (const auto& [gram, r] : doc) {
            auto it = profile.rank.find(gram);
            dist += it == profile.rank.end() ? static_cast<long>(kProfileSize)
                                             : std::abs(static_cast<long>(r) - it->second);
        }
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            best = profile.code;
        }
    }
    return best;
}

std::unique_ptr<LanguageDetector> make_language_detector(const std::string& kind) {
    if (kind == "trigram" || kind.empty()) return std::make_unique<TrigramLanguageDetector>();
    throw ValidationError("unknown language detector kind '" + kind + "'");
}

} // namespace mediaprof
