#include "mediaprof/vtt.hpp"

#include <cctype>
#include <sstream>

#include "mediaprof/util.hpp"

namespace mediaprof {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::string strip_markup(const std::string& line) {
    std::string out;
    out.reserve(line.size());
    bool in_tag = false;
    for (char c : line) {
        if (c == '<') {
            in_tag = true;
            continue;
        }
        if (c == '>') {
            in_tag = false;
            continue;
        }
        if (!in_tag) out.push_back(c);
    }
    return out;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

} // namespace

std::int64_t parse_vtt_timestamp(const std::string& token) {
    // HH:MM:SS.mmm | MM:SS.mmm, '.' or ',' before milliseconds
    std::vector<std::string> parts;
    std::string cur;
    for (char c : token) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 2 && parts.size() != 3)
        throw ParseError("bad timestamp '" + token + "'");

    std::string last = parts.back();
    std::size_t dot = last.find_first_of(".,");
    std::string ms_str = "0";
    if (dot != std::string::npos) {
        ms_str = last.substr(dot + 1);
        last = last.substr(0, dot);
    }
    parts.back() = last;
    for (const auto& p : parts)
        if (!all_digits(p)) throw ParseError("bad timestamp '" + token + "'");
    if (!all_digits(ms_str) || ms_str.size() > 3)
        throw ParseError("bad timestamp '" + token + "'");
    while (ms_str.size() < 3) ms_str.push_back('0');

    std::int64_t hours = 0, minutes = 0, seconds = 0;
    if (parts.size() == 3) {
        hours = std::stoll(parts[0]);
        minutes = std::stoll(parts[1]);
        seconds = std::stoll(parts[2]);
    } else {
        minutes = std::stoll(parts[0]);
        seconds = std::stoll(parts[1]);
    }
    if (minutes > 59 || seconds > 59)
        throw ParseError("bad timestamp '" + token + "'");
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + std::stoll(ms_str);
}

std::vector<CaptionCue> parse_vtt(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }

    std::vector<CaptionCue> cues;
    std::size_t i = 0;
    // header + anything before the first blank line
    if (i < lines.size() && lines[i].rfind("WEBVTT", 0) == 0) {
        while (i < lines.size() && !trim(lines[i]).empty()) ++i;
    }
    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        // NOTE / STYLE / REGION blocks run to the next blank line
        if (lines[i].rfind("NOTE", 0) == 0 || lines[i].rfind("STYLE", 0) == 0 ||
            lines[i].rfind("REGION", 0) == 0) {
            while (i < lines.size() && !trim(lines[i]).empty()) ++i;
            continue;
        }
        // optional cue identifier
        if (lines[i].find("-->") == std::string::npos) {
            ++i;
            if (i >= lines.size() || lines[i].find("-->") == std::string::npos)
                throw ParseError("expected cue timing line near '" + lines[i - 1] + "'");
        }
        const std::string timing = lines[i++];
        const std::size_t arrow = timing.find("-->");
        const std::string start_tok = trim(timing.substr(0, arrow));
        std::string rest = trim(timing.substr(arrow + 3));
        // cue settings follow the end timestamp
        const std::size_t sp = rest.find_first_of(" \t");
        const std::string end_tok = sp == std::string::npos ? rest : rest.substr(0, sp);

        CaptionCue cue;
        cue.start_ms = parse_vtt_timestamp(start_tok);
        cue.end_ms = parse_vtt_timestamp(end_tok);
        if (cue.start_ms < 0 || cue.start_ms >= cue.end_ms)
            throw ParseError("cue with start >= end at '" + timing + "'");

        std::string body;
        while (i < lines.size() && !trim(lines[i]).empty()) {
            if (!body.empty()) body.push_back(' ');
            body += strip_markup(lines[i]);
            ++i;
        }
        cue.text = collapse_ws(body);
        cues.push_back(std::move(cue));
    }
    return cues;
}

void validate_cues(const std::vector<CaptionCue>& cues) {
    for (std::size_t i = 0; i < cues.size(); ++i) {
        if (cues[i].start_ms < 0 || cues[i].start_ms >= cues[i].end_ms)
            throw ValidationError("cue " + std::to_string(i) + " has start >= end");
        if (i > 0 && cues[i].start_ms < cues[i - 1].end_ms)
            throw ValidationError("cue " + std::to_string(i) + " overlaps its predecessor");
    }
}

std::int64_t total_cue_span_ms(const std::vector<CaptionCue>& cues) {
    std::int64_t total = 0;
    for (const auto& c : cues) total += c.end_ms - c.start_ms;
    return total;
}

} // namespace mediaprof
