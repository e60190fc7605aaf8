#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mediaprof/errors.hpp"

namespace mediaprof {

struct CaptionCue {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string text;

    bool operator==(const CaptionCue&) const = default;
};

// Parses a WebVTT-like document down to plain cues: the optional WEBVTT
// header, NOTE/STYLE blocks and cue identifiers are skipped, inline markup
// tags are stripped, cue settings after the timing line are ignored.
// Timestamps accept HH:MM:SS.mmm and MM:SS.mmm (comma accepted for the
// millisecond separator). Throws ParseError on malformed timing lines.
std::vector<CaptionCue> parse_vtt(const std::string& text);

// Enforces the cue-list contract: every cue with start < end, list ordered by
// start, no overlaps. Throws ValidationError.
void validate_cues(const std::vector<CaptionCue>& cues);

// Total speech time covered by the cues, in milliseconds.
std::int64_t total_cue_span_ms(const std::vector<CaptionCue>& cues);

std::int64_t parse_vtt_timestamp(const std::string& token);

} // namespace mediaprof
