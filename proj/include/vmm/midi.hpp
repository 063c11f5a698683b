#ifndef VMM_MIDI_HPP
#define VMM_MIDI_HPP

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "vmm/core.hpp"

namespace vmm {

/// Pitch used for rests; the only pitch allowed a negative duration.
inline constexpr int silence_pitch = 128;

struct NoteEvent {
    int pitch = 0;
    int volume = 0;
    long duration = 0;  // milliseconds

    friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

inline void validate(const NoteEvent& e) {
    if (e.pitch < 0 || e.pitch > silence_pitch)
        throw DataError("MIDI pitch " + std::to_string(e.pitch) + " outside 0..127 (128 = silence)");
    if (e.volume < 0 || e.volume > 127) throw DataError("MIDI volume " + std::to_string(e.volume) + " outside 0..127");
    if (e.duration < 0 && e.pitch != silence_pitch)
        throw DataError("negative duration is only allowed for the silence note");
}

/// The twelve symbols of the text representation.
inline Alphabet midi_alphabet() { return Alphabet::from_chars("0123456789:-"); }

/// "pitch:volume:duration:" per event, concatenated.
inline std::string midi_text(const std::vector<NoteEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        validate(e);
        out += std::to_string(e.pitch) + ':' + std::to_string(e.volume) + ':' + std::to_string(e.duration) + ':';
    }
    return out;
}

inline Sequence midi_tokenize(const std::vector<NoteEvent>& events) { return midi_alphabet().encode(midi_text(events)); }

/// Inverse of midi_text.
inline std::vector<NoteEvent> parse_midi_text(const std::string& text) {
    std::vector<long> fields;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto colon = text.find(':', pos);
        if (colon == std::string::npos) throw DataError("MIDI text does not end with ':'");
        const std::string field = text.substr(pos, colon - pos);
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (field.empty() || used != field.size()) throw DataError("bad MIDI text field '" + field + "'");
        fields.push_back(v);
        pos = colon + 1;
    }
    if (fields.size() % 3 != 0) throw DataError("MIDI text has an incomplete event");
    std::vector<NoteEvent> out;
    for (std::size_t i = 0; i < fields.size(); i += 3) {
        NoteEvent e{static_cast<int>(fields[i]), static_cast<int>(fields[i + 1]), fields[i + 2]};
        validate(e);
        out.push_back(e);
    }
    return out;
}

/// One "pitch,volume,duration" event per line; blank lines and lines starting
/// with '#' are skipped.
inline std::vector<NoteEvent> read_midi_csv(std::istream& in) {
    std::vector<NoteEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::stringstream ss(line);
        std::string a, b, c, extra;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') || std::getline(ss, extra))
            throw DataError("MIDI CSV line " + std::to_string(lineno) + ": expected pitch,volume,duration");
        NoteEvent e;
        try {
            std::size_t ua = 0, ub = 0, uc = 0;
            e.pitch = std::stoi(a, &ua);
            e.volume = std::stoi(b, &ub);
            e.duration = std::stol(c, &uc);
            auto rest_blank = [](const std::string& s, std::size_t u) {
                return s.find_first_not_of(" \t", u) == std::string::npos;
            };
            if (!rest_blank(a, ua) || !rest_blank(b, ub) || !rest_blank(c, uc)) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("MIDI CSV line " + std::to_string(lineno) + ": non-integer field");
        }
        validate(e);
        out.push_back(e);
    }
    return out;
}

}  // namespace vmm

#endif  // VMM_MIDI_HPP
