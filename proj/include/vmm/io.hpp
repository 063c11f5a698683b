#ifndef VMM_IO_HPP
#define VMM_IO_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/midi.hpp"

namespace vmm {

enum class InputMode { bytes, tokens, midi_csv };

inline InputMode parse_mode(const std::string& name) {
    if (name == "bytes") return InputMode::bytes;
    if (name == "tokens") return InputMode::tokens;
    if (name == "midi-csv") return InputMode::midi_csv;
    throw DataError("unknown input mode '" + name + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::vector<std::string> read_lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = line.find_last_not_of(" \t");
        out.push_back(line.substr(a, b - a + 1));
    }
    return out;
}

/// Alphabet file: one token per non-blank line.
inline Alphabet read_alphabet(const std::filesystem::path& path) { return Alphabet(read_lines(read_file(path))); }

/// Alphabet implied by a mode; tokens mode needs an explicit alphabet file.
inline Alphabet mode_alphabet(InputMode mode, const std::filesystem::path& alphabet_file = {}) {
    switch (mode) {
        case InputMode::bytes: return Alphabet::bytes();
        case InputMode::midi_csv: return midi_alphabet();
        case InputMode::tokens:
            if (alphabet_file.empty()) throw DataError("tokens mode requires --alphabet");
            return read_alphabet(alphabet_file);
    }
    throw DataError("unknown input mode");
}

/// Decode raw file content into a sequence over `alphabet`.
inline Sequence decode_input(const std::string& content, InputMode mode, const Alphabet& alphabet) {
    Sequence out;
    switch (mode) {
        case InputMode::bytes:
            out.reserve(content.size());
            for (unsigned char c : content) out.push_back(c);
            validate(out, alphabet.size());
            break;
        case InputMode::tokens:
            for (const auto& tok : read_lines(content)) out.push_back(alphabet.index(tok));
            break;
        case InputMode::midi_csv: {
            std::stringstream ss(content);
            out = alphabet.encode(midi_text(read_midi_csv(ss)));
            break;
        }
    }
    return out;
}

inline Sequence read_sequence(const std::filesystem::path& path, InputMode mode, const Alphabet& alphabet) {
    Sequence s = decode_input(read_file(path), mode, alphabet);
    if (s.empty()) throw DataError(path.string() + ": empty input");
    return s;
}

/// Regular files of a directory in name order, or the path itself.
inline std::vector<std::filesystem::path> list_inputs(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw DataError("no such file or directory: " + path.string());
    if (!fs::is_directory(path)) return {path};
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw DataError("directory " + path.string() + " has no input files");
    return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace vmm

#endif  // VMM_IO_HPP
