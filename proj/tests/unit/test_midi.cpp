#include <gtest/gtest.h>

#include <sstream>

#include "vmm/io.hpp"
#include "vmm/midi.hpp"

using namespace vmm;

TEST(Midi, NoteText) {
    EXPECT_EQ(midi_text({{102, 83, 4022}}), "102:83:4022:");
    EXPECT_EQ(midi_text({{128, 0, -240}}), "128:0:-240:");
    EXPECT_EQ(midi_text({}), "");
    EXPECT_TRUE(midi_tokenize({}).empty());
}

TEST(Midi, TokensUseTwelveSymbolAlphabet) {
    const Alphabet a = midi_alphabet();
    EXPECT_EQ(a.size(), 12u);
    const Sequence s = midi_tokenize({{102, 83, 4022}});
    EXPECT_EQ(s.size(), 12u);
    EXPECT_EQ(a.decode(s), "102:83:4022:");
    EXPECT_EQ(a.decode(midi_tokenize({{128, 0, -240}})), "128:0:-240:");
}

TEST(Midi, FootnoteEventsRoundTrip) {
    const std::vector<NoteEvent> events{{83, 120, 240}, {128, 0, -240}};
    const std::string text = midi_text(events);
    EXPECT_EQ(text, "83:120:240:128:0:-240:");
    EXPECT_EQ(parse_midi_text(text), events);
    EXPECT_EQ(parse_midi_text(midi_alphabet().decode(midi_tokenize(events))), events);
}

TEST(Midi, InvalidEvents) {
    EXPECT_THROW(midi_text({{129, 0, 10}}), DataError);
    EXPECT_THROW(midi_text({{-1, 0, 10}}), DataError);
    EXPECT_THROW(midi_text({{60, 128, 10}}), DataError);
    EXPECT_THROW(midi_text({{60, 100, -5}}), DataError);
    EXPECT_THROW(parse_midi_text("60:100:"), DataError);
    EXPECT_THROW(parse_midi_text("60:100:5"), DataError);
    EXPECT_THROW(parse_midi_text("60::5:"), DataError);
}

TEST(Midi, CsvReader) {
    std::istringstream in("# pitch,volume,duration\n83,120,240\n\n128, 0, -240\r\n");
    EXPECT_EQ(read_midi_csv(in), (std::vector<NoteEvent>{{83, 120, 240}, {128, 0, -240}}));
    std::istringstream bad("83,120\n");
    EXPECT_THROW(read_midi_csv(bad), DataError);
    std::istringstream junk("83,x,240\n");
    EXPECT_THROW(read_midi_csv(junk), DataError);
    std::istringstream extra("83,1,2,3\n");
    EXPECT_THROW(read_midi_csv(extra), DataError);
}

TEST(InputModes, Decoding) {
    EXPECT_EQ(parse_mode("midi-csv"), InputMode::midi_csv);
    EXPECT_THROW(parse_mode("auto"), DataError);
    EXPECT_EQ(decode_input("ab", InputMode::bytes, Alphabet::bytes()), (Sequence{97, 98}));
    const Alphabet aa(std::vector<std::string>{"ALA", "GLY"});
    EXPECT_EQ(decode_input("GLY\n ALA \n\nGLY\n", InputMode::tokens, aa), (Sequence{1, 0, 1}));
    EXPECT_THROW(decode_input("TRP\n", InputMode::tokens, aa), DataError);
    EXPECT_EQ(midi_alphabet().decode(decode_input("83,120,240\n", InputMode::midi_csv, midi_alphabet())),
              "83:120:240:");
    EXPECT_THROW(mode_alphabet(InputMode::tokens), DataError);
    EXPECT_EQ(mode_alphabet(InputMode::bytes).size(), 256u);
}
