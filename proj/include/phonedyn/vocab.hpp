#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace phonedyn {

enum class PhoneClass { vowel, consonant };
enum class Manner { plosive, fricative, nasal, other };

inline std::string_view to_string(Manner m) {
  switch (m) {
    case Manner::plosive: return "plosive";
    case Manner::fricative: return "fricative";
    case Manner::nasal: return "nasal";
    case Manner::other: return "other";
  }
  return "other";
}

inline std::optional<Manner> parse_manner(std::string_view s) {
  if (s == "plosive") return Manner::plosive;
  if (s == "fricative") return Manner::fricative;
  if (s == "nasal") return Manner::nasal;
  if (s == "other") return Manner::other;
  return std::nullopt;
}

struct PhonemeEntry {
  std::string label;
  PhoneClass phone_class = PhoneClass::consonant;
  Manner manner = Manner::other;
};

/// Ordered phoneme inventory. A phoneme's position in the table is its
/// integer label everywhere else in the library.
class PhonemeVocab {
 public:
  PhonemeVocab() = default;

  explicit PhonemeVocab(std::vector<PhonemeEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& label = entries_[i].label;
      if (label.empty()) throw FormatError("vocab: empty phoneme label at row " + std::to_string(i + 1));
      if (!index_.emplace(label, static_cast<int>(i)).second)
        throw FormatError("vocab: duplicate phoneme label '" + label + "'");
    }
  }

  /// The 39-phoneme ARPAbet inventory (15 vowels, 24 consonants).
  static PhonemeVocab arpabet39() {
    std::vector<PhonemeEntry> e;
    for (const char* v : {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW",
                          "OY", "UH", "UW"})
      e.push_back({v, PhoneClass::vowel, Manner::other});
    for (const char* c : {"P", "B", "T", "D", "K", "G"})
      e.push_back({c, PhoneClass::consonant, Manner::plosive});
    for (const char* c : {"F", "V", "TH", "DH", "S", "Z", "SH", "ZH", "HH"})
      e.push_back({c, PhoneClass::consonant, Manner::fricative});
    for (const char* c : {"M", "N", "NG"}) e.push_back({c, PhoneClass::consonant, Manner::nasal});
    for (const char* c : {"CH", "JH", "L", "R", "W", "Y"})
      e.push_back({c, PhoneClass::consonant, Manner::other});
    return PhonemeVocab(std::move(e));
  }

  /// Parses the TSV table: label, class (V/C), manner.
  static PhonemeVocab parse(std::istream& in, const std::string& source = "vocab") {
    std::vector<PhonemeEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto trimmed = text::trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const auto cols = text::split(trimmed, '\t');
      const std::string where = source + ":" + std::to_string(line_no);
      if (cols.size() != 3) throw FormatError(where + ": expected 3 tab-separated columns");
      PhonemeEntry entry;
      entry.label = std::string(text::trim(cols[0]));
      const auto cls = text::trim(cols[1]);
      if (cls == "V") {
        entry.phone_class = PhoneClass::vowel;
      } else if (cls == "C") {
        entry.phone_class = PhoneClass::consonant;
      } else {
        throw FormatError(where + ": class must be V or C, got '" + std::string(cls) + "'");
      }
      const auto manner = parse_manner(text::trim(cols[2]));
      if (!manner) throw FormatError(where + ": unknown manner '" + std::string(cols[2]) + "'");
      entry.manner = *manner;
      entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw FormatError(source + ": vocab table is empty");
    return PhonemeVocab(std::move(entries));
  }

  static PhonemeVocab load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open vocab file: " + path.string());
    return parse(in, path.string());
  }

  void write(std::ostream& out) const {
    for (const auto& e : entries_)
      out << e.label << '\t' << (e.phone_class == PhoneClass::vowel ? "V" : "C") << '\t'
          << to_string(e.manner) << '\n';
  }

  std::optional<int> index_of(std::string_view label) const {
    const auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const PhonemeEntry& operator[](int index) const { return entries_.at(static_cast<std::size_t>(index)); }
  const std::vector<PhonemeEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool is_vowel(int index) const { return (*this)[index].phone_class == PhoneClass::vowel; }

  std::size_t count(PhoneClass c) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.phone_class == c;
    return n;
  }

 private:
  std::vector<PhonemeEntry> entries_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace phonedyn
