// Copyright 2026 The psyhide Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace psyhide {

PhoneInventory PhoneInventory::from_lexicon(
    const std::vector<std::pair<std::string, std::vector<std::string>>>&
        entries,
    int states_per_phone) {
  if (states_per_phone < 1) {
    throw ArgumentError("states per phone must be positive");
  }
  if (entries.empty()) {
    throw LexiconError("lexicon has no entries");
  }
  PhoneInventory inv;
  inv.states_per_phone_ = states_per_phone;

  std::set<std::string> phone_set;
  for (const auto& [word, phones] : entries) {
    if (word.empty() || phones.empty()) {
      throw LexiconError("lexicon entry with empty word or phone list");
    }
    if (inv.lexicon_.count(word)) {
      throw LexiconError("duplicate lexicon entry: " + word);
    }
    for (const std::string& p : phones) {
      if (p == kSilencePhone) {
        throw LexiconError("SIL may not appear inside a word: " + word);
      }
      phone_set.insert(p);
    }
    inv.words_.push_back(word);
    inv.lexicon_[word] = phones;
  }

  inv.phones_.push_back(kSilencePhone);
  inv.phones_.insert(inv.phones_.end(), phone_set.begin(), phone_set.end());
  for (int i = 0; i < static_cast<int>(inv.phones_.size()); ++i) {
    inv.phone_ids_[inv.phones_[i]] = i;
  }
  return inv;
}

namespace {

std::string upcase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

}  // namespace

PhoneInventory PhoneInventory::parse_lexicon_text(const std::string& text,
                                                  int states_per_phone) {
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<std::string> phones;
    std::string p;
    while (ls >> p) phones.push_back(upcase(p));
    if (phones.empty()) {
      throw LexiconError("lexicon entry without phones: " + word);
    }
    entries.emplace_back(upcase(word), std::move(phones));
  }
  return from_lexicon(entries, states_per_phone);
}

PhoneInventory PhoneInventory::parse_lexicon_file(const std::string& path,
                                                  int states_per_phone) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open lexicon: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lexicon_text(ss.str(), states_per_phone);
}

void PhoneInventory::write_lexicon_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << "# word  phone sequence\n";
  for (const std::string& w : words_) {
    out << w;
    for (const std::string& p : lexicon_.at(w)) out << ' ' << p;
    out << '\n';
  }
}

int PhoneInventory::phone_id(const std::string& phone) const {
  auto it = phone_ids_.find(phone);
  if (it == phone_ids_.end()) {
    throw LexiconError("unknown phone: " + phone);
  }
  return it->second;
}

const std::string& PhoneInventory::phone_name(int id) const {
  if (id < 0 || id >= phone_count()) {
    throw ArgumentError("phone id out of range");
  }
  return phones_[id];
}

bool PhoneInventory::has_word(const std::string& word) const {
  return lexicon_.count(word) != 0;
}

const std::vector<std::string>& PhoneInventory::word_phones(
    const std::string& word) const {
  auto it = lexicon_.find(word);
  if (it == lexicon_.end()) {
    throw LexiconError("word not in lexicon: " + word);
  }
  return it->second;
}

std::vector<int> PhoneInventory::word_state_chain(
    const std::string& word) const {
  std::vector<int> chain;
  for (const std::string& p : word_phones(word)) {
    const int pid = phone_id(p);
    for (int s = 0; s < states_per_phone_; ++s) {
      chain.push_back(state_id(pid, s));
    }
  }
  return chain;
}

int PhoneInventory::total_phones(
    const std::vector<std::string>& word_seq) const {
  int total = 0;
  for (const std::string& w : word_seq) {
    total += static_cast<int>(word_phones(w).size());
  }
  return total;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>&
builtin_lexicon_entries() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      entries = {
          {"ON", {"AA", "N"}},
          {"OFF", {"AA", "F"}},
          {"UP", {"AA", "P"}},
          {"DOWN", {"D", "OW", "N"}},
          {"LEFT", {"L", "EH", "F", "T"}},
          {"RIGHT", {"R", "IY", "T"}},
          {"STOP", {"S", "T", "OW", "P"}},
          {"PLAY", {"P", "L", "EH"}},
          {"PAUSE", {"P", "AA", "Z"}},
          {"OPEN", {"OW", "P", "EH", "N"}},
          {"CLOSE", {"K", "L", "OW", "Z"}},
          {"LOCK", {"L", "AA", "K"}},
          {"UNLOCK", {"AA", "N", "L", "AA", "K"}},
          {"DOOR", {"D", "OW", "R"}},
          {"WINDOW", {"W", "IY", "N", "D", "OW"}},
          {"LIGHT", {"L", "IY", "T"}},
          {"MUSIC", {"M", "UW", "Z", "IY", "K"}},
          {"CALL", {"K", "AA", "L"}},
          {"HOME", {"OW", "M"}},
          {"PHONE", {"F", "OW", "N"}},
          {"READ", {"R", "IY", "D"}},
          {"NEWS", {"N", "UW", "Z"}},
          {"SEND", {"S", "EH", "N", "D"}},
          {"TEXT", {"T", "EH", "K", "S", "T"}},
          {"TURN", {"T", "EH", "R", "N"}},
          {"SET", {"S", "EH", "T"}},
          {"TIMER", {"T", "IY", "M", "EH", "R"}},
          {"ALARM", {"AA", "L", "AA", "R", "M"}},
          {"WAKE", {"W", "EH", "K"}},
          {"BED", {"B", "EH", "D"}},
          {"ROOM", {"R", "UW", "M"}},
          {"TO", {"T", "UW"}},
      };
  return entries;
}

PhoneInventory builtin_inventory() {
  return PhoneInventory::from_lexicon(builtin_lexicon_entries());
}

std::vector<std::string> tokenize_words(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) {
        out.push_back(current);
        current.clear();
      }
    } else if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::toupper(c)));
    }
    // punctuation is dropped
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace psyhide
