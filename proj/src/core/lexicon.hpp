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

#ifndef PSYHIDE_CORE_LEXICON_HPP_
#define PSYHIDE_CORE_LEXICON_HPP_

#include <map>
#include <string>
#include <vector>

namespace psyhide {

inline const std::string kSilencePhone = "SIL";

// Context-independent phone set plus a word -> phone-sequence table.
// Acoustic-model states are laid out as phone_index * states_per_phone +
// substate, with SIL always phone 0, so the state count is
// (phones + silence) * states_per_phone.
class PhoneInventory {
 public:
  PhoneInventory() = default;

  // Builds the inventory from a lexicon.  The phone set is SIL plus the
  // sorted set of phones that occur in the entries.
  static PhoneInventory from_lexicon(
      const std::vector<std::pair<std::string, std::vector<std::string>>>&
          entries,
      int states_per_phone = 3);

  // One "WORD PH1 PH2 ..." entry per line; '#' starts a comment.
  static PhoneInventory parse_lexicon_file(const std::string& path,
                                           int states_per_phone = 3);
  static PhoneInventory parse_lexicon_text(const std::string& text,
                                           int states_per_phone = 3);

  void write_lexicon_file(const std::string& path) const;

  int states_per_phone() const { return states_per_phone_; }
  int phone_count() const { return static_cast<int>(phones_.size()); }
  int state_count() const { return phone_count() * states_per_phone_; }

  const std::vector<std::string>& phones() const { return phones_; }
  const std::vector<std::string>& words() const { return words_; }

  int phone_id(const std::string& phone) const;        // throws LexiconError
  const std::string& phone_name(int id) const;
  bool has_word(const std::string& word) const;
  const std::vector<std::string>& word_phones(const std::string& word) const;

  int state_id(int phone, int substate) const {
    return phone * states_per_phone_ + substate;
  }
  int silence_state(int substate) const { return substate; }

  // Phone-state chain for a word: every phone expands to its substates in
  // order.
  std::vector<int> word_state_chain(const std::string& word) const;

  // Lexicon phones in a word sequence (silence not counted).
  int total_phones(const std::vector<std::string>& word_seq) const;

 private:
  int states_per_phone_ = 3;
  std::vector<std::string> phones_;  // phones_[0] == SIL
  std::vector<std::string> words_;   // insertion order of the lexicon
  std::map<std::string, int> phone_ids_;
  std::map<std::string, std::vector<std::string>> lexicon_;
};

// The toy command lexicon bundled with the library; all synthetic audio is
// built from these words.
const std::vector<std::pair<std::string, std::vector<std::string>>>&
builtin_lexicon_entries();

PhoneInventory builtin_inventory();

// Uppercases and splits a transcript on whitespace, stripping anything that
// is not a letter or digit from each token.
std::vector<std::string> tokenize_words(const std::string& text);

std::string join_words(const std::vector<std::string>& words);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_LEXICON_HPP_
