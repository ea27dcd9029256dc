#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdslab/rng.hpp"

namespace rdslab {

inline constexpr std::uint64_t kDefaultEnumBudget = 1ull << 26;

// A finite word over {1..N}; symbols are stored with the first-applied map
// first, matching T_{w} = T_{w_n} o ... o T_{w_1}.
struct Word {
  std::vector<int> symbols;
  int alphabet_size = 1;

  Word() = default;
  Word(std::vector<int> syms, int n);

  std::size_t length() const { return symbols.size(); }

  // Digit string for N <= 9; '.'-separated otherwise.
  std::string str() const;
  static Word parse(const std::string& text, int alphabet_size);
};

Word concat(const Word& u, const Word& v);

// N^n with overflow detection; throws BudgetError beyond budget.
std::uint64_t word_count(int alphabet_size, std::uint64_t length, std::uint64_t budget);

// All N^n words of length n, lexicographic. Throws BudgetError when N^n
// exceeds the budget.
std::vector<Word> enumerate_words(int alphabet_size, std::uint64_t length,
                                  std::uint64_t budget = kDefaultEnumBudget);

Word sample_word(int alphabet_size, std::uint64_t length, Rng& rng);

// Supplies the symbol at any 1-based index on demand; infinite words are
// never materialized.
class WordSource {
 public:
  enum class Kind { Explicit, Periodic, Random };

  static WordSource explicit_prefix(Word w);
  static WordSource periodic(Word w);
  static WordSource random(int alphabet_size, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int alphabet_size() const { return alphabet_size_; }

  // 1-based; Explicit sources throw DomainError past their prefix.
  int symbol(std::uint64_t index) const;

  Word prefix(std::uint64_t n) const;

  WordSource shifted(std::uint64_t k) const;

  std::string describe() const;

 private:
  WordSource() = default;
  Kind kind_ = Kind::Random;
  int alphabet_size_ = 1;
  Word base_;
  std::uint64_t seed_ = 0;
  std::uint64_t offset_ = 0;
};

}  // namespace rdslab
