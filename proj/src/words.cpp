#include "rdslab/words.hpp"

#include <limits>
#include <sstream>

#include "rdslab/errors.hpp"

namespace rdslab {

Word::Word(std::vector<int> syms, int n) : symbols(std::move(syms)), alphabet_size(n) {
  if (n < 1) throw DomainError("alphabet size must be >= 1");
  for (int s : symbols)
    if (s < 1 || s > n)
      throw DomainError("word symbol " + std::to_string(s) + " outside {1.." + std::to_string(n) + "}");
}

std::string Word::str() const {
  std::ostringstream os;
  if (alphabet_size <= 9) {
    for (int s : symbols) os << s;
  } else {
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i) os << '.';
      os << symbols[i];
    }
  }
  return os.str();
}

Word Word::parse(const std::string& text, int alphabet_size) {
  std::vector<int> syms;
  if (alphabet_size <= 9) {
    for (char c : text) {
      if (c < '1' || c > '9') throw ConfigError("bad word digit '" + std::string(1, c) + "'");
      syms.push_back(c - '0');
    }
  } else {
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, '.')) {
      if (tok.empty()) throw ConfigError("empty word component in \"" + text + "\"");
      syms.push_back(std::stoi(tok));
    }
  }
  return Word(std::move(syms), alphabet_size);
}

Word concat(const Word& u, const Word& v) {
  if (u.alphabet_size != v.alphabet_size) throw DomainError("alphabet mismatch in concat");
  std::vector<int> syms = u.symbols;
  syms.insert(syms.end(), v.symbols.begin(), v.symbols.end());
  return Word(std::move(syms), u.alphabet_size);
}

std::uint64_t word_count(int alphabet_size, std::uint64_t length, std::uint64_t budget) {
  if (alphabet_size < 1) throw DomainError("alphabet size must be >= 1");
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < length; ++i) {
    if (count > budget / static_cast<std::uint64_t>(alphabet_size))
      throw BudgetError("N^n = " + std::to_string(alphabet_size) + "^" + std::to_string(length) +
                        " exceeds enumeration budget " + std::to_string(budget));
    count *= static_cast<std::uint64_t>(alphabet_size);
  }
  if (count > budget)
    throw BudgetError("N^n exceeds enumeration budget " + std::to_string(budget));
  return count;
}

std::vector<Word> enumerate_words(int alphabet_size, std::uint64_t length, std::uint64_t budget) {
  const std::uint64_t count = word_count(alphabet_size, length, budget);
  std::vector<Word> out;
  out.reserve(count);
  std::vector<int> cur(length, 1);
  for (std::uint64_t w = 0; w < count; ++w) {
    out.emplace_back(cur, alphabet_size);
    // odometer increment, last symbol fastest => lexicographic order
    for (std::size_t i = length; i-- > 0;) {
      if (cur[i] < alphabet_size) {
        ++cur[i];
        break;
      }
      cur[i] = 1;
    }
  }
  return out;
}

Word sample_word(int alphabet_size, std::uint64_t length, Rng& rng) {
  std::vector<int> syms(length);
  for (auto& s : syms) s = rng.next_symbol(alphabet_size);
  return Word(std::move(syms), alphabet_size);
}

WordSource WordSource::explicit_prefix(Word w) {
  WordSource s;
  s.kind_ = Kind::Explicit;
  s.alphabet_size_ = w.alphabet_size;
  s.base_ = std::move(w);
  return s;
}

WordSource WordSource::periodic(Word w) {
  if (w.length() == 0) throw DomainError("periodic word must be non-empty");
  WordSource s;
  s.kind_ = Kind::Periodic;
  s.alphabet_size_ = w.alphabet_size;
  s.base_ = std::move(w);
  return s;
}

WordSource WordSource::random(int alphabet_size, std::uint64_t seed) {
  if (alphabet_size < 1) throw DomainError("alphabet size must be >= 1");
  WordSource s;
  s.kind_ = Kind::Random;
  s.alphabet_size_ = alphabet_size;
  s.seed_ = seed;
  return s;
}

int WordSource::symbol(std::uint64_t index) const {
  if (index == 0) throw DomainError("word indices are 1-based");
  const std::uint64_t m = index + offset_;
  switch (kind_) {
    case Kind::Explicit:
      if (m > base_.length()) throw DomainError("index past end of explicit word prefix");
      return base_.symbols[m - 1];
    case Kind::Periodic:
      return base_.symbols[(m - 1) % base_.length()];
    case Kind::Random:
      return 1 + static_cast<int>(mix64(seed_, m) % static_cast<std::uint64_t>(alphabet_size_));
  }
  return 1;
}

Word WordSource::prefix(std::uint64_t n) const {
  std::vector<int> syms(n);
  for (std::uint64_t i = 1; i <= n; ++i) syms[i - 1] = symbol(i);
  return Word(std::move(syms), alphabet_size_);
}

WordSource WordSource::shifted(std::uint64_t k) const {
  WordSource s = *this;
  s.offset_ += k;
  return s;
}

std::string WordSource::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Explicit: os << "explicit:" << base_.str(); break;
    case Kind::Periodic: os << "periodic:" << base_.str(); break;
    case Kind::Random: os << "random:" << seed_; break;
  }
  if (offset_) os << "+" << offset_;
  return os.str();
}

}  // namespace rdslab
