#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "xsm/word.hpp"

namespace xsm {

inline constexpr Integer kPageSize = 512;
inline constexpr Integer kPageCount = 128;
inline constexpr Integer kMemoryWords = kPageSize * kPageCount;  // 65536

inline constexpr Integer kBlockSize = 512;
inline constexpr Integer kBlockCount = 512;
inline constexpr Integer kDiskWords = kBlockSize * kBlockCount;  // 262144

using Address = Integer;

[[nodiscard]] constexpr bool valid_physical(Address a) noexcept {
  return a >= 0 && a < kMemoryWords;
}

/// Physical memory. Every store is appended to a write log that the
/// simulator drains once per step (watchpoints read it).
class Memory {
 public:
  Memory() : cells_(kMemoryWords) {}

  [[nodiscard]] const Word& read(Address a) const { return cells_.at(index(a)); }

  void write(Address a, Word w) {
    cells_.at(index(a)) = std::move(w);
    write_log_.push_back(a);
  }

  [[nodiscard]] std::span<const Word> page(Integer p) const {
    check_page(p);
    return std::span<const Word>(cells_).subspan(static_cast<std::size_t>(p * kPageSize),
                                                 static_cast<std::size_t>(kPageSize));
  }

  void store_page(Integer p, std::span<const Word> words) {
    check_page(p);
    for (Integer i = 0; i < kPageSize; ++i) write(p * kPageSize + i, words[static_cast<std::size_t>(i)]);
  }

  [[nodiscard]] const std::vector<Address>& write_log() const noexcept { return write_log_; }
  void clear_write_log() noexcept { write_log_.clear(); }

  [[nodiscard]] const std::vector<Word>& cells() const noexcept { return cells_; }

  // The write log is bookkeeping, not machine state.
  bool operator==(const Memory& other) const { return cells_ == other.cells_; }

 private:
  static std::size_t index(Address a) {
    if (!valid_physical(a)) throw std::out_of_range("physical address out of range");
    return static_cast<std::size_t>(a);
  }
  static void check_page(Integer p) {
    if (p < 0 || p >= kPageCount) throw std::out_of_range("page out of range");
  }

  std::vector<Word> cells_;
  std::vector<Address> write_log_;
};

}  // namespace xsm
