#pragma once

// The simulated disk: 512 blocks of 512 words. On the host it is a plain
// text file holding one word per line, exactly 262144 lines.

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "xsm/error.hpp"
#include "xsm/memory.hpp"

namespace xsm {

class DiskImage {
 public:
  DiskImage() : words_(kDiskWords) {}

  [[nodiscard]] std::span<const Word> block(Integer b) const {
    check_block(b);
    return std::span<const Word>(words_).subspan(static_cast<std::size_t>(b * kBlockSize),
                                                 static_cast<std::size_t>(kBlockSize));
  }

  [[nodiscard]] const Word& word(Integer b, Integer offset) const {
    check_block(b);
    return words_.at(static_cast<std::size_t>(b * kBlockSize + offset));
  }

  void set_word(Integer b, Integer offset, Word w) {
    check_block(b);
    if (offset < 0 || offset >= kBlockSize) throw std::out_of_range("block offset out of range");
    words_[static_cast<std::size_t>(b * kBlockSize + offset)] = std::move(w);
  }

  void store_block(Integer b, std::span<const Word> words) {
    check_block(b);
    for (Integer i = 0; i < kBlockSize; ++i) set_word(b, i, words[static_cast<std::size_t>(i)]);
  }

  void clear_block(Integer b) {
    for (Integer i = 0; i < kBlockSize; ++i) set_word(b, i, Word{});
  }

  [[nodiscard]] const std::vector<Word>& words() const noexcept { return words_; }

  bool operator==(const DiskImage&) const = default;

  static DiskImage read(std::istream& in) {
    DiskImage image;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      if (n == image.words_.size()) throw Error("disk image has more than 262144 lines");
      if (line.find('\n') != std::string::npos) throw Error("corrupt line in disk image");
      image.words_[n++] = std::move(line);
    }
    if (n != image.words_.size())
      throw Error("disk image has " + std::to_string(n) + " lines, expected 262144");
    return image;
  }

  static DiskImage load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open disk image '" + path.string() + "'");
    try {
      return read(in);
    } catch (const Error& e) {
      throw Error(path.string() + ": " + e.what());
    }
  }

  void write(std::ostream& out) const {
    std::string buffer;
    buffer.reserve(words_.size() * 2);
    for (const auto& w : words_) {
      buffer += w;
      buffer += '\n';
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write disk image '" + path.string() + "'");
    write(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }

 private:
  static void check_block(Integer b) {
    if (b < 0 || b >= kBlockCount) throw std::out_of_range("disk block out of range");
  }

  std::vector<Word> words_;
};

}  // namespace xsm
