#pragma once

// Host-side view of the disk file system.
//
// Layout (blocks):
//   0        boot code
//   1        free list, one word per block: "0" free, "1" used
//   2-3      inode table, 64 inodes of 16 words
//   4        root listing, 64 entries of 8 words (entry i describes inode i)
//   5-68     OS components (handlers), fixed block pairs
//   69-255   user files
//   256-511  swap area, never allocated here
//
// Inode words: name, type, size, user, perm, block x4, padding.
// Root entry words: name, size, type, user, perm, inode index, padding.
// Inode 0 is the root file itself (block 4); it is not listed and cannot be
// removed.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xsm/disk.hpp"
#include "xsm/error.hpp"
#include "xsm/instruction.hpp"
#include "xsm/trap.hpp"

namespace xsm::xfs {

inline constexpr Integer kBootBlock = 0;
inline constexpr Integer kFreeListBlock = 1;
inline constexpr Integer kInodeBlock = 2;
inline constexpr Integer kRootBlock = 4;
inline constexpr Integer kReservedBlocks = 69;  // blocks 0..68
inline constexpr Integer kFirstUserBlock = 69;
inline constexpr Integer kLastUserBlock = 255;
inline constexpr Integer kInodeWords = 16;
inline constexpr Integer kInodeCount = 64;
inline constexpr Integer kRootEntryWords = 8;
inline constexpr Integer kMaxFileBlocks = 4;
inline constexpr Integer kMaxFileWords = kMaxFileBlocks * kBlockSize;  // 2048
inline constexpr std::size_t kMaxNameLength = 12;
inline constexpr Integer kBootCapacity = kBlockSize / 2;        // instructions
inline constexpr Integer kHandlerCapacity = kBlockSize;         // two blocks
inline constexpr std::string_view kExecMagic = "XEXE";
inline constexpr Integer kExecHeaderWords = 8;

// Published logical layout for executables: pages 0-1 library, 2-3 heap,
// 4-7 code, 8-9 stack.
inline constexpr Integer kCodeStart = 4 * kPageSize;  // 2048, default entry point
inline constexpr Integer kCodeEnd = 8 * kPageSize;

enum class FileType : std::uint8_t { data, exec, root };

[[nodiscard]] constexpr std::string_view file_type_name(FileType t) noexcept {
  switch (t) {
    case FileType::data: return "data";
    case FileType::exec: return "exec";
    case FileType::root: return "root";
  }
  return "?";
}

struct Inode {
  Word name;
  FileType type = FileType::data;
  Integer size = 0;
  Word user = "root";
  Word perm = "open";
  std::vector<Integer> blocks;
};

struct FileInfo {
  Integer index = 0;
  Inode inode;
};

/// Where an OS component lives on disk and where the OS should load it.
struct HandlerSlot {
  std::string name;
  Integer first_block = 0;
  Integer block_count = 2;
  Integer first_page = 0;
};

[[nodiscard]] inline std::optional<HandlerSlot> handler_slot(std::string_view name) {
  auto pair = [&](Integer block, Address vector) {
    return HandlerSlot{std::string(name), block, 2, vector / kPageSize};
  };
  if (name == "os") return HandlerSlot{"os", kBootBlock, 1, kBootAddress / kPageSize};
  if (name == "exception") return pair(5, kExceptionVector);
  if (name == "timer") return pair(7, kTimerVector);
  if (name == "disk") return pair(9, kDiskVector);
  if (name == "console") return pair(11, kConsoleVector);
  if (name.size() > 3 && name.substr(0, 3) == "int") {
    const auto n = word_as_integer(name.substr(3));
    if (n && *n >= 4 && *n <= 18 && std::to_string(*n) == name.substr(3))
      return pair(13 + 2 * (*n - 4), software_int_vector(static_cast<int>(*n)));
  }
  return std::nullopt;
}

namespace detail {

inline std::vector<std::string> read_host_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

/// Assembly source: one instruction per line; blank lines are skipped and
/// every other line must decode.
inline std::vector<std::string> assembly_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (xsm::detail::trim(line).empty()) continue;
    if (!decode(line)) throw Error("line " + std::to_string(i + 1) + ": not an instruction: " + line);
    out.emplace_back(xsm::detail::trim(line));
  }
  return out;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

class FileSystem {
 public:
  explicit FileSystem(DiskImage& disk) : disk_(disk) {}

  /// Fresh image: every word empty, reserved blocks marked used, root inode
  /// and an empty root listing.
  static DiskImage format() {
    DiskImage disk;
    for (Integer b = 0; b < kBlockCount; ++b) disk.set_word(kFreeListBlock, b, b < kReservedBlocks ? "1" : "0");
    FileSystem fs(disk);
    Inode root;
    root.name = "root";
    root.type = FileType::root;
    root.size = kBlockSize;
    root.blocks = {kRootBlock};
    fs.write_inode(0, root);
    return disk;
  }

  // -- OS code --------------------------------------------------------------

  /// Places instruction i at block-0 word 2i (odd words empty).
  Integer load_boot(const std::vector<std::string>& asm_lines) {
    const auto code = detail::assembly_lines(asm_lines);
    if (static_cast<Integer>(code.size()) > kBootCapacity)
      throw Error("boot code has " + std::to_string(code.size()) + " instructions; block 0 holds at most " +
                  std::to_string(kBootCapacity));
    write_code(kBootBlock, 1, code);
    return static_cast<Integer>(code.size());
  }

  /// Writes an OS component to its reserved blocks. Returns a one-line
  /// report that includes the pages the OS should load it to.
  std::string load_handler(std::string_view name, const std::vector<std::string>& asm_lines) {
    const auto slot = handler_slot(name);
    if (!slot) throw Error("unknown handler '" + std::string(name) + "'");
    if (slot->name == "os") {
      const auto n = load_boot(asm_lines);
      return "os: " + std::to_string(n) + " instructions written to block 0; loaded by firmware to page 1";
    }
    const auto code = detail::assembly_lines(asm_lines);
    if (static_cast<Integer>(code.size()) > kHandlerCapacity)
      throw Error(std::string(name) + " has " + std::to_string(code.size()) + " instructions; a handler holds at most " +
                  std::to_string(kHandlerCapacity));
    write_code(slot->first_block, slot->block_count, code);
    return std::string(name) + ": " + std::to_string(code.size()) + " instructions written to blocks " +
           std::to_string(slot->first_block) + "-" + std::to_string(slot->first_block + 1) + "; load to pages " +
           std::to_string(slot->first_page) + "-" + std::to_string(slot->first_page + 1);
  }

  // -- files ----------------------------------------------------------------

  /// Stores a data file (one word per line) or an executable (8 header
  /// lines then one instruction per line, stored two words per
  /// instruction). Returns the new inode index.
  Integer load_file(const std::vector<std::string>& host_lines, FileType type, const std::string& name) {
    if (type == FileType::root) throw Error("cannot load a file of type root");
    check_name(name);
    if (find(name)) throw Error("duplicate name '" + name + "'");

    std::vector<Word> words;
    if (type == FileType::data) {
      words = host_lines;
    } else {
      words = exec_words(host_lines);
    }
    if (static_cast<Integer>(words.size()) > kMaxFileWords)
      throw Error("file of " + std::to_string(words.size()) + " words exceeds the maximum of " +
                  std::to_string(kMaxFileWords));

    std::optional<Integer> slot;
    for (Integer i = 1; i < kInodeCount; ++i)
      if (read_inode(i).name.empty()) {
        slot = i;
        break;
      }
    if (!slot) throw Error("no free inode");

    const Integer needed = (static_cast<Integer>(words.size()) + kBlockSize - 1) / kBlockSize;
    std::vector<Integer> blocks;
    for (Integer b = kFirstUserBlock; b <= kLastUserBlock && static_cast<Integer>(blocks.size()) < needed; ++b)
      if (disk_.word(kFreeListBlock, b) == "0") blocks.push_back(b);
    if (static_cast<Integer>(blocks.size()) < needed) throw Error("insufficient free blocks");

    for (std::size_t k = 0; k < blocks.size(); ++k) {
      disk_.clear_block(blocks[k]);
      for (Integer w = 0; w < kBlockSize; ++w) {
        const auto i = static_cast<std::size_t>(static_cast<Integer>(k) * kBlockSize + w);
        if (i >= words.size()) break;
        disk_.set_word(blocks[k], w, words[i]);
      }
      disk_.set_word(kFreeListBlock, blocks[k], "1");
    }

    Inode inode;
    inode.name = name;
    inode.type = type;
    inode.size = static_cast<Integer>(words.size());
    inode.blocks = blocks;
    write_inode(*slot, inode);
    return *slot;
  }

  void remove(const std::string& name) {
    const auto file = find(name);
    if (!file) throw Error("file '" + name + "' not found");
    if (file->inode.type == FileType::root) throw Error("cannot remove the root file");
    for (auto b : file->inode.blocks) {
      disk_.clear_block(b);
      disk_.set_word(kFreeListBlock, b, "0");
    }
    clear_inode(file->index);
  }

  [[nodiscard]] std::vector<Word> read_file(const std::string& name) const {
    const auto file = find(name);
    if (!file || file->inode.type == FileType::root) throw Error("file '" + name + "' not found");
    std::vector<Word> words;
    words.reserve(static_cast<std::size_t>(file->inode.size));
    for (Integer i = 0; i < file->inode.size; ++i) words.push_back(disk_.word(file->inode.blocks[static_cast<std::size_t>(i / kBlockSize)], i % kBlockSize));
    return words;
  }

  /// User files (the root file is omitted), in inode order.
  [[nodiscard]] std::vector<FileInfo> list() const {
    std::vector<FileInfo> files;
    for (Integer i = 1; i < kInodeCount; ++i) {
      auto inode = read_inode(i);
      if (!inode.name.empty()) files.push_back({i, std::move(inode)});
    }
    return files;
  }

  [[nodiscard]] std::string listing() const {
    std::string out = detail::pad("name", 13) + detail::pad("size", 6) + detail::pad("type", 6) +
                      detail::pad("user", 9) + "perm\n";
    for (const auto& f : list()) {
      out += detail::pad(f.inode.name, 13) + detail::pad(std::to_string(f.inode.size), 6) +
             detail::pad(std::string(file_type_name(f.inode.type)), 6) + detail::pad(f.inode.user, 9) + f.inode.perm +
             "\n";
    }
    return out;
  }

  [[nodiscard]] std::optional<FileInfo> find(const std::string& name) const {
    if (name.empty()) return std::nullopt;
    for (Integer i = 0; i < kInodeCount; ++i) {
      auto inode = read_inode(i);
      if (inode.name == name) return FileInfo{i, std::move(inode)};
    }
    return std::nullopt;
  }

  [[nodiscard]] Integer free_count() const {
    Integer n = 0;
    for (Integer b = 0; b < kBlockCount; ++b) n += disk_.word(kFreeListBlock, b) == "0" ? 1 : 0;
    return n;
  }

  /// Consistency audit. Returns one message per problem; empty means clean.
  [[nodiscard]] std::vector<std::string> fsck() const {
    std::vector<std::string> problems;
    std::set<Integer> owned;
    Integer used = 0;
    for (Integer b = 0; b < kBlockCount; ++b) {
      const auto& w = disk_.word(kFreeListBlock, b);
      if (w == "1") ++used;
      else if (w != "0") problems.push_back("free list entry " + std::to_string(b) + " is \"" + w + "\"");
      if (b < kReservedBlocks && w != "1") problems.push_back("reserved block " + std::to_string(b) + " marked free");
    }

    const auto root = read_inode_checked(0, problems);
    if (!root || root->name != "root" || root->type != FileType::root || root->blocks != std::vector<Integer>{kRootBlock})
      problems.push_back("inode 0 is not the root file");

    Integer file_blocks = 0;
    for (Integer i = 1; i < kInodeCount; ++i) {
      const auto inode = read_inode_checked(i, problems);
      if (!inode) continue;
      const auto label = "inode " + std::to_string(i);
      if (inode->name.empty()) {
        for (Integer w = 0; w < kInodeWords; ++w)
          if (!inode_word(i, w).empty()) {
            problems.push_back(label + " is unused but not blank");
            break;
          }
        for (Integer w = 0; w < kRootEntryWords; ++w)
          if (!disk_.word(kRootBlock, i * kRootEntryWords + w).empty()) {
            problems.push_back("root entry " + std::to_string(i) + " is set for an unused inode");
            break;
          }
        continue;
      }
      if (inode->type == FileType::root) problems.push_back(label + " has type root");
      if (inode->size < 0 || inode->size > kMaxFileWords) problems.push_back(label + " has bad size");
      const Integer expected = (inode->size + kBlockSize - 1) / kBlockSize;
      if (static_cast<Integer>(inode->blocks.size()) != expected)
        problems.push_back(label + " lists " + std::to_string(inode->blocks.size()) + " blocks for size " +
                           std::to_string(inode->size));
      for (auto b : inode->blocks) {
        if (b < kFirstUserBlock || b > kLastUserBlock) problems.push_back(label + " uses block " + std::to_string(b) + " outside the user area");
        else if (disk_.word(kFreeListBlock, b) != "1") problems.push_back(label + " uses free block " + std::to_string(b));
        if (!owned.insert(b).second) problems.push_back("block " + std::to_string(b) + " is shared");
      }
      file_blocks += static_cast<Integer>(inode->blocks.size());
      const auto entry = root_entry(i);
      if (entry != root_entry_for(i, *inode)) problems.push_back("root entry " + std::to_string(i) + " does not match its inode");
    }
    if (used != kReservedBlocks + file_blocks)
      problems.push_back("free list marks " + std::to_string(used) + " blocks used, expected " +
                         std::to_string(kReservedBlocks + file_blocks));
    return problems;
  }

 private:
  void write_code(Integer first_block, Integer block_count, const std::vector<std::string>& code) {
    for (Integer b = first_block; b < first_block + block_count; ++b) disk_.clear_block(b);
    for (std::size_t i = 0; i < code.size(); ++i) {
      const auto word = static_cast<Integer>(2 * i);
      disk_.set_word(first_block + word / kBlockSize, word % kBlockSize, code[i]);
    }
  }

  static std::vector<Word> exec_words(const std::vector<std::string>& lines) {
    if (static_cast<Integer>(lines.size()) < kExecHeaderWords) throw Error("bad header: fewer than 8 lines");
    if (lines[0] != kExecMagic) throw Error("bad header: magic is not XEXE");
    const auto entry = word_as_integer(lines[1]);
    if (!entry || *entry < kCodeStart || *entry >= kCodeEnd)
      throw Error("bad header: entry point must lie in the code pages " + std::to_string(kCodeStart) + ".." +
                  std::to_string(kCodeEnd - 1));
    const auto text_size = word_as_integer(lines[2]);
    for (Integer i = 3; i < kExecHeaderWords; ++i)
      if (lines[static_cast<std::size_t>(i)] != "0") throw Error("bad header: reserved words must be 0");
    const std::vector<std::string> body(lines.begin() + kExecHeaderWords, lines.end());
    const auto code = detail::assembly_lines(body);
    if (!text_size || *text_size != 2 * static_cast<Integer>(code.size()))
      throw Error("bad header: text size must be " + std::to_string(2 * code.size()) + " (two words per instruction)");
    if (*entry >= kCodeStart + *text_size && !code.empty())
      throw Error("bad header: entry point outside the text");
    std::vector<Word> words(lines.begin(), lines.begin() + kExecHeaderWords);
    for (const auto& instr : code) {
      words.push_back(instr);
      words.emplace_back();
    }
    return words;
  }

  static void check_name(const std::string& name) {
    if (name.empty()) throw Error("file name is empty");
    if (name.size() > kMaxNameLength) throw Error("file name '" + name + "' is longer than 12 characters");
    if (name.find_first_of(" \t\r\n") != std::string::npos) throw Error("file name contains whitespace");
  }

  [[nodiscard]] const Word& inode_word(Integer index, Integer w) const {
    const Integer offset = index * kInodeWords + w;
    return disk_.word(kInodeBlock + offset / kBlockSize, offset % kBlockSize);
  }
  void set_inode_word(Integer index, Integer w, Word value) {
    const Integer offset = index * kInodeWords + w;
    disk_.set_word(kInodeBlock + offset / kBlockSize, offset % kBlockSize, std::move(value));
  }

  [[nodiscard]] Inode read_inode(Integer index) const {
    std::vector<std::string> ignored;
    return read_inode_checked(index, ignored).value_or(Inode{});
  }

  std::optional<Inode> read_inode_checked(Integer index, std::vector<std::string>& problems) const {
    Inode inode;
    inode.name = inode_word(index, 0);
    if (inode.name.empty()) {
      inode.user.clear();
      inode.perm.clear();
      return inode;
    }
    const auto label = "inode " + std::to_string(index);
    const auto& type = inode_word(index, 1);
    if (type == "data") inode.type = FileType::data;
    else if (type == "exec") inode.type = FileType::exec;
    else if (type == "root") inode.type = FileType::root;
    else {
      problems.push_back(label + " has unknown type \"" + type + "\"");
      return std::nullopt;
    }
    const auto size = word_as_integer(inode_word(index, 2));
    if (!size) {
      problems.push_back(label + " has non-numeric size");
      return std::nullopt;
    }
    inode.size = *size;
    inode.user = inode_word(index, 3);
    inode.perm = inode_word(index, 4);
    if (inode.perm != "open" && inode.perm != "restricted") problems.push_back(label + " has bad permission");
    for (Integer k = 0; k < kMaxFileBlocks; ++k) {
      const auto& w = inode_word(index, 5 + k);
      if (w.empty()) continue;
      const auto b = word_as_integer(w);
      if (!b || *b < 0 || *b >= kBlockCount) {
        problems.push_back(label + " has bad block number \"" + w + "\"");
        return std::nullopt;
      }
      inode.blocks.push_back(*b);
    }
    return inode;
  }

  static std::vector<Word> root_entry_for(Integer index, const Inode& inode) {
    return {inode.name, std::to_string(inode.size), std::string(file_type_name(inode.type)), inode.user, inode.perm,
            std::to_string(index), "", ""};
  }

  [[nodiscard]] std::vector<Word> root_entry(Integer index) const {
    std::vector<Word> entry;
    for (Integer w = 0; w < kRootEntryWords; ++w) entry.push_back(disk_.word(kRootBlock, index * kRootEntryWords + w));
    return entry;
  }

  void write_inode(Integer index, const Inode& inode) {
    std::vector<Word> words(static_cast<std::size_t>(kInodeWords));
    words[0] = inode.name;
    words[1] = file_type_name(inode.type);
    words[2] = std::to_string(inode.size);
    words[3] = inode.user;
    words[4] = inode.perm;
    for (std::size_t k = 0; k < inode.blocks.size(); ++k) words[5 + k] = std::to_string(inode.blocks[k]);
    for (Integer w = 0; w < kInodeWords; ++w) set_inode_word(index, w, words[static_cast<std::size_t>(w)]);
    const auto entry = root_entry_for(index, inode);
    for (Integer w = 0; w < kRootEntryWords; ++w)
      disk_.set_word(kRootBlock, index * kRootEntryWords + w, entry[static_cast<std::size_t>(w)]);
  }

  void clear_inode(Integer index) {
    for (Integer w = 0; w < kInodeWords; ++w) set_inode_word(index, w, "");
    for (Integer w = 0; w < kRootEntryWords; ++w) disk_.set_word(kRootBlock, index * kRootEntryWords + w, "");
  }

  DiskImage& disk_;
};

// -- image-file wrappers used by the CLI --------------------------------------

inline void init_image(const std::filesystem::path& image) { FileSystem::format().save(image); }

inline std::vector<std::string> host_lines(const std::filesystem::path& path) { return detail::read_host_lines(path); }

inline void write_words(const std::filesystem::path& path, const std::vector<Word>& words) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& w : words) out << w << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace xsm::xfs
