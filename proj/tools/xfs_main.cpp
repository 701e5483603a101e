#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xsm/xfs.hpp"

namespace {

using xsm::xfs::FileSystem;

struct ImageSession {
  explicit ImageSession(const std::string& path) : path(path), disk(xsm::DiskImage::load(path)), fs(disk) {}
  void save() const { disk.save(path); }

  std::string path;
  xsm::DiskImage disk;
  FileSystem fs;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XFS interface: move files between the host and the XSM disk image", "xfs"};
  app.require_subcommand(1);

  std::string image, file, name, out, handler;
  bool boot = false, exec = false, data = false;

  auto* init = app.add_subcommand("init", "format a new disk image");
  init->add_option("image", image)->required();

  auto* load = app.add_subcommand("load", "copy a host file onto the disk");
  auto* kind = load->add_option_group("kind");
  kind->add_flag("--boot", boot, "boot code into block 0");
  kind->add_option("--handler", handler, "OS component: exception, timer, disk, console, int4..int18, os");
  kind->add_flag("--exec", exec, "executable with XEXE header");
  kind->add_flag("--data", data, "data file, one word per line");
  kind->require_option(1);
  load->add_option("image", image)->required();
  load->add_option("file", file)->required();
  load->add_option("--name", name, "file name on disk (default: host base name)");

  auto* rm = app.add_subcommand("rm", "remove a file");
  rm->add_option("image", image)->required();
  rm->add_option("name", name)->required();

  auto* ls = app.add_subcommand("ls", "list files");
  ls->add_option("image", image)->required();

  auto* cat = app.add_subcommand("cat", "print a file, one word per line");
  cat->add_option("image", image)->required();
  cat->add_option("name", name)->required();

  auto* exp = app.add_subcommand("export", "copy a file to the host");
  exp->add_option("image", image)->required();
  exp->add_option("name", name)->required();
  exp->add_option("out", out)->required();

  auto* fsck = app.add_subcommand("fsck", "check file-system consistency");
  fsck->add_option("image", image)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (init->parsed()) {
      xsm::xfs::init_image(image);
      return 0;
    }
    ImageSession session(image);
    if (load->parsed()) {
      const auto lines = xsm::xfs::host_lines(file);
      if (boot) {
        const auto n = session.fs.load_boot(lines);
        std::cout << "boot: " << n << " instructions written to block 0\n";
      } else if (!handler.empty()) {
        std::cout << session.fs.load_handler(handler, lines) << '\n';
      } else {
        if (name.empty()) name = std::filesystem::path(file).filename().string();
        const auto type = exec ? xsm::xfs::FileType::exec : xsm::xfs::FileType::data;
        const auto index = session.fs.load_file(lines, type, name);
        const auto info = session.fs.find(name);
        std::cout << name << ": " << info->inode.size << " words in " << info->inode.blocks.size()
                  << " blocks, inode " << index << '\n';
      }
      session.save();
    } else if (rm->parsed()) {
      session.fs.remove(name);
      session.save();
    } else if (ls->parsed()) {
      std::cout << session.fs.listing();
    } else if (cat->parsed()) {
      for (const auto& w : session.fs.read_file(name)) std::cout << w << '\n';
    } else if (exp->parsed()) {
      xsm::xfs::write_words(out, session.fs.read_file(name));
    } else if (fsck->parsed()) {
      const auto problems = session.fs.fsck();
      if (problems.empty()) {
        std::cout << "clean: " << session.fs.list().size() << " files, " << session.fs.free_count()
                  << " free blocks\n";
        return 0;
      }
      for (const auto& p : problems) std::cout << p << '\n';
      return 1;
    }
  } catch (const xsm::Error& e) {
    std::cerr << "xfs: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
