#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace merton::cli {

class OutputFile;

/// Output directory of one command. Every file opened through it starts with
/// a `# config: ...` line; write failures raise IoError naming the files
/// already completed.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string config_echo);

  OutputFile open(const std::string& name);
  const std::vector<std::string>& completed() const noexcept { return completed_; }
  const std::filesystem::path& path() const noexcept { return dir_; }

 private:
  friend class OutputFile;
  [[noreturn]] void fail(const std::string& name, const std::string& reason) const;

  std::filesystem::path dir_;
  std::string echo_;
  std::vector<std::string> completed_;
};

class OutputFile {
 public:
  OutputFile(OutputFile&&) noexcept = default;
  ~OutputFile();

  /// Writes one line (a newline is appended).
  void line(const std::string& text);
  /// Comma-joined fields.
  void row(const std::vector<std::string>& fields);
  /// Flushes, closes and records the file as completed.
  void finish();

 private:
  friend class OutputDir;
  OutputFile(OutputDir& owner, std::string name, std::filesystem::path path);
  void check();

  OutputDir* owner_;
  std::string name_;
  std::unique_ptr<std::ofstream> out_;
};

/// Splits a CSV line on commas (no quoting; the tool never writes quotes).
std::vector<std::string> split_csv(const std::string& line);

}  // namespace merton::cli
