#include "merton/cli/csv.hpp"

#include <sstream>

#include "merton/errors.hpp"

namespace merton::cli {

OutputDir::OutputDir(std::filesystem::path dir, std::string config_echo)
    : dir_(std::move(dir)), echo_(std::move(config_echo)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

OutputFile OutputDir::open(const std::string& name) {
  OutputFile file(*this, name, dir_ / name);
  file.line("# config: " + echo_);
  return file;
}

void OutputDir::fail(const std::string& name, const std::string& reason) const {
  std::string done;
  for (const auto& f : completed_) done += (done.empty() ? "" : ", ") + f;
  throw IoError("failed writing " + (dir_ / name).string() + " (" + reason +
                "); completed files: " + (done.empty() ? "none" : done));
}

OutputFile::OutputFile(OutputDir& owner, std::string name, std::filesystem::path path)
    : owner_(&owner), name_(std::move(name)),
      out_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc)) {
  if (!*out_) owner_->fail(name_, "cannot open");
}

OutputFile::~OutputFile() = default;

void OutputFile::check() {
  if (!*out_) owner_->fail(name_, "write error");
}

void OutputFile::line(const std::string& text) {
  *out_ << text << '\n';
  check();
}

void OutputFile::row(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) s += ',';
    s += fields[i];
  }
  line(s);
}

void OutputFile::finish() {
  out_->flush();
  check();
  out_->close();
  if (out_->fail()) owner_->fail(name_, "close failed");
  owner_->completed_.push_back(name_);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace merton::cli
