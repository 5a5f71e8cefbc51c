#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#ifndef BLOWUP_VERSION
#define BLOWUP_VERSION "0.0.0"
#endif

namespace blowup::cli {
namespace fs = std::filesystem;
namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw IoError("sha256: digest init failed");
  }
  void update(const char* p, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), p, n) != 1) throw IoError("sha256: update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw IoError("sha256: final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw IoError("read error on " + path);
  return h.hex();
}

void write_manifest(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != kManifestName)
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::ostringstream os;
  for (const auto& n : names) os << sha256_file((fs::path(dir) / n).string()) << "  " << n << '\n';
  std::ofstream out(fs::path(dir) / kManifestName, std::ios::binary);
  if (!(out << os.str())) throw IoError("cannot write manifest in " + dir);
}

ManifestCheck check_manifest(const std::string& dir) {
  ManifestCheck r;
  const fs::path mp = fs::path(dir) / kManifestName;
  if (!fs::exists(mp)) return r;
  r.present = true;
  std::ifstream in(mp);
  if (!in) throw IoError("cannot read " + mp.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.size() < 67 || line.compare(64, 2, "  ") != 0)
      throw IoError("malformed manifest line: " + line);
    const std::string digest = line.substr(0, 64), name = line.substr(66);
    const fs::path p = fs::path(dir) / name;
    if (!fs::exists(p))
      r.missing.push_back(name);
    else if (sha256_file(p.string()) != digest)
      r.mismatched.push_back(name);
  }
  return r;
}

std::string version_string() { return std::string("blowup ") + BLOWUP_VERSION; }

void write_version_stamp(const std::string& dir) {
  std::ofstream out(fs::path(dir) / kVersionName);
  if (!(out << version_string() << '\n')) throw IoError("cannot write version stamp in " + dir);
}

}  // namespace blowup::cli
