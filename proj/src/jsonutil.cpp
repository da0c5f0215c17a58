#include "zsrg/jsonutil.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace zsrg {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  }
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIo, "failed reading '" + path + "'");
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  }
  out << contents;
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
  }
}

std::string format_rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace zsrg
