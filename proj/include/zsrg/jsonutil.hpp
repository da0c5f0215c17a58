#ifndef ZSRG_JSONUTIL_HPP
#define ZSRG_JSONUTIL_HPP

#include <string>

#include "zsrg/types.hpp"

namespace zsrg {

// Whole-file helpers; both throw Error(kIo) with the path in the message.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Fixed-precision decimal used everywhere a report number is printed, so
// emitted artifacts are byte-stable.
std::string format_rate(double value);

}  // namespace zsrg

#endif  // ZSRG_JSONUTIL_HPP
