#ifndef AVOL_SHA256_HPP
#define AVOL_SHA256_HPP

#include <cstdint>
#include <string>

namespace avol {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

}  // namespace avol

#endif
