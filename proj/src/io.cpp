#include "trimlab/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <string>

#include "trimlab/error.hpp"

namespace trimlab {

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  throw Error(Errc::invalid_argument, "unknown format '" + std::string(text) + "'");
}

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

}  // namespace trimlab
