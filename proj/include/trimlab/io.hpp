#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace trimlab {

enum class Format { csv, json };
Format parse_format(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Opens `path`, hands the stream to `body`, and reports failures as
/// io_error with the path in the message.
void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body);

}  // namespace trimlab
