#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mservice::text {

/// Number of UTF-8 code points. Stray continuation/invalid bytes count as one
/// character each.
std::size_t length(std::string_view s) noexcept;

/// Splits into at most `max_chars` code points per piece without breaking a
/// UTF-8 sequence.
std::vector<std::string> split(std::string_view s, std::size_t max_chars);

/// First `max_chars` code points.
std::string take(std::string_view s, std::size_t max_chars);

std::string_view trim(std::string_view s) noexcept;
std::string upper_ascii(std::string_view s);
bool all_digits(std::string_view s) noexcept;

/// Decodes to code points; invalid bytes map to U+FFFD.
std::u32string decode(std::string_view s);

}  // namespace mservice::text
