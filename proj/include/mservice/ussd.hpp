#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mservice {

/// A dialled USSD string: '*' service ('*' arg)* '#'.
struct UssdCode {
  std::string service;
  std::vector<std::string> args;

  bool operator==(const UssdCode&) const = default;
};

/// Surrounding whitespace is ignored. Throws Error(MalformedCode) for a
/// missing '*' or '#', a non-digit segment or an empty segment.
UssdCode parse_ussd_code(std::string_view raw);

/// Canonical text form.
std::string render(const UssdCode& code);

}  // namespace mservice
