#include "mservice/ussd.hpp"

#include "mservice/error.hpp"
#include "mservice/text.hpp"

namespace mservice {

UssdCode parse_ussd_code(std::string_view raw) {
  auto s = text::trim(raw);
  auto bad = [&](const char* why) { return Error(ErrorCode::MalformedCode, "'" + std::string(raw) + "': " + why); };
  if (s.size() < 2 || s.front() != '*') throw bad("must start with '*'");
  if (s.back() != '#') throw bad("must end with '#'");
  s = s.substr(1, s.size() - 2);

  std::vector<std::string> segments;
  std::size_t start = 0;
  for (;;) {
    auto star = s.find('*', start);
    auto seg = s.substr(start, star == std::string_view::npos ? std::string_view::npos : star - start);
    if (seg.empty()) throw bad("empty segment");
    if (!text::all_digits(seg)) throw bad("non-digit segment");
    segments.emplace_back(seg);
    if (star == std::string_view::npos) break;
    start = star + 1;
  }
  UssdCode code{segments.front(), {}};
  code.args.assign(segments.begin() + 1, segments.end());
  return code;
}

std::string render(const UssdCode& code) {
  std::string out = "*" + code.service;
  for (const auto& a : code.args) out += "*" + a;
  out += "#";
  return out;
}

}  // namespace mservice
