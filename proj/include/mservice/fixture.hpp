#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "mservice/http_types.hpp"
#include "mservice/service.hpp"

namespace mservice {

struct EntityCount {
  std::size_t total = 0;    // rows the fixture describes
  std::size_t created = 0;  // rows that did not exist before
  std::size_t updated = 0;  // rows that existed and were changed
};

/// Keyed by section name, in fixture order.
using SeedSummary = std::map<std::string, EntityCount>;

/// Section names in the order they are applied.
inline constexpr std::string_view kFixtureSections[] = {"user_groups", "users",   "categories", "content",
                                                        "sponsors",    "ads",     "subscribers"};

/// Parses fixture text. Throws Error(FixtureInvalid) carrying "line L,
/// column C" for syntax errors.
Json parse_fixture(std::string_view text);
Json load_fixture(const std::filesystem::path& path);

/// Upserts every section by natural key inside one transaction, so a
/// failure leaves the store untouched. Throws Error(FixtureInvalid) naming
/// the offending field path, e.g. "categories[3].parent".
SeedSummary apply_fixture(Service& service, const Json& fixture);

std::string format_summary(const SeedSummary& summary);

}  // namespace mservice
