#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cdgen/engine.hpp"

namespace cdgen::cli {

inline constexpr int kOk = 0;
inline constexpr int kDomainFailure = 1;
inline constexpr int kUsageError = 2;

// Runs one command; data goes to out, diagnostics to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// seq<TAB>level<TAB>proof term<TAB>MGT, as written by enumerate.
std::string print_entries(const std::vector<Entry>& entries);
std::vector<Entry> parse_entries(std::string_view text);

}  // namespace cdgen::cli
