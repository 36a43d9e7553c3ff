#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mtjsnn/network.hpp"

namespace mtjsnn {

// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// time_ns,<signal>,... with one row per grid point.
std::string trace_csv(const Trace& trace);
std::string signal_csv(const Trace& trace, std::size_t signal_index);

// One line per node: "<id> <count> <onset> <onset> ...", sorted by id.
std::string spikes_text(const Trace& trace);

}  // namespace mtjsnn
