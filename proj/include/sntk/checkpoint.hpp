#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sntk/rnn.hpp"

namespace sntk {

/// Text checkpoint:
///
///   rnn N=<N> readout=<i>,<j>
///   <N lines of N floats: rows of W>
///   <one line of N floats: b>
///
/// Floats use the shortest representation that round-trips exactly.
void write_checkpoint(std::ostream& os, const RnnModel& model);
RnnModel read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const RnnModel& model);
RnnModel load_checkpoint(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_shortest(double value);

/// Fixed 17-significant-digit form used in CSV output.
std::string format_17g(double value);

}  // namespace sntk
