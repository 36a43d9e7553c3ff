#include "mtjsnn/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw InvalidInput("format_number: conversion failed");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string trace_csv(const Trace& trace) {
  std::string out = "time_ns";
  for (const auto& name : trace.signal_names) out += "," + name;
  out += '\n';
  for (std::size_t k = 0; k < trace.time.size(); ++k) {
    out += format_number(trace.time[k]);
    for (const auto& sig : trace.signals) {
      out += ',';
      out += format_number(sig[k]);
    }
    out += '\n';
  }
  return out;
}

std::string signal_csv(const Trace& trace, std::size_t signal_index) {
  std::string out = "time_ns," + trace.signal_names.at(signal_index) + "\n";
  const auto& sig = trace.signals.at(signal_index);
  for (std::size_t k = 0; k < trace.time.size(); ++k)
    out += format_number(trace.time[k]) + "," + format_number(sig[k]) + "\n";
  return out;
}

std::string spikes_text(const Trace& trace) {
  std::string out;
  for (const auto& [id, onsets] : trace.spike_onsets) {
    out += id + " " + std::to_string(onsets.size());
    for (double t : onsets) out += " " + format_number(t);
    out += '\n';
  }
  return out;
}

}  // namespace mtjsnn
