// io.hpp — CSV and JSON emission with deterministic formatting

#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsim/circuit.hpp"
#include "epsim/dynamics.hpp"
#include "epsim/spectral.hpp"

namespace epsim::io {

// Shortest round-trip decimal; identical input bits give identical text.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Readable label form for file indices and column headers.
inline std::string format_label(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Trace rows: t, C, overlap, norm0_sq, normd_sq. The C column is clamped to
// [0, 1] at reporting time; the other columns carry the raw values.
inline std::string trace_csv(const dynamics::CoherenceTrace& trace) {
  std::string s = "t,C,overlap,norm0_sq,normd_sq\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    s += format_double(trace.times[i]);
    s += ',';
    s += format_double(trace.coherence_clamped(i));
    s += ',';
    s += format_double(trace.overlap[i]);
    s += ',';
    s += format_double(trace.norm0_sq[i]);
    s += ',';
    s += format_double(trace.normd_sq[i]);
    s += '\n';
  }
  return s;
}

// Long-format map rows: hx, hy, chi, degenerate.
inline std::string map_csv(const spectral::SusceptibilityMap& map) {
  std::string s = "hx,hy,chi,degenerate\n";
  for (std::size_t i = 0; i < map.hx_axis.size(); ++i)
    for (std::size_t j = 0; j < map.hy_axis.size(); ++j) {
      s += format_double(map.hx_axis[i]);
      s += ',';
      s += format_double(map.hy_axis[j]);
      s += ',';
      s += format_double(map.chi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      s += ',';
      s += map.degenerate(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ? '1' : '0';
      s += '\n';
    }
  return s;
}

inline nlohmann::ordered_json trajectory_stats_json(const circuit::TrajectoryStats& st) {
  nlohmann::ordered_json j;
  j["shots_requested"] = st.shots_requested;
  j["shots_accepted"] = st.shots_accepted;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < st.outcome_counts.size(); ++k) {
    // key is the system bit pattern, lowest qubit last (binary reading)
    std::string key;
    std::size_t bits = st.outcome_counts.size() >> 1;
    for (; bits; bits >>= 1) key += (k & bits) ? '1' : '0';
    counts[key] = st.outcome_counts[k];
  }
  j["outcome_counts"] = counts;
  j["seed"] = st.seed;
  return j;
}

}  // namespace epsim::io
