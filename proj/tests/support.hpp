#pragma once

#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef AIRYLINE_FIXTURE_DIR
#error "AIRYLINE_FIXTURE_DIR must be defined"
#endif

namespace testing {

inline std::string fixture(const std::string& name) {
  return std::string(AIRYLINE_FIXTURE_DIR) + "/" + name;
}

// Numeric CSV with a header row.
inline std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double rel_err(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace testing
