#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ep/params.hpp"

namespace ep {

/// A named frequency-of-frequencies dataset.
struct Dataset {
  std::string name;
  FrequencyCounts counts;

  long n() const { return counts.n(); }
  long j() const { return counts.k(); }
  long singletons() const { return counts.multiplicity(1); }
};

/// The two Mastigamoeba balamuthi EST libraries used in the illustration.
/// The normalized library's zero entry at frequency 8 is encoded by absence.
inline Dataset builtin_dataset(const std::string& id) {
  if (id == "mastigamoeba-nn") {
    return Dataset{"mastigamoeba-nn",
                   FrequencyCounts({{1, 378},
                                    {2, 33},
                                    {3, 21},
                                    {4, 9},
                                    {5, 6},
                                    {6, 1},
                                    {7, 3},
                                    {8, 1},
                                    {9, 1},
                                    {10, 1},
                                    {13, 1},
                                    {15, 5}})};
  }
  if (id == "mastigamoeba-n") {
    return Dataset{"mastigamoeba-n",
                   FrequencyCounts({{1, 200},
                                    {2, 21},
                                    {3, 14},
                                    {4, 4},
                                    {5, 3},
                                    {6, 3},
                                    {7, 1},
                                    {9, 1},
                                    {14, 1}})};
  }
  throw std::runtime_error("unknown builtin dataset '" + id +
                           "' (available: mastigamoeba-nn, mastigamoeba-n)");
}

/// Parses a `frequency,count` CSV into a Dataset. Malformed rows, nonpositive
/// entries and empty partitions are distinct errors.
inline Dataset parse_dataset_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty file");
  // tolerate trailing CR from CRLF files
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frequency,count")
    throw std::runtime_error(name + ": expected header 'frequency,count', got '" + line + "'");
  FrequencyCounts fc;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    long freq = 0, count = 0;
    char comma = 0;
    if (!(row >> freq >> comma >> count) || comma != ',' || (row >> std::ws, !row.eof()))
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": malformed row '" + line +
                               "'");
    if (freq < 1 || count < 1)
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": entries must be positive integers");
    fc.add(freq, count);
  }
  if (fc.n() == 0) throw std::runtime_error(name + ": empty partition");
  return Dataset{name, fc};
}

/// Loads `builtin:<id>` or a CSV path.
inline Dataset parse_dataset(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return builtin_dataset(spec.substr(prefix.size()));
  std::ifstream in(spec);
  if (!in) throw std::runtime_error("cannot open dataset file '" + spec + "'");
  return parse_dataset_csv(in, spec);
}

}  // namespace ep
