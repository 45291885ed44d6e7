#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cabs/abstraction.hpp"

namespace causabs {

struct ReportRow {
  std::string quantity;
  std::string expected;
  std::string actual;
  std::string tolerance;
  bool pass = false;
};

struct PaperReport {
  double lambda = kDefaultLambda;
  std::vector<ReportRow> rows;

  bool all_pass() const;
};

// Directory of the bundled worked-example fixtures.
std::filesystem::path default_fixture_dir();

// Recomputes every worked-example quantity from the fixtures in `dir` and
// compares it with its reference value. A fixture that fails to load yields
// failing rows rather than an exception.
PaperReport paper_report(const std::filesystem::path& dir, double lambda = kDefaultLambda);

}  // namespace causabs
