// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace taf {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  /// Directory holding demo_64x64_gray.pgm.
  std::filesystem::path data_dir;
  /// Criteria to run (1..10); empty runs all.
  std::set<int> only;
};

/// Runs the acceptance criteria in order. `on_result` (optional) sees each
/// result as soon as it is available. An exception inside a criterion is
/// reported as a failure of that criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "criterion <id> PASS|FAIL <name>: <detail> (<seconds> s)".
std::string format_result(const CriterionResult& result);

}  // namespace taf
