// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional arguments: --threads N, --seed S, --only 1,7,9.
#include <cstdint>
#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <string>

#include "taf/acceptance.hpp"

#ifndef TAF_DATA_DIR
#error "TAF_DATA_DIR must point at the fixture directory"
#endif

int main(int argc, char** argv) {
  taf::AcceptanceOptions options;
  options.data_dir = TAF_DATA_DIR;
  if (const char* env = std::getenv("AF_THREADS")) options.threads = std::max(1, std::atoi(env));
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::string value = argv[i + 1];
    if (flag == "--threads") {
      options.threads = std::max(1, std::stoi(value));
    } else if (flag == "--seed") {
      options.seed = std::stoull(value);
    } else if (flag == "--only") {
      for (std::size_t pos = 0; pos < value.size();) {
        const auto next = value.find(',', pos);
        options.only.insert(std::stoi(value.substr(pos, next - pos)));
        pos = next == std::string::npos ? value.size() : next + 1;
      }
    } else {
      std::fprintf(stderr, "unknown argument %s\n", flag.c_str());
      return 2;
    }
  }

  int failed = 0;
  taf::run_acceptance(options, [&](const taf::CriterionResult& r) {
    std::printf("%s\n", taf::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  });
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
