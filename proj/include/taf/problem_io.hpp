// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "taf/model.hpp"

namespace taf {

/// Flat text export of one problem instance:
///
///   taf-problem 1
///   field real|complex
///   n <n>
///   m <m>
///   sigma <noise sigma>
///   seed <seed>
///   kind dense | kind cdp <K>
///   <m rows (dense) or K masks (cdp), one per line>
///   psi
///   <m amplitudes, one per line>
///
/// Complex entries are written as "re im". All reals use 17 significant
/// digits so that a read after write reproduces the doubles exactly.
void write_problem(std::ostream& out, const MeasurementSet& ms, std::uint64_t seed);
void write_problem(const std::filesystem::path& path, const MeasurementSet& ms, std::uint64_t seed);

struct LoadedProblem {
  MeasurementSet ms;
  std::uint64_t seed = 0;
};

/// Rebuilds operator and amplitudes (no ground truth). Throws InvalidArgument
/// on any malformed or inconsistent content.
LoadedProblem read_problem(std::istream& in);
LoadedProblem read_problem(const std::filesystem::path& path);

}  // namespace taf
