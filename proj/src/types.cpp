// SPDX-License-Identifier: Apache-2.0
#include "taf/types.hpp"

#include <string>

namespace taf {

std::string_view to_string(Field field) { return field == Field::Real ? "real" : "complex"; }

Field parse_field(std::string_view text) {
  if (text == "real") return Field::Real;
  if (text == "complex") return Field::Complex;
  throw InvalidArgument("unknown field '" + std::string(text) + "' (expected real|complex)");
}

namespace {

template <class S>
void check_entries(const Vec<S>& v) {
  if (v.size() < 1) throw InvalidArgument("SignalVector: dimension must be >= 1");
  if (!v.allFinite()) throw InvalidArgument("SignalVector: entries must be finite");
}

}  // namespace

SignalVector::SignalVector(Vec<double> entries) : entries_(std::move(entries)) {
  check_entries(std::get<0>(entries_));
}

SignalVector::SignalVector(Vec<cplx> entries) : entries_(std::move(entries)) {
  check_entries(std::get<1>(entries_));
}

Index SignalVector::size() const {
  return std::visit([](const auto& v) { return v.size(); }, entries_);
}

double SignalVector::norm() const {
  return std::visit([](const auto& v) { return v.norm(); }, entries_);
}

Vec<cplx> SignalVector::to_complex() const {
  return std::visit([](const auto& v) -> Vec<cplx> { return v.template cast<cplx>(); }, entries_);
}

void require_same_field(const SignalVector& a, const SignalVector& b, std::string_view where) {
  if (a.field() != b.field()) {
    throw InvalidArgument(std::string(where) + ": mixed-field operands (" +
                          std::string(to_string(a.field())) + " vs " +
                          std::string(to_string(b.field())) + ")");
  }
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(where) + ": dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace taf
