// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>

#include "taf/types.hpp"

namespace taf::test {

inline Vec<double> rvec(std::initializer_list<double> v) {
  Vec<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vec<cplx> cvec(std::initializer_list<cplx> v) {
  Vec<cplx> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (cplx x : v) out[i++] = x;
  return out;
}

inline SignalVector rsig(std::initializer_list<double> v) { return SignalVector(rvec(v)); }

inline Mat<double> identity(Index n) { return Mat<double>::Identity(n, n); }

// Dense copy of any operator, built column by column from apply().
template <class S>
Mat<S> materialize(const auto& op) {
  Mat<S> rows(op.measurements(), op.dim());
  for (Index j = 0; j < op.dim(); ++j) {
    Vec<S> e = Vec<S>::Zero(op.dim());
    e[j] = S(1.0);
    rows.col(j) = op.apply(SignalVector(e)).template as<S>();
  }
  return rows;
}

}  // namespace taf::test
