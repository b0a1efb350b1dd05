// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <Eigen/Dense>

namespace taf {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Field { Real, Complex };

std::string_view to_string(Field field);
Field parse_field(std::string_view text);

template <class Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, double>;

template <class Scalar>
inline constexpr Field field_of = is_complex_v<Scalar> ? Field::Complex : Field::Real;

/// Thrown when arguments violate a documented precondition (dimension or
/// field mismatch, empty input, out-of-range sizes).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Power iteration or Lanczos collapsed to the zero vector, or a screening
/// step left nothing to work with.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterate became non-finite or left the divergence guard radius.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field-tagged vector. Used for signals (length n) and for
/// measurement-domain vectors (length m); every algorithm checks that the
/// tags of its arguments agree before touching the data.
class SignalVector {
 public:
  using Storage = std::variant<Vec<double>, Vec<cplx>>;

  explicit SignalVector(Vec<double> entries);
  explicit SignalVector(Vec<cplx> entries);

  Field field() const { return entries_.index() == 0 ? Field::Real : Field::Complex; }
  Index size() const;
  double norm() const;

  template <class Scalar>
  const Vec<Scalar>& as() const {
    if (field() != field_of<Scalar>) {
      throw InvalidArgument("SignalVector: requested " + std::string(to_string(field_of<Scalar>)) +
                            " view of a " + std::string(to_string(field())) + " vector");
    }
    return std::get<Vec<Scalar>>(entries_);
  }

  const Storage& storage() const { return entries_; }

  /// Complex copy of the entries (a real vector is promoted).
  Vec<cplx> to_complex() const;

 private:
  Storage entries_;
};

void require_same_field(const SignalVector& a, const SignalVector& b, std::string_view where);

}  // namespace taf
