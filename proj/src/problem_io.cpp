// SPDX-License-Identifier: Apache-2.0
#include "taf/problem_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace taf {

namespace {

void put(std::ostream& out, double v) { fmt::print(out, "{:.17g}", v); }

void put(std::ostream& out, cplx v) {
  put(out, v.real());
  out << ' ';
  put(out, v.imag());
}

template <class S>
void put_row(std::ostream& out, const S* data, Index count) {
  for (Index j = 0; j < count; ++j) {
    if (j) out << ' ';
    put(out, data[j]);
  }
  out << '\n';
}

std::string expect_key(std::istream& in, std::string_view key) {
  std::string token;
  if (!(in >> token) || token != key) {
    throw InvalidArgument(fmt::format("problem file: expected '{}', found '{}'", key, token));
  }
  std::string value;
  if (key != "psi" && !(in >> value)) {
    throw InvalidArgument(fmt::format("problem file: missing value for '{}'", key));
  }
  return value;
}

double read_real(std::istream& in) {
  double v = 0.0;
  if (!(in >> v)) throw InvalidArgument("problem file: truncated numeric data");
  return v;
}

template <class S>
S read_scalar(std::istream& in) {
  if constexpr (is_complex_v<S>) {
    const double re = read_real(in);
    return cplx(re, read_real(in));
  } else {
    return read_real(in);
  }
}

Index parse_positive(const std::string& text, std::string_view what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 1) {
    throw InvalidArgument(fmt::format("problem file: bad {} '{}'", what, text));
  }
  return static_cast<Index>(v);
}

}  // namespace

void write_problem(std::ostream& out, const MeasurementSet& ms, std::uint64_t seed) {
  out << "taf-problem 1\n";
  out << "field " << to_string(ms.field()) << '\n';
  out << "n " << ms.dim() << '\n';
  out << "m " << ms.measurements() << '\n';
  out << "sigma ";
  put(out, ms.noise_sigma);
  out << '\n' << "seed " << seed << '\n';
  ms.op.visit([&](const auto& op) {
    using Op = std::decay_t<decltype(op)>;
    if constexpr (std::is_same_v<Op, CdpOperator>) {
      out << "kind cdp " << op.masks() << '\n';
      for (const auto& mask : op.mask_entries()) put_row(out, mask.data(), mask.size());
    } else {
      out << "kind dense\n";
      const auto& a = op.matrix();
      for (Index i = 0; i < a.rows(); ++i) put_row(out, a.row(i).data(), a.cols());
    }
  });
  out << "psi\n";
  for (Index i = 0; i < ms.measurements(); ++i) {
    put(out, ms.psi[i]);
    out << '\n';
  }
  if (!out) throw InvalidArgument("write_problem: stream error");
}

void write_problem(const std::filesystem::path& path, const MeasurementSet& ms, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument(fmt::format("cannot write problem file {}", path.string()));
  write_problem(out, ms, seed);
}

LoadedProblem read_problem(std::istream& in) {
  if (expect_key(in, "taf-problem") != "1") throw InvalidArgument("problem file: unsupported version");
  const Field field = parse_field(expect_key(in, "field"));
  const Index n = parse_positive(expect_key(in, "n"), "n");
  const Index m = parse_positive(expect_key(in, "m"), "m");
  const double sigma = std::stod(expect_key(in, "sigma"));
  const std::uint64_t seed = std::stoull(expect_key(in, "seed"));
  const std::string kind = expect_key(in, "kind");

  auto op = [&]() -> SensingOperator {
    if (kind == "cdp") {
      std::string k_text;
      in >> k_text;
      const Index k = parse_positive(k_text, "mask count");
      if (field != Field::Complex) throw InvalidArgument("problem file: CDP requires the complex field");
      if (k * n != m) throw InvalidArgument("problem file: m must equal K*n for CDP");
      std::vector<Vec<cplx>> masks(static_cast<std::size_t>(k), Vec<cplx>(n));
      for (auto& mask : masks) {
        for (Index j = 0; j < n; ++j) mask[j] = read_scalar<cplx>(in);
      }
      return cdp_operator(std::move(masks));
    }
    if (kind != "dense") throw InvalidArgument("problem file: unknown kind '" + kind + "'");
    auto read_dense = [&]<class S>(S) {
      Mat<S> a(m, n);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) a(i, j) = read_scalar<S>(in);
      }
      return dense_operator(std::move(a));
    };
    return field == Field::Real ? read_dense(0.0) : read_dense(cplx{});
  }();

  expect_key(in, "psi");
  Vec<double> psi(m);
  for (Index i = 0; i < m; ++i) psi[i] = read_real(in);
  std::string trailing;
  if (in >> trailing) throw InvalidArgument("problem file: unexpected trailing data");

  LoadedProblem loaded{measurements_from_amplitudes(op, std::move(psi)), seed};
  loaded.ms.noise_sigma = sigma;
  return loaded;
}

LoadedProblem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("cannot open problem file {}", path.string()));
  return read_problem(in);
}

}  // namespace taf
