#pragma once

// Dual numeric backend: exact GMP rationals or binary64.
//
// Every map in this library is written once against the `Scalar` concept and
// instantiated for both backends. Orbits of the canonical map never grow
// denominators (F and G are integer shears followed by mod-2 reduction), so the
// rational backend stays cheap along arbitrarily long orbits.

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ltm {

using Rational = mpq_class;
using BigInt = mpz_class;

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

enum class Backend { Float, Rational };

template <Scalar T>
constexpr Backend backend_of() {
  if constexpr (std::same_as<T, double>) return Backend::Float;
  else return Backend::Rational;
}

inline std::string_view backend_name(Backend b) {
  return b == Backend::Float ? "float" : "rational";
}

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }

/// floor(v), returned as a scalar of the same backend.
inline double floor_of(double v) { return std::floor(v); }
inline Rational floor_of(const Rational& v) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return Rational(q);
}

inline double ceil_of(double v) { return std::ceil(v); }
inline Rational ceil_of(const Rational& v) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return Rational(q);
}

/// Integer value of an already-integral scalar; throws if it does not fit.
inline std::int64_t to_int64(double v) {
  if (!(std::abs(v) < 9.0e18)) throw std::overflow_error("scalar does not fit in int64");
  return static_cast<std::int64_t>(v);
}
inline std::int64_t to_int64(const Rational& v) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  if (!q.fits_slong_p()) throw std::overflow_error("scalar does not fit in int64");
  return q.get_si();
}

template <Scalar T>
T from_ratio(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if constexpr (std::same_as<T, double>) {
    return static_cast<double>(num) / static_cast<double>(den);
  } else {
    Rational r(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
    r.canonicalize();
    return r;
  }
}

template <Scalar T>
T from_double(double v) {
  if constexpr (std::same_as<T, double>) return v;
  else return Rational(v);  // exact binary expansion
}

inline double abs_of(double v) { return std::abs(v); }
inline Rational abs_of(const Rational& v) { return abs(v); }

/// Decimal text for floats (round-trip precision), "num/den" for rationals
/// ("num" when the denominator is 1).
inline std::string to_string(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}
inline std::string to_string(const Rational& v) {
  if (v.get_den() == 1) return v.get_num().get_str();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

/// Accepts "a/b", integers and decimal literals ("0.125" is read exactly for
/// the rational backend).
template <Scalar T>
T parse_scalar(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty scalar");
  if constexpr (std::same_as<T, double>) {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    }
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad scalar: " + s);
    return v;
  } else {
    if (s.find('/') != std::string::npos) {
      Rational r;
      if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
      r.canonicalize();
      return r;
    }
    bool negative = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      pos = 1;
    }
    std::string digits;
    std::int64_t scale = 0;
    bool seen_dot = false;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_dot) ++scale;
      } else {
        throw std::invalid_argument("bad rational: " + s);
      }
    }
    if (digits.empty()) throw std::invalid_argument("bad rational: " + s);
    BigInt num(digits, 10);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(scale));
    Rational r(negative ? BigInt(-num) : num, den);
    r.canonicalize();
    return r;
  }
}

}  // namespace ltm
