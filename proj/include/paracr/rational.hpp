#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace paracr {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Arithmetic is carried out in 128-bit intermediates and reduced; a result
/// that does not fit back into 64 bits throws std::overflow_error instead of
/// silently wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t den() const { return den_; }

  [[nodiscard]] bool is_zero() const { return num_ == 0; }
  [[nodiscard]] bool is_one() const { return num_ == 1 && den_ == 1; }
  [[nodiscard]] bool is_integer() const { return den_ == 1; }
  [[nodiscard]] bool is_negative() const { return num_ < 0; }
  [[nodiscard]] double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "n" for integers and "n/d" otherwise.
  [[nodiscard]] std::string str() const;

  /// Parses a decimal literal such as "12", "0.25" or "3.5e-2" exactly.
  static Rational from_decimal(const std::string& text);

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;

  /// Integer power; negative exponents invert (throws on 0^-n).
  [[nodiscard]] Rational pow(int exponent) const;

 private:
  static Rational reduce(__int128 n, __int128 d);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace paracr
