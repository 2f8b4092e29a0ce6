#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cstdlib>
#include <string>

namespace dopasym {

using Real = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<0>,
    boost::multiprecision::et_off>;

inline constexpr int kDefaultPrecisionBits = 256;

// DOPASYM_PRECISION_BITS overrides the built-in default.
inline int default_precision_bits() {
  if (const char* env = std::getenv("DOPASYM_PRECISION_BITS")) {
    try {
      int v = std::stoi(env);
      if (v >= 64) return v;
    } catch (...) {
    }
  }
  return kDefaultPrecisionBits;
}

inline unsigned bits_to_digits10(int bits) {
  return static_cast<unsigned>(bits * 0.30102999566398120) + 1;
}

// Sets the working precision for newly created Real values until destroyed.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits) : saved_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

inline Real pi_hp() { return boost::math::constants::pi<Real>(); }

// Minimal complex number over Real; std::complex is unspecified for class types.
struct ComplexHP {
  Real re{0};
  Real im{0};

  ComplexHP() = default;
  ComplexHP(Real r, Real i = Real(0)) : re(std::move(r)), im(std::move(i)) {}

  ComplexHP& operator+=(const ComplexHP& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexHP& operator-=(const ComplexHP& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend ComplexHP operator+(ComplexHP a, const ComplexHP& b) { return a += b; }
  friend ComplexHP operator-(ComplexHP a, const ComplexHP& b) { return a -= b; }
  friend ComplexHP operator*(const ComplexHP& a, const ComplexHP& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexHP operator*(const ComplexHP& a, const Real& s) { return {a.re * s, a.im * s}; }
};

std::string to_string_digits(const Real& x, int digits);

}  // namespace dopasym
