#pragma once

#include <cstdint>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace mhc {

/// Exact rational backed by GMP; expression templates off so it behaves as
/// a plain value type inside Eigen matrices.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// Exact conversion: every finite double is a dyadic rational.
inline Rational to_rational(double v) { return Rational(v); }
inline Rational to_rational(std::int64_t v) { return Rational(v); }

}  // namespace mhc
