#pragma once

// Scalar type of the numeric core. The default build uses 32-bit floats;
// defining SQL2TEXT_DOUBLE switches a translation unit to 64-bit. The two
// variants live in distinct inline namespaces so both can be linked into one
// binary (the f64 build backs the gradient-check suites).

#if defined(SQL2TEXT_DOUBLE) && SQL2TEXT_DOUBLE
#define SQL2TEXT_NUMERIC_NS f64
#else
#define SQL2TEXT_NUMERIC_NS f32
#endif

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

#if defined(SQL2TEXT_DOUBLE) && SQL2TEXT_DOUBLE
using Real = double;
inline constexpr const char* kPrecisionName = "f64";
#else
using Real = float;
inline constexpr const char* kPrecisionName = "f32";
#endif

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
