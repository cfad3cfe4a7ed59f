#pragma once

// Numeric precision of the model stack. The float build is used for training
// and the CLI; the double build (E2ESLU_DOUBLE) exists so that finite-difference
// gradient checks can run the identical code path in 64-bit. Each build lives
// in its own inline namespace, so both can be linked into one binary.
#if defined(E2ESLU_DOUBLE)
#define E2ESLU_PRECISION_NS f64
#else
#define E2ESLU_PRECISION_NS f32
#endif

namespace e2eslu::inline E2ESLU_PRECISION_NS {

#if defined(E2ESLU_DOUBLE)
using Real = double;
#else
using Real = float;
#endif

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
