#pragma once

#include <cmath>
#include <string>

#include "dripper/error.hpp"

namespace dripper {

struct CostParams {
  double L = 28;    // attention layers
  double d = 1024;  // hidden size
  double N = 0;     // input tokens
  double M = 0;     // output tokens
};

/// Inference FLOPs: L*d*(N^2 + M*N + M^2) + L*d^2*(N + M).
inline double estimate_cost(const CostParams& p) {
  const auto bad = [](double v) { return !std::isfinite(v) || v < 0; };
  if (bad(p.L) || bad(p.d) || bad(p.N) || bad(p.M) || p.L == 0 || p.d == 0) {
    throw Error(ErrorCode::InvalidArgument, "cost parameters must be finite, L and d positive, N and M non-negative");
  }
  // Integral inputs below 2^53 are summed in long double so the documented
  // values come out exact.
  const long double L = p.L, d = p.d, N = p.N, M = p.M;
  return static_cast<double>(L * d * (N * N + M * N + M * M) + L * d * d * (N + M));
}

}  // namespace dripper
