#pragma once

#include <algorithm>
#include <cmath>

#include "teig/vecmat.hpp"

namespace testutil {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

inline double rel_err(const teig::Vector& got, const teig::Vector& want) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    diff += (got[i] - want[i]) * (got[i] - want[i]);
    scale = std::max({scale, std::abs(got[i]), std::abs(want[i])});
  }
  return std::sqrt(diff) / scale;
}

inline double rel_err(const teig::SymMatrix& got, const teig::SymMatrix& want) {
  double diff = 0.0;
  for (int i = 0; i < got.dim(); ++i)
    for (int j = 0; j < got.dim(); ++j) diff += (got(i, j) - want(i, j)) * (got(i, j) - want(i, j));
  return std::sqrt(diff) / std::max({1.0, got.frobenius(), want.frobenius()});
}

}  // namespace testutil
