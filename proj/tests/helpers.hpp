#pragma once

#include "nestband/cholcore.hpp"
#include "nestband/rng.hpp"

#include <cmath>

namespace nbtest {

using nestband::Index;
using nestband::Matrix;
using nestband::Vector;

inline Matrix random_matrix(nestband::Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// Well conditioned: A A' / p + I.
inline Matrix random_spd(nestband::Rng& rng, Index p) {
  Matrix a = random_matrix(rng, p, p);
  return a * a.transpose() / static_cast<double>(p) + Matrix::Identity(p, p);
}

inline nestband::CholeskyFactors random_factors(nestband::Rng& rng, Index p, double scale = 0.4) {
  Matrix phi = Matrix::Zero(p, p);
  Vector d(p);
  for (Index j = 0; j < p; ++j) {
    for (Index t = 0; t < j; ++t) phi(j, t) = scale * rng.normal();
    d(j) = 0.2 + rng.uniform();
  }
  return nestband::CholeskyFactors(phi, d);
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline nestband::Dataset centered(const Matrix& values) {
  return nestband::center(nestband::make_dataset(values));
}

}  // namespace nbtest
