#pragma once

#include <cstdint>
#include <filesystem>

#include "ripalm/numerics/dense.hpp"

namespace ripalm::qrot {

/// min_X  lambda/2 |X|_F^2 + <C, X>  s.t.  X 1 = alpha, X^T 1 = beta, X >= 0.
struct QrotInstance {
  Matrix cost;  // m x n, nonnegative
  Vector alpha;  // m, positive, sums to 1
  Vector beta;   // n, positive, sums to 1
  double lambda = 1.0;

  Index m() const { return cost.rows(); }
  Index n() const { return cost.cols(); }
};

/// Throws InputError when dimensions, signs, finiteness or mass (to 1e-12)
/// are off.
void validate(const QrotInstance& inst);

/// max(Z - sigma C, 0) / (1 + lambda sigma), entrywise.
Matrix prox_fq(const Matrix& z, double sigma, const QrotInstance& inst);

/// Gaussian-mixture point clouds in R^3: five isotropic components with
/// means -20, 10, 0, 10, 20 (on every axis) and variance 5, mixed with random
/// weights. Marginals are normalized uniform(0, 1) draws; the cost is the
/// squared distance matrix divided by its largest entry.
QrotInstance gaussian_mixture_instance(Index m, Index n, std::uint64_t seed, double lambda = 1.0);

/// Transport between two grayscale images on the same grid. Pixel (r, c)
/// sits at integer coordinates; cost is the squared Euclidean distance.
/// Pixels with zero intensity carry no mass and are left out of the support.
/// Throws ZeroMass if an image sums to zero, InputError on shape mismatch or
/// negative / non-finite pixels.
QrotInstance image_instance(const Matrix& image_a, const Matrix& image_b, double lambda = 1.0);

}  // namespace ripalm::qrot
