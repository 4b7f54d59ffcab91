#pragma once

#include <Eigen/Core>

namespace ripalm {

// Dense storage is Eigen's default column-major order: entry (i, j) of an
// m-by-n matrix lives at offset i + j * m, matching vec(X).
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

inline bool all_finite(const Eigen::Ref<const Matrix>& a) { return a.allFinite(); }

}  // namespace ripalm
