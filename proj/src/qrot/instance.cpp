#include "ripalm/qrot/instance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ripalm/error.hpp"

namespace ripalm::qrot {

namespace {

void check_marginal(const Vector& mass, const char* name) {
  if (!mass.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
  if (!(mass.minCoeff() > 0.0)) throw InputError(std::string(name) + " must be strictly positive");
  const double total = mass.sum();
  if (!(std::abs(total - 1.0) <= 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << name << " must sum to 1 (sum = " << total << ")";
    throw InputError(msg.str());
  }
}

}  // namespace

void validate(const QrotInstance& inst) {
  if (inst.m() < 1 || inst.n() < 1) throw InputError("cost matrix is empty");
  if (inst.alpha.size() != inst.m() || inst.beta.size() != inst.n()) {
    std::ostringstream msg;
    msg << "marginal sizes (" << inst.alpha.size() << ", " << inst.beta.size()
        << ") do not match cost " << inst.m() << "x" << inst.n();
    throw InputError(msg.str());
  }
  if (!inst.cost.allFinite()) throw InputError("cost has non-finite entries");
  if (inst.cost.minCoeff() < 0.0) throw InputError("cost must be nonnegative");
  if (!(inst.lambda >= 0.0) || !std::isfinite(inst.lambda)) {
    throw InputError("lambda must be finite and nonnegative");
  }
  check_marginal(inst.alpha, "alpha");
  check_marginal(inst.beta, "beta");
}

Matrix prox_fq(const Matrix& z, double sigma, const QrotInstance& inst) {
  return (z - sigma * inst.cost).cwiseMax(0.0) / (1.0 + inst.lambda * sigma);
}

namespace {

using Point = std::array<double, 3>;

std::vector<Point> mixture_points(Index count, std::mt19937_64& rng) {
  static constexpr std::array<double, 5> kMeans = {-20.0, 10.0, 0.0, 10.0, 20.0};
  static constexpr double kVariance = 5.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 5> weights{};
  for (double& w : weights) w = unit(rng);
  std::discrete_distribution<int> component(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, std::sqrt(kVariance));
  std::vector<Point> points(static_cast<std::size_t>(count));
  for (Point& p : points) {
    const double mean = kMeans[static_cast<std::size_t>(component(rng))];
    for (double& coord : p) coord = mean + normal(rng);
  }
  return points;
}

Vector random_marginal(Index count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector mass(count);
  for (Index i = 0; i < count; ++i) {
    // uniform_real_distribution may return exactly 0; keep the support full.
    double draw = unit(rng);
    while (draw == 0.0) draw = unit(rng);
    mass[i] = draw;
  }
  mass /= mass.sum();
  return mass;
}

}  // namespace

QrotInstance gaussian_mixture_instance(Index m, Index n, std::uint64_t seed, double lambda) {
  if (m < 1 || n < 1) throw InputError("gaussian mixture instance needs m, n >= 1");
  std::mt19937_64 rng(seed);
  QrotInstance inst;
  inst.lambda = lambda;
  inst.alpha = random_marginal(m, rng);
  inst.beta = random_marginal(n, rng);
  const std::vector<Point> source = mixture_points(m, rng);
  const std::vector<Point> target = mixture_points(n, rng);
  inst.cost.resize(m, n);
  for (Index j = 0; j < n; ++j) {
    const Point& q = target[static_cast<std::size_t>(j)];
    for (Index i = 0; i < m; ++i) {
      const Point& p = source[static_cast<std::size_t>(i)];
      const double dx = p[0] - q[0];
      const double dy = p[1] - q[1];
      const double dz = p[2] - q[2];
      inst.cost(i, j) = dx * dx + dy * dy + dz * dz;
    }
  }
  const double largest = inst.cost.maxCoeff();
  if (largest > 0.0) inst.cost /= largest;
  return inst;
}

namespace {

struct Pixel {
  double row;
  double col;
  double mass;
};

std::vector<Pixel> support_of(const Matrix& image, const char* name) {
  if (!image.allFinite()) throw InputError(std::string(name) + " has non-finite pixels");
  if (image.size() > 0 && image.minCoeff() < 0.0) {
    throw InputError(std::string(name) + " has negative pixels");
  }
  const double total = image.sum();
  if (!(total > 0.0)) throw ZeroMass(std::string(name) + " has zero total mass");
  std::vector<Pixel> pixels;
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      if (image(r, c) > 0.0) {
        pixels.push_back({static_cast<double>(r), static_cast<double>(c), image(r, c) / total});
      }
    }
  }
  return pixels;
}

}  // namespace

QrotInstance image_instance(const Matrix& image_a, const Matrix& image_b, double lambda) {
  if (image_a.rows() != image_b.rows() || image_a.cols() != image_b.cols()) {
    throw InputError("images must share the same resolution");
  }
  const std::vector<Pixel> src = support_of(image_a, "first image");
  const std::vector<Pixel> dst = support_of(image_b, "second image");
  QrotInstance inst;
  inst.lambda = lambda;
  const auto m = static_cast<Index>(src.size());
  const auto n = static_cast<Index>(dst.size());
  inst.alpha.resize(m);
  inst.beta.resize(n);
  for (Index i = 0; i < m; ++i) inst.alpha[i] = src[static_cast<std::size_t>(i)].mass;
  for (Index j = 0; j < n; ++j) inst.beta[j] = dst[static_cast<std::size_t>(j)].mass;
  inst.cost.resize(m, n);
  for (Index j = 0; j < n; ++j) {
    const Pixel& q = dst[static_cast<std::size_t>(j)];
    for (Index i = 0; i < m; ++i) {
      const Pixel& p = src[static_cast<std::size_t>(i)];
      const double dr = p.row - q.row;
      const double dc = p.col - q.col;
      inst.cost(i, j) = dr * dr + dc * dc;
    }
  }
  return inst;
}

}  // namespace ripalm::qrot
