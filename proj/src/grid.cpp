#include "nlslab/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace nlslab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// periodic minimum-image displacement of x relative to x0 on [-L/2, L/2)
inline double min_image(double x, double x0, double L) {
  double d = x - x0;
  d -= L * std::round(d / L);
  return d;
}

}  // namespace

Grid make_grid(int n, double length) {
  require(is_power_of_two(n) && n >= 16, ErrorCode::NonPowerOfTwo,
          "grid size must be a power of two >= 16, got " + std::to_string(n));
  require(length > 0.0 && std::isfinite(length), ErrorCode::InvalidArgument,
          "grid length must be positive and finite");
  Grid g;
  g.n = n;
  g.length = length;
  g.dx = length / n;
  g.x.resize(n);
  g.xi.resize(n);
  const double dxi = kTwoPi / length;
  for (int j = 0; j < n; ++j) {
    g.x[j] = -0.5 * length + g.dx * j;
    int m = (j < n / 2) ? j : j - n;
    g.xi[j] = dxi * m;
  }
  return g;
}

Field gaussian_probe(const Grid& g, const ProbeSpec& spec) {
  require(spec.sigma > 0.0 && std::isfinite(spec.sigma), ErrorCode::InvalidArgument,
          "probe width must be positive");
  require(std::isfinite(spec.x0) && std::isfinite(spec.eps), ErrorCode::InvalidArgument,
          "probe center/amplitude must be finite");
  require(spec.sigma <= g.length / 10.0, ErrorCode::TruncationRisk,
          "probe width " + std::to_string(spec.sigma) + " exceeds L/10 on L = " +
              std::to_string(g.length));
  Field u(g.n);
  const double inv4s2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
  for (int j = 0; j < g.n; ++j) {
    double d = min_image(g.x[j], spec.x0, g.length);
    u[j] = Complex(spec.eps * std::exp(-d * d * inv4s2), 0.0);
  }
  return u;
}

Field gaussian_free_evolution(const Grid& g, const ProbeSpec& spec, double t) {
  const double s2 = spec.sigma * spec.sigma;
  const Complex denom(s2, t);                       // sigma^2 + i t
  const Complex amp = spec.eps * std::sqrt(s2 / denom);  // principal branch
  Field u(g.n);
  for (int j = 0; j < g.n; ++j) {
    double d = min_image(g.x[j], spec.x0, g.length);
    u[j] = amp * std::exp(-d * d / (4.0 * denom));
  }
  return u;
}

struct SpectralOps::Impl {
  mutable Eigen::FFT<double> fft;
  mutable Eigen::VectorXcd a, b;  // scratch
};

SpectralOps::SpectralOps(const Grid& g) : grid_(g), impl_(new Impl) {
  require(g.n >= 16, ErrorCode::InvalidArgument, "uninitialized grid");
  impl_->a.resize(g.n);
  impl_->b.resize(g.n);
}

SpectralOps::~SpectralOps() = default;

void SpectralOps::fwd_raw(const Field& u, Field& out) const {
  impl_->a = u.matrix();
  impl_->fft.fwd(impl_->b, impl_->a);
  out = impl_->b.array();
}

void SpectralOps::inv_raw(const Field& spec, Field& out) const {
  impl_->a = spec.matrix();
  impl_->fft.inv(impl_->b, impl_->a);
  out = impl_->b.array();
}

Field SpectralOps::spectrum(const Field& u) const {
  // hat(xi_m) = (2pi)^{-1/2} dx sum_j u_j e^{-i xi_m x_j}
  //           = (2pi)^{-1/2} dx (-1)^m DFT(u)_m   for x_j centered at -L/2
  Field hat(grid_.n);
  fwd_raw(u, hat);
  const double c = grid_.dx / std::sqrt(kTwoPi);
  for (int k = 0; k < grid_.n; ++k) hat[k] *= (k & 1) ? -c : c;
  return hat;
}

Field SpectralOps::physical(const Field& hat) const {
  Field tmp(grid_.n);
  const double c = std::sqrt(kTwoPi) / grid_.dx;
  for (int k = 0; k < grid_.n; ++k) tmp[k] = hat[k] * ((k & 1) ? -c : c);
  Field u(grid_.n);
  inv_raw(tmp, u);
  return u;
}

void SpectralOps::free_propagate_inplace(Field& u, double t) const {
  if (t == 0.0) return;
  fwd_raw(u, u);
  for (int k = 0; k < grid_.n; ++k) {
    double ph = -t * grid_.xi[k] * grid_.xi[k];
    u[k] *= Complex(std::cos(ph), std::sin(ph));
  }
  Field out(grid_.n);
  inv_raw(u, out);
  u.swap(out);
}

Field SpectralOps::free_propagate(const Field& u, double t) const {
  Field v = u;
  free_propagate_inplace(v, t);
  return v;
}

Field SpectralOps::derivative(const Field& u) const {
  Field hat(grid_.n);
  fwd_raw(u, hat);
  for (int k = 0; k < grid_.n; ++k) hat[k] *= Complex(0.0, grid_.xi[k]);
  Field out(grid_.n);
  inv_raw(hat, out);
  return out;
}

Field free_propagate(const Grid& g, const Field& u, double t) {
  SpectralOps ops(g);
  return ops.free_propagate(u, t);
}

double l2_norm(const Grid& g, const Field& u) {
  return std::sqrt(u.abs2().sum() * g.dx);
}

double sup_norm(const Field& u) { return u.abs().maxCoeff(); }

Complex inner(const Grid& g, const Field& u, const Field& v) {
  return (u * v.conjugate()).sum() * g.dx;
}

double spectral_l2_norm(const Grid& g, const Field& hat) {
  return std::sqrt(hat.abs2().sum() * (kTwoPi / g.length));
}

Complex spectral_inner(const Grid& g, const Field& uhat, const Field& vhat) {
  return (uhat * vhat.conjugate()).sum() * (kTwoPi / g.length);
}

double spectral_sup_trusted(const Grid& g, const Field& hat) {
  const double cutoff = 0.5 * g.xi_max();
  double m = 0.0;
  for (int k = 0; k < g.n; ++k)
    if (std::abs(g.xi[k]) <= cutoff) m = std::max(m, std::abs(hat[k]));
  return m;
}

}  // namespace nlslab
