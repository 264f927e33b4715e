#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>

#include "nlslab/errors.hpp"

namespace nlslab {

using Field = Eigen::ArrayXcd;   // complex samples on a Grid
using RealField = Eigen::ArrayXd;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Uniform periodic grid on [-L/2, L/2). n is a power of two so dx = L/n is
// exact in binary floating point and dx*n == L holds exactly.
struct Grid {
  int n = 0;
  double length = 0.0;
  double dx = 0.0;
  RealField x;    // x_j = -L/2 + j*dx
  RealField xi;   // FFT-ordered frequencies 2*pi*m/L, m = 0..n/2-1, -n/2..-1
  double xi_max() const { return kPi * static_cast<double>(n) / length; }
};

Grid make_grid(int n, double length);

// Gaussian probe eps * exp(-(x-x0)^2 / (4 sigma^2)), sampled with periodic
// minimum-image distance so translates wrap consistently.
struct ProbeSpec {
  double sigma = 1.0;
  double x0 = 0.0;
  double eps = 1.0;
};

Field gaussian_probe(const Grid& g, const ProbeSpec& spec);

// Closed-form free evolution of a Gaussian probe,
//   e^{it Laplacian} probe = eps * (1 + it/sigma^2)^{-1/2} exp(-(x-x0)^2 / (4(sigma^2 + it))),
// used as an oracle for the spectral propagator.
Field gaussian_free_evolution(const Grid& g, const ProbeSpec& spec, double t);

// FFT workspace bound to one grid. Owns the transform plan and scratch
// buffers; create one per thread of execution.
class SpectralOps {
 public:
  explicit SpectralOps(const Grid& g);
  ~SpectralOps();
  SpectralOps(const SpectralOps&) = delete;
  SpectralOps& operator=(const SpectralOps&) = delete;

  const Grid& grid() const { return grid_; }

  // Raw periodic DFT pair (Eigen conventions: inv includes the 1/n factor).
  void fwd_raw(const Field& u, Field& out) const;
  void inv_raw(const Field& spec, Field& out) const;

  // Continuum-normalized transform pair: spectrum() returns samples of
  // (2pi)^{-1/2} \int u(x) e^{-i x xi} dx on the FFT-ordered xi lattice.
  Field spectrum(const Field& u) const;
  Field physical(const Field& hat) const;

  // u <- e^{it Laplacian} u  (Fourier multiplier e^{-i t xi^2})
  void free_propagate_inplace(Field& u, double t) const;
  Field free_propagate(const Field& u, double t) const;

  Field derivative(const Field& u) const;  // spectral d/dx

 private:
  Grid grid_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper (builds a workspace internally).
Field free_propagate(const Grid& g, const Field& u, double t);

// Quadrature-weighted norms and inner products (dx weights in x,
// dxi = 2*pi/L weights on the frequency side).
double l2_norm(const Grid& g, const Field& u);
double sup_norm(const Field& u);
Complex inner(const Grid& g, const Field& u, const Field& v);  // \int u conj(v) dx
double spectral_l2_norm(const Grid& g, const Field& hat);
Complex spectral_inner(const Grid& g, const Field& uhat, const Field& vhat);

// Sup norm over the trusted frequency window |xi| <= xi_max/2 (the top
// octave of the lattice is excluded from frequency-side diagnostics).
double spectral_sup_trusted(const Grid& g, const Field& hat);

}  // namespace nlslab
