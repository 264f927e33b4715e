#pragma once

#include "nlslab/coefficient.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/quadrature.hpp"

namespace nlslab {

// Space-time mass of the unit Gaussian probe's response kernel,
//   lambda(p) = int_0^inf int_R |e^{it Laplacian} e^{-x^2/4}|^{p+2} dx dt
//             = pi (p+2)^{-1/2} Gamma(p/4 - 1/2) / Gamma(p/4),
// defined for 2 < p <= 4; diverges as p -> 2 (PoleAtTwo at or below 2).
// Gamma(1/2) = sqrt(pi) reduces p = 4 to pi^{3/2}/sqrt(6).
double lambda_p(double p);

// Same constant by brute-force nested quadrature of
// int_0^inf int_R (1+t^2)^{-(p+2)/4} exp{-(p+2)x^2/(4(1+t^2))} dx dt,
// kept free of the Gamma identity so it can cross-check lambda_p.
double lambda_p_quadrature(double p, const QuadratureConfig& cfg = {});

// K(x) = int_0^inf (1+t^2)^{-1} exp(-x^2/(1+t^2)) dt, evaluated as
// int_0^{pi/2} exp(-x^2 cos^2 theta) dtheta. K(0) = pi/2.
double kernel_K(double x, const QuadratureConfig& cfg = {});

// K_hat(xi) = 2^{-1/2} int_0^inf (1+t^2)^{-1/2} exp(-xi^2 (1+t^2)/4) dt,
// evaluated as 2^{-1/2} int_0^inf exp(-xi^2 cosh^2 v / 4) dv. Diverges like
// 2^{-1/2} log(1/|xi|) at the origin (DivergentAtZero for |xi| < 1e-12).
double kernel_K_hat(double xi, const QuadratureConfig& cfg = {});

// B = int_0^{t_max} int a(x) |e^{it Laplacian} phi_{sigma,x0}|^{p+2} dx dt
// using the closed-form dispersive envelope; the x integral is a trapezoid
// of a's samples against the envelope, the t integral is adaptive on a
// compactified axis, truncated where the envelope peak drops below 1e-14
// (or at the optional explicit horizon t_max).
double born_functional(const Grid& g, const Coefficient& a, const ProbeSpec& probe, double p,
                       double t_max = -1.0, const QuadratureConfig& cfg = {});

// Cubic space-time correlation of a Gaussian probe:
//   Q_eps = int_eps^inf (2it)^{-1} Iint [e^{-i eta sigma'/(2t)} - 1]
//            phi(z-eta) phi(z-sigma') conj(phi(z)) conj(phi(z-eta-sigma'))
//            dz deta dsigma' dt.
// The z integral is Gaussian and done analytically; (eta, sigma') rotate to
// separable chirped-Gaussian axes integrated numerically, then t adaptively.
Complex q_epsilon(const ProbeSpec& probe, double eps, const QuadratureConfig& cfg = {});

}  // namespace nlslab
