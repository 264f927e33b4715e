#pragma once

#include <string>
#include <vector>

#include "nlslab/grid.hpp"

namespace nlslab {

// Analytic description of one bump. "gaussian" is h*exp(-(x-c)^2/(2 w^2));
// "mollifier" is the compactly supported h*exp(1 - 1/(1 - ((x-c)/w)^2)) on
// |x-c| < w and 0 outside.
struct BumpTerm {
  enum class Kind { gaussian, mollifier };
  Kind kind = Kind::gaussian;
  double height = 0.0;
  double width = 1.0;
  double center = 0.0;

  double eval(double x) const;
};

// Sum of bumps; kept alongside grid samples so the same coefficient can be
// re-sampled on any grid and evaluated exactly at recovery points.
struct CoefficientSpec {
  std::vector<BumpTerm> terms;

  double eval(double x) const;
  bool is_zero() const;
  // radius beyond which every term is below 1e-13 of its height
  double support_radius() const;
  CoefficientSpec scaled(double factor) const;
  CoefficientSpec plus(const CoefficientSpec& other) const;
};

struct Coefficient {
  CoefficientSpec spec;
  RealField values;  // samples on a grid (periodic min-image distances)
  bool zero = true;
};

Coefficient sample_coefficient(const Grid& g, const CoefficientSpec& spec);

// Grid-quadrature norms of a sampled coefficient.
double coeff_sup_norm(const Coefficient& a);
double coeff_l1_norm(const Grid& g, const Coefficient& a);
double coeff_l2_norm(const Grid& g, const Coefficient& a);
double coeff_h1_norm(const Grid& g, const Coefficient& a);       // (||a||_2^2 + ||a'||_2^2)^{1/2}
double coeff_w1inf_norm(const Grid& g, const Coefficient& a);    // ||a||_inf + ||a'||_inf

}  // namespace nlslab
