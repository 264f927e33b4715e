#include "nlslab/coefficient.hpp"

#include <cmath>

namespace nlslab {

namespace {

inline double min_image(double d, double L) {
  d -= L * std::round(d / L);
  return d;
}

}  // namespace

double BumpTerm::eval(double x) const {
  const double d = x - center;
  switch (kind) {
    case Kind::gaussian:
      return height * std::exp(-d * d / (2.0 * width * width));
    case Kind::mollifier: {
      const double r = d / width;
      if (std::abs(r) >= 1.0) return 0.0;
      return height * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
  }
  return 0.0;
}

double CoefficientSpec::eval(double x) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.eval(x);
  return v;
}

bool CoefficientSpec::is_zero() const {
  for (const auto& t : terms)
    if (t.height != 0.0) return false;
  return true;
}

double CoefficientSpec::support_radius() const {
  double r = 0.0;
  for (const auto& t : terms) {
    if (t.height == 0.0) continue;
    double reach = 0.0;
    switch (t.kind) {
      case BumpTerm::Kind::gaussian:
        reach = t.width * std::sqrt(2.0 * std::log(1e13));  // |g| < 1e-13 h beyond
        break;
      case BumpTerm::Kind::mollifier:
        reach = t.width;
        break;
    }
    r = std::max(r, std::abs(t.center) + reach);
  }
  return r;
}

CoefficientSpec CoefficientSpec::scaled(double factor) const {
  CoefficientSpec out = *this;
  for (auto& t : out.terms) t.height *= factor;
  return out;
}

CoefficientSpec CoefficientSpec::plus(const CoefficientSpec& other) const {
  CoefficientSpec out = *this;
  out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
  return out;
}

Coefficient sample_coefficient(const Grid& g, const CoefficientSpec& spec) {
  Coefficient a;
  a.spec = spec;
  a.zero = spec.is_zero();
  a.values = RealField::Zero(g.n);
  if (a.zero) return a;
  for (int j = 0; j < g.n; ++j) {
    double v = 0.0;
    for (const auto& t : spec.terms) v += t.eval(t.center + min_image(g.x[j] - t.center, g.length));
    a.values[j] = v;
  }
  return a;
}

double coeff_sup_norm(const Coefficient& a) {
  return a.zero ? 0.0 : a.values.abs().maxCoeff();
}

double coeff_l1_norm(const Grid& g, const Coefficient& a) {
  return a.zero ? 0.0 : a.values.abs().sum() * g.dx;
}

double coeff_l2_norm(const Grid& g, const Coefficient& a) {
  return a.zero ? 0.0 : std::sqrt(a.values.square().sum() * g.dx);
}

namespace {

RealField spectral_derivative_real(const Grid& g, const RealField& f) {
  SpectralOps ops(g);
  Field c = f.cast<Complex>();
  Field d = ops.derivative(c);
  return d.real();
}

}  // namespace

double coeff_h1_norm(const Grid& g, const Coefficient& a) {
  if (a.zero) return 0.0;
  RealField da = spectral_derivative_real(g, a.values);
  double s = (a.values.square().sum() + da.square().sum()) * g.dx;
  return std::sqrt(s);
}

double coeff_w1inf_norm(const Grid& g, const Coefficient& a) {
  if (a.zero) return 0.0;
  RealField da = spectral_derivative_real(g, a.values);
  return a.values.abs().maxCoeff() + da.abs().maxCoeff();
}

}  // namespace nlslab
