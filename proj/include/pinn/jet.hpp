#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "pinn/mlp.hpp"
#include "pinn/tape.hpp"

namespace pinn {

inline constexpr int kMaxJetAxes = 8;

/// Which input axes carry first derivatives and which of those also carry
/// pure second derivatives. Shared by every jet of one evaluation.
struct JetShape {
  int n1 = 0;
  int n2 = 0;
  std::array<int, kMaxJetAxes> map2{};  // second-derivative slot -> first-derivative slot

  static JetShape firsts(int n) {
    JetShape s;
    s.n1 = n;
    return s;
  }
  static JetShape full(int n) {
    JetShape s;
    s.n1 = s.n2 = n;
    for (int i = 0; i < n; ++i) s.map2[static_cast<size_t>(i)] = i;
    return s;
  }
};

/// Truncated Taylor data of a scalar along the shape's axes: value, first
/// derivatives, and pure second derivatives. No mixed partials are tracked.
template <class S>
struct Jet {
  const JetShape* sh = nullptr;
  S v{};
  std::array<S, kMaxJetAxes> d1{};
  std::array<S, kMaxJetAxes> d2{};
};

template <class S>
Jet<S> jet_const(const JetShape& sh, S v, S zero) {
  Jet<S> r;
  r.sh = &sh;
  r.v = v;
  for (int k = 0; k < sh.n1; ++k) r.d1[static_cast<size_t>(k)] = zero;
  for (int j = 0; j < sh.n2; ++j) r.d2[static_cast<size_t>(j)] = zero;
  return r;
}

template <class S>
Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = a.v + b.v;
  for (int k = 0; k < sh.n1; ++k)
    r.d1[static_cast<size_t>(k)] = a.d1[static_cast<size_t>(k)] + b.d1[static_cast<size_t>(k)];
  for (int j = 0; j < sh.n2; ++j)
    r.d2[static_cast<size_t>(j)] = a.d2[static_cast<size_t>(j)] + b.d2[static_cast<size_t>(j)];
  return r;
}

template <class S>
Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = a.v - b.v;
  for (int k = 0; k < sh.n1; ++k)
    r.d1[static_cast<size_t>(k)] = a.d1[static_cast<size_t>(k)] - b.d1[static_cast<size_t>(k)];
  for (int j = 0; j < sh.n2; ++j)
    r.d2[static_cast<size_t>(j)] = a.d2[static_cast<size_t>(j)] - b.d2[static_cast<size_t>(j)];
  return r;
}

template <class S>
Jet<S> operator-(const Jet<S>& a) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = -a.v;
  for (int k = 0; k < sh.n1; ++k) r.d1[static_cast<size_t>(k)] = -a.d1[static_cast<size_t>(k)];
  for (int j = 0; j < sh.n2; ++j) r.d2[static_cast<size_t>(j)] = -a.d2[static_cast<size_t>(j)];
  return r;
}

template <class S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = a.v * b.v;
  for (int k = 0; k < sh.n1; ++k)
    r.d1[static_cast<size_t>(k)] =
        a.d1[static_cast<size_t>(k)] * b.v + a.v * b.d1[static_cast<size_t>(k)];
  for (int j = 0; j < sh.n2; ++j) {
    size_t k = static_cast<size_t>(sh.map2[static_cast<size_t>(j)]);
    r.d2[static_cast<size_t>(j)] = a.d2[static_cast<size_t>(j)] * b.v +
                                   2.0 * (a.d1[k] * b.d1[k]) +
                                   a.v * b.d2[static_cast<size_t>(j)];
  }
  return r;
}

template <class S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = a.v / b.v;
  for (int k = 0; k < sh.n1; ++k)
    r.d1[static_cast<size_t>(k)] =
        (a.d1[static_cast<size_t>(k)] - r.v * b.d1[static_cast<size_t>(k)]) / b.v;
  for (int j = 0; j < sh.n2; ++j) {
    size_t k = static_cast<size_t>(sh.map2[static_cast<size_t>(j)]);
    r.d2[static_cast<size_t>(j)] =
        (a.d2[static_cast<size_t>(j)] - 2.0 * (r.d1[k] * b.d1[k]) -
         r.v * b.d2[static_cast<size_t>(j)]) /
        b.v;
  }
  return r;
}

// Plain-number variants: derivatives of the constant side vanish.
template <class S>
Jet<S> operator+(const Jet<S>& a, double c) {
  Jet<S> r = a;
  r.v = a.v + c;
  return r;
}
template <class S>
Jet<S> operator+(double c, const Jet<S>& a) {
  return a + c;
}
template <class S>
Jet<S> operator-(const Jet<S>& a, double c) {
  return a + (-c);
}
template <class S>
Jet<S> operator-(double c, const Jet<S>& a) {
  return -(a + (-c));
}
template <class S>
Jet<S> operator*(const Jet<S>& a, double c) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = a.v * c;
  for (int k = 0; k < sh.n1; ++k) r.d1[static_cast<size_t>(k)] = a.d1[static_cast<size_t>(k)] * c;
  for (int j = 0; j < sh.n2; ++j) r.d2[static_cast<size_t>(j)] = a.d2[static_cast<size_t>(j)] * c;
  return r;
}
template <class S>
Jet<S> operator*(double c, const Jet<S>& a) {
  return a * c;
}
template <class S>
Jet<S> operator/(const Jet<S>& a, double c) {
  return a * (1.0 / c);
}

/// Left-multiplication by a tracked scalar (a weight): (s*f)' = s*f'.
template <class S>
Jet<S> scale_by(const S& s, const Jet<S>& a) {
  const JetShape& sh = *a.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = s * a.v;
  for (int k = 0; k < sh.n1; ++k) r.d1[static_cast<size_t>(k)] = s * a.d1[static_cast<size_t>(k)];
  for (int j = 0; j < sh.n2; ++j) r.d2[static_cast<size_t>(j)] = s * a.d2[static_cast<size_t>(j)];
  return r;
}

/// Chain rule through y = f(x) given f(x), f'(x) and a lazily computed f''(x).
template <class S, class FddFn>
Jet<S> jet_chain(const Jet<S>& x, S fv, S fd, FddFn&& fdd_fn) {
  const JetShape& sh = *x.sh;
  Jet<S> r;
  r.sh = &sh;
  r.v = fv;
  for (int k = 0; k < sh.n1; ++k) r.d1[static_cast<size_t>(k)] = fd * x.d1[static_cast<size_t>(k)];
  if (sh.n2 > 0) {
    S fdd = fdd_fn();
    for (int j = 0; j < sh.n2; ++j) {
      size_t k = static_cast<size_t>(sh.map2[static_cast<size_t>(j)]);
      r.d2[static_cast<size_t>(j)] =
          fdd * (x.d1[k] * x.d1[k]) + fd * x.d2[static_cast<size_t>(j)];
    }
  }
  return r;
}

template <class S>
Jet<S> sin(const Jet<S>& x) {
  using std::cos;
  using std::sin;
  S s = sin(x.v), c = cos(x.v);
  return jet_chain(x, s, c, [&] { return -s; });
}
template <class S>
Jet<S> cos(const Jet<S>& x) {
  using std::cos;
  using std::sin;
  S c = cos(x.v), s = sin(x.v);
  return jet_chain(x, c, -s, [&] { return -c; });
}
template <class S>
Jet<S> exp(const Jet<S>& x) {
  using std::exp;
  S e = exp(x.v);
  return jet_chain(x, e, e, [&] { return e; });
}
template <class S>
Jet<S> log(const Jet<S>& x) {
  using std::log;
  S lv = log(x.v);
  S inv = 1.0 / x.v;
  return jet_chain(x, lv, inv, [&] { return -(inv * inv); });
}
template <class S>
Jet<S> sqrt(const Jet<S>& x) {
  using std::sqrt;
  S rt = sqrt(x.v);
  S fd = 0.5 / rt;
  return jet_chain(x, rt, fd, [&] { return -0.5 * (fd / x.v); });
}
template <class S>
Jet<S> sinh(const Jet<S>& x) {
  using std::cosh;
  using std::sinh;
  S s = sinh(x.v), c = cosh(x.v);
  return jet_chain(x, s, c, [&] { return s; });
}
template <class S>
Jet<S> cosh(const Jet<S>& x) {
  using std::cosh;
  using std::sinh;
  S c = cosh(x.v), s = sinh(x.v);
  return jet_chain(x, c, s, [&] { return c; });
}
template <class S>
Jet<S> tanh(const Jet<S>& x) {
  using std::tanh;
  S t = tanh(x.v);
  S fd = 1.0 - t * t;
  return jet_chain(x, t, fd, [&] { return -2.0 * (t * fd); });
}
template <class S>
Jet<S> abs(const Jet<S>& x) {
  using std::fabs;
  double xv = scalar_value(x.v);
  double sign = xv > 0.0 ? 1.0 : (xv < 0.0 ? -1.0 : 0.0);
  Jet<S> r = x * sign;
  r.v = fabs(x.v);
  return r;
}
template <class S>
Jet<S> pow(const Jet<S>& x, double c) {
  using std::pow;
  S fv = pow(x.v, c);
  S fd = c * pow(x.v, c - 1.0);
  return jet_chain(x, fv, fd, [&] { return (c * (c - 1.0)) * pow(x.v, c - 2.0); });
}

template <class S>
Jet<S> activate(Activation act, const Jet<S>& z) {
  using std::erf;
  using std::exp;
  switch (act) {
    case Activation::Identity:
      return z;
    case Activation::Tanh:
      return tanh(z);
    case Activation::Sigmoid: {
      S s = 1.0 / (1.0 + exp(-z.v));
      S fd = s * (1.0 - s);
      return jet_chain(z, s, fd, [&] { return fd * (1.0 - 2.0 * s); });
    }
    case Activation::Gelu: {
      // Exact Gaussian-CDF form: z*Phi(z), with phi the standard normal pdf.
      S cdf = 0.5 * (1.0 + erf(z.v * M_SQRT1_2));
      S z2 = z.v * z.v;
      S pdf = exp(z2 * -0.5) * (1.0 / std::sqrt(2.0 * M_PI));
      S fv = z.v * cdf;
      S fd = cdf + z.v * pdf;
      return jet_chain(z, fv, fd, [&] { return pdf * (2.0 - z2); });
    }
  }
  return z;
}

/// Dense forward pass over jets. `param(i)` returns the i-th entry of the
/// network's slice of the flat parameter vector as an S; `zero` is a shared
/// zero of S (a constant node in tape mode).
template <class S, class ParamAt>
std::vector<Jet<S>> mlp_forward_jet(const MlpSpec& spec, ParamAt&& param,
                                    std::span<const Jet<S>> inputs, S zero) {
  const JetShape& sh = *inputs[0].sh;
  std::vector<Jet<S>> cur(inputs.begin(), inputs.end());
  std::vector<Jet<S>> next;
  size_t off = 0;
  for (const auto& l : spec.layers) {
    next.clear();
    next.reserve(static_cast<size_t>(l.out));
    for (int j = 0; j < l.out; ++j) {
      S bias = param(off + static_cast<size_t>(l.in) * l.out + static_cast<size_t>(j));
      Jet<S> z = jet_const(sh, bias, zero);
      for (int i = 0; i < l.in; ++i) {
        S w = param(off + static_cast<size_t>(j) * l.in + static_cast<size_t>(i));
        z = z + scale_by(w, cur[static_cast<size_t>(i)]);
      }
      next.push_back(activate(l.act, z));
    }
    cur.swap(next);
    off += static_cast<size_t>(l.in) * l.out + static_cast<size_t>(l.out);
  }
  return cur;
}

/// Forward/value view of a network's input derivatives at one point.
struct JetRecord {
  std::vector<double> value;                 // [output]
  std::vector<std::vector<double>> first;    // [output][input axis]
  std::vector<std::vector<double>> second;   // [output][requested axis]
};

/// Exact first derivatives along every input axis and exact pure second
/// derivatives along `second_axes`, by forward jet propagation.
JetRecord input_jet(const MlpSpec& spec, std::span<const double> params,
                    std::span<const double> x, const std::vector<int>& second_axes);

/// Gradient of a scalar loss with respect to the whole flat vector. The loss
/// body composes forward passes and jets from tape scalars.
std::vector<double> loss_param_gradient(
    const std::function<TScalar(Tape&, std::span<const TScalar>)>& loss,
    std::span<const double> params);

}  // namespace pinn
