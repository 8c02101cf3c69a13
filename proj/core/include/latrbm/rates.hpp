#pragma once

#include <stdexcept>
#include <type_traits>
#include <vector>

// Per-site jump tables for the approximating chain on the scaled lattice
// h*Z_+^d, h = 1/sqrt(n), and for its adjoint companion chain.  The formulas
// are kept templated on the scalar type: the production build instantiates
// them with double, and the rate-identity checks instantiate them with an
// exact fraction type so the drift/covariance/face-mean identities can be
// verified with no rounding at all (n must be a perfect square there, so
// sqrt(n) is itself exact).
//
// Conventions used throughout:
//   - a site is strictly positive ("interior") when every coordinate is > 0;
//   - I denotes the set of zero coordinates of a face site;
//   - directions are integer vectors with entries in {-1,0,+1} and at most
//     two nonzero entries, in units of the mesh h;
//   - rates of value zero are not emitted (an edge exists iff its rate > 0).

namespace latrbm::rates {

template <class S>
struct Jump {
  std::vector<int> dir;  // size d
  S rate;
};

template <class S>
struct SpecT {
  int d = 0;
  std::vector<S> b;  // d
  std::vector<S> A;  // d*d row-major
  std::vector<S> R;  // d*d row-major

  const S& a(int i, int j) const { return A[static_cast<size_t>(i) * d + j]; }
  const S& r(int i, int j) const { return R[static_cast<size_t>(i) * d + j]; }
};

// Face-table constants.  c0 is the free base constant of the tangential
// rates; corner_fraction is the fraction of n*min(S_i, S_j) given to the
// double-raise jump at a two-zero corner (see corner_gamma below).
template <class S>
struct ConstantsT {
  S c0;
  S corner_fraction;
};

template <class S>
S pos_part(const S& x) {
  return x > S(0) ? x : S(0);
}
template <class S>
S neg_part(const S& x) {
  return x < S(0) ? -x : S(0);
}
template <class S>
S abs_val(const S& x) {
  return x < S(0) ? -x : x;
}
// sign with sgn(0) = +1 (only ever applied to nonzero couplings here).
template <class S>
int sgn_val(const S& x) {
  return x < S(0) ? -1 : 1;
}

// gap_i = a_ii - sum_{j != i} |a_ij|  (> 0 under strict diagonal dominance).
// The clock-speed constant zeta_i = 2 a_ii / gap_i, so n*a_ii/zeta_i equals
// n*gap_i/2; the rates below use the gap form directly.
template <class S>
S row_gap(const SpecT<S>& sp, int i) {
  S g = sp.a(i, i);
  for (int j = 0; j < sp.d; ++j)
    if (j != i) g -= abs_val(sp.a(i, j));
  return g;
}

template <class S>
S zeta(const SpecT<S>& sp, int i) {
  return S(2) * sp.a(i, i) / row_gap(sp, i);
}

namespace detail {
template <class S>
void push(std::vector<Jump<S>>& out, std::vector<int> dir,
          std::type_identity_t<S> rate) {
  if (rate > S(0)) out.push_back(Jump<S>{std::move(dir), std::move(rate)});
}
template <class S>
std::vector<int> e(int d, int i, int s = 1) {
  std::vector<int> v(d, 0);
  v[i] = s;
  return v;
}
template <class S>
std::vector<int> e2(int d, int i, int si, int j, int sj) {
  std::vector<int> v(d, 0);
  v[i] = si;
  v[j] = sj;
  return v;
}
}  // namespace detail

// Jumps from a strictly positive site.  Axis moves reproduce the drift
// exactly; the paired diagonal moves reproduce the off-diagonal covariance.
// With drop_drift = true the -e_i rates lose their sqrt(n)*b_i term; that
// variant is what the adjoint chain uses for moves off the one-step layer
// onto a face.
template <class S>
std::vector<Jump<S>> interior_jumps(const SpecT<S>& sp, const S& n, const S& sqrt_n,
                                    bool drop_drift = false) {
  std::vector<Jump<S>> out;
  const int d = sp.d;
  for (int i = 0; i < d; ++i) {
    const S base = n * row_gap(sp, i) / S(2);
    detail::push(out, detail::e<S>(d, i, +1), base);
    S down = base;
    if (!drop_drift) down -= sqrt_n * sp.b[i];
    if (down < S(0)) throw std::domain_error("negative axis rate: n below min_scale");
    detail::push(out, detail::e<S>(d, i, -1), down);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const S& aij = sp.a(i, j);
      if (aij > S(0)) {
        const S rr = n * aij / S(2);
        detail::push(out, detail::e2<S>(d, i, +1, j, +1), rr);
        detail::push(out, detail::e2<S>(d, i, -1, j, -1), rr);
      } else if (aij < S(0)) {
        const S rr = n * (-aij) / S(2);
        detail::push(out, detail::e2<S>(d, i, +1, j, -1), rr);
        detail::push(out, detail::e2<S>(d, i, -1, j, +1), rr);
      }
    }
  return out;
}

// Tangential constants at a single-zero face {x_i = 0}: the pair
// c_{+} - c_{-} must equal m = -r_ii a_ij / a_ii; we take c_{+-} = c0 + (m)_{-+}
// so both stay >= c0 > 0.
template <class S>
void face1_tangential_constants(const SpecT<S>& sp, int i, int j, const ConstantsT<S>& k,
                                S& c_plus, S& c_minus) {
  const S m = -sp.r(i, i) * sp.a(i, j) / sp.a(i, i);
  c_plus = k.c0 + pos_part(m);
  c_minus = k.c0 + neg_part(m);
}

// Jumps from a face site with exactly one zero coordinate (x_i = 0), primal
// chain.  Raising part pushes along column i of R with total rate n*r_ii;
// tangential part keeps the drift identity sum(rate*dir) = sqrt(n) * col_i(R).
template <class S>
std::vector<Jump<S>> face1_jumps(const SpecT<S>& sp, int i, const S& n,
                                 const ConstantsT<S>& k) {
  std::vector<Jump<S>> out;
  const int d = sp.d;
  const S& rii = sp.r(i, i);
  detail::push(out, detail::e<S>(d, i, +1), n * rii * row_gap(sp, i) / sp.a(i, i));
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const S& aij = sp.a(i, j);
    if (!(aij == S(0)))
      detail::push(out, detail::e2<S>(d, i, +1, j, sgn_val(aij)),
                   n * rii * abs_val(aij) / sp.a(i, i));
    S c_plus, c_minus;
    face1_tangential_constants(sp, i, j, k, c_plus, c_minus);
    detail::push(out, detail::e<S>(d, j, +1), n * (pos_part(sp.r(j, i)) + c_plus));
    detail::push(out, detail::e<S>(d, j, -1), n * (neg_part(sp.r(j, i)) + c_minus));
  }
  return out;
}

// Row sum of the reflection matrix M over the index set I.
template <class S>
S row_sum_over(const std::vector<S>& M, int d, int i, const std::vector<int>& I) {
  S s(0);
  for (int l : I) s += M[static_cast<size_t>(i) * d + l];
  return s;
}

// Rate of the double-raise jump e_i + e_j at a two-zero corner I = {i,j}
// with a_ij > 0.  The jump is a single edge; writing its rate gamma both as
// n*c_{I,i,j}*S_i and n*c_{I,j,i}*S_j fixes c_{I,i,j} = gamma/(n S_i), and the
// requirement c_{I,i} + c_{I,i,j} = 1 then pins the e_i rate to n*S_i - gamma.
// Any gamma in (0, n*min(S_i,S_j)) is admissible; we take the fraction
// k.corner_fraction of the upper bound.
template <class S>
S corner_gamma(const S& n, const S& Si, const S& Sj, const ConstantsT<S>& k) {
  const S mn = Si < Sj ? Si : Sj;
  return k.corner_fraction * n * mn;
}

// Jumps from a face site with zero set I, |I| >= 2, for the reflection
// matrix M (R for the primal chain, R* for the adjoint one).  The mean
// identity sum(rate*dir) = sqrt(n) * sum_{l in I} col_l(M) holds exactly.
// `corner_ok` gates the double-raise jump (|I| == 2 and a_ij > 0).
template <class S>
std::vector<Jump<S>> faceK_jumps(const SpecT<S>& sp, const std::vector<S>& M,
                                 const std::vector<int>& I, const S& n,
                                 const ConstantsT<S>& k) {
  std::vector<Jump<S>> out;
  const int d = sp.d;
  std::vector<char> in_I(d, 0);
  for (int l : I) in_I[l] = 1;

  bool corner = false;
  S gamma(0);
  if (I.size() == 2 && sp.a(I[0], I[1]) > S(0)) {
    corner = true;
    const S Si = row_sum_over(M, d, I[0], I);
    const S Sj = row_sum_over(M, d, I[1], I);
    if (!(Si > S(0)) || !(Sj > S(0)))
      throw std::domain_error("nonpositive principal row sum in reflection matrix");
    gamma = corner_gamma(n, Si, Sj, k);
    detail::push(out, detail::e2<S>(d, I[0], +1, I[1], +1), gamma);
  }

  for (int i : I) {
    const S Si = row_sum_over(M, d, i, I);
    if (!(Si > S(0)))
      throw std::domain_error("nonpositive principal row sum in reflection matrix");
    S rate = n * Si;
    if (corner) rate -= gamma;
    detail::push(out, detail::e<S>(d, i, +1), rate);
  }

  for (int j = 0; j < d; ++j) {
    if (in_I[j]) continue;
    S plus(0), minus(0);
    for (int l : I) {
      plus += pos_part(M[static_cast<size_t>(j) * d + l]);
      minus += neg_part(M[static_cast<size_t>(j) * d + l]);
    }
    detail::push(out, detail::e<S>(d, j, +1), n * (plus + k.c0));
    detail::push(out, detail::e<S>(d, j, -1), n * (minus + k.c0));
  }
  return out;
}

// Coordinate-raising rates of the adjoint chain at a single-zero face
// {x_i = 0}: the solution (z_i, z_j) of the proportionality system
//     z_j / (n |a_ij| / 2) = z_i / (n gap_i/2 - sqrt(n) b_i),
//     sum_k z_k = n r_ii,
// which makes every raising jump from the face carry the same primal/adjoint
// rate ratio.  The z_j jump moves by e_i + sgn(a_ij) e_j, matching the primal
// diagonal moves that enter the face.
template <class S>
std::vector<Jump<S>> face1_raising_adjoint(const SpecT<S>& sp, int i, const S& n,
                                           const S& sqrt_n) {
  std::vector<Jump<S>> out;
  const int d = sp.d;
  const S rate_down = n * row_gap(sp, i) / S(2) - sqrt_n * sp.b[i];
  const S denom = n * sp.a(i, i) / S(2) - sqrt_n * sp.b[i];
  const S nrii = n * sp.r(i, i);
  if (!(denom > S(0))) {
    // Degenerate only when row i has no couplings and the -e_i rate is 0
    // (n exactly at min_scale with positive drift): all mass on e_i.
    detail::push(out, detail::e<S>(d, i, +1), nrii);
    return out;
  }
  detail::push(out, detail::e<S>(d, i, +1), nrii * rate_down / denom);
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const S& aij = sp.a(i, j);
    if (aij == S(0)) continue;
    detail::push(out, detail::e2<S>(d, i, +1, j, sgn_val(aij)),
                 nrii * (n * abs_val(aij) / S(2)) / denom);
  }
  return out;
}

// Full adjoint table at a single-zero face: z-system raising plus the
// tangential rates evaluated on R* with the same constants (r*_ii = r_ii, so
// the constraint on c_{+} - c_{-} is unchanged and the total outflow matches
// the primal one exactly).
template <class S>
std::vector<Jump<S>> face1_jumps_adjoint(const SpecT<S>& sp, const std::vector<S>& Rstar,
                                         int i, const S& n, const S& sqrt_n,
                                         const ConstantsT<S>& k) {
  std::vector<Jump<S>> out = face1_raising_adjoint(sp, i, n, sqrt_n);
  const int d = sp.d;
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    S c_plus, c_minus;
    face1_tangential_constants(sp, i, j, k, c_plus, c_minus);
    const S& rstar_ji = Rstar[static_cast<size_t>(j) * d + i];
    detail::push(out, detail::e<S>(d, j, +1), n * (pos_part(rstar_ji) + c_plus));
    detail::push(out, detail::e<S>(d, j, -1), n * (neg_part(rstar_ji) + c_minus));
  }
  return out;
}

// Smallest scale n0 such that every rate of the chain is nonnegative for all
// n >= n0.  Only the -e_i axis rate can go negative (positive drift), so the
// condition is sqrt(n) >= zeta_i b_i / a_ii for each i with b_i > 0.
long min_scale(const SpecT<double>& sp);

}  // namespace latrbm::rates
