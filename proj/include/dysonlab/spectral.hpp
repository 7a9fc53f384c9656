#pragma once

// Balanced polar decomposition m = q^* u q, the saturated self-energy
// F = C_{q,q^*} S C_{q^*,q} and the isolated eigentriple of B = Id - C_m S.

#include "dysonlab/model.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace dyson {

inline constexpr double kBoundarySafeThreshold = 1e-6;
inline constexpr double kIsolationGate = 0.05;

struct PolarData {
  Matrix m, w, q, u, f_u;
  std::optional<Matrix> s;  // sign(Re u); empty when Re u is degenerate
  std::string sign_issue;
  double rho = 0.0;         // <Im m> / pi
  bool boundary_safe = false;
};

/// Uses f_m = Im m / rho, X = f_m^{-1/2} Re m f_m^{-1/2}, u = (X + i rho)/|X + i rho|,
/// q = (X^2 + rho^2)^{1/4} f_m^{1/2} when <Im m> < 1e-6 (or when forced), and the
/// direct formulas w = (Im m)^{-1/2} Re m (Im m)^{-1/2} + i, u = w/|w|, q = |w|^{1/2} (Im m)^{1/2}
/// otherwise. Throws DomainError if Im m is not positive definite.
PolarData polar_decompose(const Matrix& m, const BlockLayout& layout, bool force_safe = false);
PolarData polar_decompose(const Matrix& m);

struct FData {
  SuperOperator F;
  double norm2F = 0.0;
  Matrix f;            // Perron-Frobenius eigenvector, f >= 0, ||f||_2 = 1
  double gap = 0.0;    // 1 - max(|lambda| over the rest of the spectrum of F) / ||F||_2
};

FData saturated_F(const PolarData& polar, const ModelSpec& spec);

struct StabilityEigendata {
  SuperOperator B;
  cplx beta;
  Matrix b, l;          // ||b||_2 = 1, <l, b> = 1
  SuperOperator P, Q;
  double separation = 0.0;  // |second smallest eigenvalue| - |beta|
  bool isolated = false;
  // Reference gauge b = P[P0 C_{q*,q}[f_u]], l = P*[P0* C_{q,q*}^{-1}[f_u]] with P0 the
  // isolated projector of Id - C_{q* s q} S. Empty when s is unavailable.
  std::optional<Matrix> b_ref, l_ref;
};

StabilityEigendata stability_eigendata(const Matrix& m, const ModelSpec& spec,
                                       const std::optional<PolarData>& polar = std::nullopt);

struct PositivityCheck {
  bool pass = false;
  double worst = 0.0;  // most negative eigenvalue seen in either test
  int samples = 0;
};

/// Samples x = y y^* and checks (Id - C_{m*,m} S)^{-1}[x] >= 0 and >= x.
PositivityCheck verify_Bstar_positivity(const Matrix& m, const SuperOperator& S, int samples = 200,
                                        std::uint64_t seed = 5);
PositivityCheck verify_Bstar_positivity(const Matrix& m, const ModelSpec& spec, int samples = 200,
                                        std::uint64_t seed = 5);

/// Smallest-modulus eigenpair of an operator with its bi-orthogonal rank-one projector.
struct IsolatedEigen {
  cplx value;
  CVector right, left;  // left^* right = 1
  double separation = 0.0;
  int index = 0;
  EigenData all;
};

IsolatedEigen isolated_eigen(const SuperOperator& T);

}  // namespace dyson
