#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spindyn/errors.hpp"

namespace spindyn {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Single-site operator axes. Plus/Minus denote the ladder operators
/// sigma_pm = (sigma_x +- i sigma_y)/2.
enum class Axis : std::uint8_t { X, Y, Z, Plus, Minus };

inline char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
    case Axis::Plus: return '+';
    case Axis::Minus: return '-';
  }
  return '?';
}

inline Axis axis_adjoint(Axis a) {
  if (a == Axis::Plus) return Axis::Minus;
  if (a == Axis::Minus) return Axis::Plus;
  return a;
}

struct PauliFactor {
  int site;  // 1-based, in [1, L]
  Axis axis;
  friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
};

enum class Side { Left, Right };

/// A scalar multiple of a tensor product of single-site Pauli/ladder
/// operators on an L-spin register.
///
/// Basis convention: site 1 is the most significant bit of the computational
/// index, so bit 0 addresses site L. Bit value 0 is spin up (sigma_z = +1).
/// Application to a basis index m is a (partial) permutation: the string
/// either kills |m> or sends it to |m ^ flip_mask> with a phase, which is
/// what the O(4^L) kernels below exploit. The full 2^L x 2^L operator matrix
/// is never formed.
class PauliString {
 public:
  PauliString(std::vector<PauliFactor> factors, cplx coefficient, int num_sites)
      : factors_(std::move(factors)), coeff_(coefficient), num_sites_(num_sites) {
    if (num_sites_ < 1 || num_sites_ > 30) {
      throw std::out_of_range("PauliString: register size " + std::to_string(num_sites_) +
                              " outside [1, 30]");
    }
    if (!std::isfinite(coeff_.real()) || !std::isfinite(coeff_.imag())) {
      throw std::invalid_argument("PauliString: coefficient must be finite");
    }
    std::sort(factors_.begin(), factors_.end(),
              [](const PauliFactor& a, const PauliFactor& b) { return a.site < b.site; });
    for (std::size_t n = 0; n < factors_.size(); ++n) {
      const int site = factors_[n].site;
      if (site < 1 || site > num_sites_) {
        throw std::out_of_range("PauliString: site " + std::to_string(site) +
                                " outside [1, " + std::to_string(num_sites_) + "]");
      }
      if (n > 0 && factors_[n - 1].site == site) {
        throw std::invalid_argument("PauliString: duplicate site " + std::to_string(site));
      }
    }
    build_masks();
  }

  int num_sites() const { return num_sites_; }
  Eigen::Index dim() const { return Eigen::Index{1} << num_sites_; }
  cplx coefficient() const { return coeff_; }
  const std::vector<PauliFactor>& factors() const { return factors_; }
  bool is_identity() const { return factors_.empty(); }

  PauliString with_coefficient(cplx c) const {
    PauliString out = *this;
    out.coeff_ = c;
    return out;
  }

  PauliString adjoint() const {
    std::vector<PauliFactor> f = factors_;
    for (auto& pf : f) pf.axis = axis_adjoint(pf.axis);
    return PauliString(std::move(f), std::conj(coeff_), num_sites_);
  }

  /// True when the source basis index survives application (sigma_pm kill
  /// half the basis; x/y/z strings are always alive).
  bool alive(std::uint64_t index) const {
    return (index & plus_req_) == plus_req_ && (index & minus_req_) == 0;
  }

  std::uint64_t target(std::uint64_t index) const { return index ^ flip_mask_; }

  /// Phase (including the coefficient) picked up by basis index `index`.
  cplx phase(std::uint64_t index) const {
    const bool neg = std::popcount(index & sign_mask_) & 1u;
    return neg ? -base_phase_ : base_phase_;
  }

  std::string str() const {
    std::string out = "(" + std::to_string(coeff_.real()) + (coeff_.imag() < 0 ? "" : "+") +
                      std::to_string(coeff_.imag()) + "i)";
    for (const auto& f : factors_) {
      out += " s";
      out += axis_char(f.axis);
      out += "(" + std::to_string(f.site) + ")";
    }
    return out;
  }

 private:
  void build_masks() {
    flip_mask_ = sign_mask_ = plus_req_ = minus_req_ = 0;
    int n_y = 0;
    std::uint64_t y_mask = 0, z_mask = 0;
    for (const auto& f : factors_) {
      const std::uint64_t bit = std::uint64_t{1} << (num_sites_ - f.site);
      switch (f.axis) {
        case Axis::X: flip_mask_ |= bit; break;
        case Axis::Y: flip_mask_ |= bit; y_mask |= bit; ++n_y; break;
        case Axis::Z: z_mask |= bit; break;
        case Axis::Plus: flip_mask_ |= bit; plus_req_ |= bit; break;
        case Axis::Minus: flip_mask_ |= bit; minus_req_ |= bit; break;
      }
    }
    sign_mask_ = y_mask | z_mask;
    // sigma_y contributes i*(1-2b) at bit b: i^{n_y} overall, sign via popcount.
    static const cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    base_phase_ = coeff_ * i_pow[n_y & 3];
  }

  std::vector<PauliFactor> factors_;
  cplx coeff_;
  int num_sites_;
  std::uint64_t flip_mask_ = 0;
  std::uint64_t sign_mask_ = 0;
  std::uint64_t plus_req_ = 0;
  std::uint64_t minus_req_ = 0;
  cplx base_phase_{1.0, 0.0};
};

/// Builds the canonicalized embedded string; sites are sorted ascending.
inline PauliString embed_pauli(std::vector<PauliFactor> factors, cplx coefficient,
                               int num_sites) {
  return PauliString(std::move(factors), coefficient, num_sites);
}

inline void check_shape(const PauliString& term, const Matrix& rho) {
  if (rho.rows() != term.dim() || rho.cols() != term.dim()) {
    throw std::invalid_argument("apply_string: state is " + std::to_string(rho.rows()) + "x" +
                                std::to_string(rho.cols()) + " but operator register is 2^" +
                                std::to_string(term.num_sites()));
  }
}

/// out += scale * (term . rho). Column-major sweep: each output column is a
/// phase-weighted scatter of the corresponding input column.
inline void accumulate_apply_left(Matrix& out, const PauliString& term, const Matrix& rho,
                                  cplx scale = cplx{1.0, 0.0}) {
  const std::uint64_t n = static_cast<std::uint64_t>(rho.rows());
  for (std::uint64_t c = 0; c < n; ++c) {
    const cplx* src = rho.data() + c * n;
    cplx* dst = out.data() + c * n;
    for (std::uint64_t m = 0; m < n; ++m) {
      if (!term.alive(m)) continue;
      dst[term.target(m)] += scale * term.phase(m) * src[m];
    }
  }
}

/// out += scale * (rho . term). Whole-column copies: column c of the result
/// is phase(c) times column (c ^ flip) of rho.
inline void accumulate_apply_right(Matrix& out, const PauliString& term, const Matrix& rho,
                                   cplx scale = cplx{1.0, 0.0}) {
  const std::uint64_t n = static_cast<std::uint64_t>(rho.rows());
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!term.alive(c)) continue;
    out.col(static_cast<Eigen::Index>(c)) +=
        scale * term.phase(c) * rho.col(static_cast<Eigen::Index>(term.target(c)));
  }
}

/// term . rho (Side::Left) or rho . term (Side::Right).
inline Matrix apply_string(const PauliString& term, Side side, const Matrix& rho) {
  check_shape(term, rho);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  if (side == Side::Left) {
    accumulate_apply_left(out, term, rho);
  } else {
    accumulate_apply_right(out, term, rho);
  }
  return out;
}

/// tr(rho . term) without forming the product.
inline cplx string_trace(const Matrix& rho, const PauliString& term) {
  check_shape(term, rho);
  const std::uint64_t n = static_cast<std::uint64_t>(rho.rows());
  cplx sum{0.0, 0.0};
  for (std::uint64_t r = 0; r < n; ++r) {
    if (!term.alive(r)) continue;
    sum += term.phase(r) * rho(static_cast<Eigen::Index>(r),
                               static_cast<Eigen::Index>(term.target(r)));
  }
  return sum;
}

/// Sum of Pauli strings on a common register. Hamiltonians and jump-operator
/// combinations live here.
class OperatorSum {
 public:
  explicit OperatorSum(int num_sites) : num_sites_(num_sites) {
    if (num_sites_ < 1) throw std::invalid_argument("OperatorSum: register size must be >= 1");
  }

  int num_sites() const { return num_sites_; }
  Eigen::Index dim() const { return Eigen::Index{1} << num_sites_; }
  const std::vector<PauliString>& terms() const { return terms_; }

  void add(PauliString term) {
    if (term.num_sites() != num_sites_) {
      throw std::invalid_argument("OperatorSum: term register size mismatch");
    }
    terms_.push_back(std::move(term));
  }

  void add(std::vector<PauliFactor> factors, cplx coefficient) {
    add(PauliString(std::move(factors), coefficient, num_sites_));
  }

  OperatorSum adjoint() const {
    OperatorSum out(num_sites_);
    for (const auto& t : terms_) out.add(t.adjoint());
    return out;
  }

  /// Canonical form used for term-by-term comparison: terms keyed by their
  /// sorted factor list, coefficients of identical factor patterns combined.
  std::map<std::vector<std::pair<int, int>>, cplx> canonical_terms() const {
    std::map<std::vector<std::pair<int, int>>, cplx> out;
    for (const auto& t : terms_) {
      std::vector<std::pair<int, int>> key;
      key.reserve(t.factors().size());
      for (const auto& f : t.factors()) key.emplace_back(f.site, static_cast<int>(f.axis));
      out[key] += t.coefficient();
    }
    return out;
  }

  bool is_hermitian(double tol = 1e-12) const {
    const auto self = canonical_terms();
    const auto adj = adjoint().canonical_terms();
    for (const auto& [key, c] : self) {
      const auto it = adj.find(key);
      const cplx other = (it == adj.end()) ? cplx{0, 0} : it->second;
      if (std::abs(c - other) > tol) return false;
    }
    for (const auto& [key, c] : adj) {
      if (self.find(key) == self.end() && std::abs(c) > tol) return false;
    }
    return true;
  }

  /// Dense matrix assembled column by column from the string permutations.
  Matrix to_dense() const {
    Matrix out = Matrix::Zero(dim(), dim());
    const std::uint64_t n = static_cast<std::uint64_t>(dim());
    for (const auto& t : terms_) {
      for (std::uint64_t c = 0; c < n; ++c) {
        if (!t.alive(c)) continue;
        out(static_cast<Eigen::Index>(t.target(c)), static_cast<Eigen::Index>(c)) += t.phase(c);
      }
    }
    return out;
  }

  SparseMatrix to_sparse() const {
    std::vector<Eigen::Triplet<cplx>> trip;
    const std::uint64_t n = static_cast<std::uint64_t>(dim());
    trip.reserve(terms_.size() * n);
    for (const auto& t : terms_) {
      for (std::uint64_t c = 0; c < n; ++c) {
        if (!t.alive(c)) continue;
        trip.emplace_back(static_cast<int>(t.target(c)), static_cast<int>(c), t.phase(c));
      }
    }
    SparseMatrix out(dim(), dim());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }
};

/// tr(rho . op) for Hermitian op; the imaginary residue is checked against
/// tolerance and discarded.
inline double expectation(const Matrix& rho, const OperatorSum& op) {
  if (!op.is_hermitian()) {
    throw std::invalid_argument("expectation: operator is not Hermitian");
  }
  cplx sum{0.0, 0.0};
  for (const auto& t : op.terms()) sum += string_trace(rho, t);
  if (std::abs(sum.imag()) > 1e-10) {
    throw integrity_error("expectation: imaginary residue " + std::to_string(sum.imag()) +
                          " exceeds 1e-10");
  }
  return sum.real();
}

}  // namespace spindyn
