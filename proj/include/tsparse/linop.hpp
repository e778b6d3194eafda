#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace tsparse {

using cxd = std::complex<double>;
using cvec = std::vector<cxd>;

// How a linear map is applied. `tilde` is the adjoint of the pseudo-inverse,
// i.e. the map whose columns biorthogonal to the columns of the operator.
enum class Apply { forward, adjoint, pinv, tilde };

enum class OpKind {
  dense,
  dft,
  dft2,
  haar,
  haar2,
  finite_diff_1d,
  finite_diff_2d,
  circulant,
  circulant_stack,
  composed,
};

namespace detail {
class OpImpl;
}

struct SingularBounds {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

// Per-column norms of an operator and of its tilde companion.
struct ColumnNorms {
  std::vector<double> col2;         // ||T e_k||_2
  std::vector<double> tilde_col2;   // ||T~ e_k||_2
  std::vector<double> colinf;       // ||T e_k||_inf
  std::vector<double> tilde_colinf; // ||T~ e_k||_inf

  double one_to_two() const;      // max col2
  double pinv_two_to_inf() const; // max tilde_col2
};

// Immutable linear operator with forward / adjoint / pinv / tilde actions.
// Cheap to copy (shared immutable state); safe to share across threads.
class TransformOperator {
 public:
  TransformOperator() = default;

  // --- factories ---------------------------------------------------------
  static TransformOperator dense(Eigen::MatrixXcd a);
  static TransformOperator dft(std::size_t n);
  static TransformOperator dft2(std::size_t n1, std::size_t n2);
  static TransformOperator haar(std::size_t n, int level);
  static TransformOperator haar2(std::size_t n1, std::size_t n2);
  static TransformOperator finite_difference_1d(std::size_t n);
  static TransformOperator finite_difference_2d(std::size_t n1, std::size_t n2);
  // Circular convolution with `kernel` (1D, or column-major n1 x n2 grid).
  static TransformOperator circulant(const cvec& kernel);
  static TransformOperator circulant2(const cvec& kernel, std::size_t n1,
                                      std::size_t n2);
  // Filter bank: stack of circulant transforms applied to the same signal.
  static TransformOperator circulant_stack(const std::vector<cvec>& kernels,
                                           std::size_t n1, std::size_t n2 = 1);
  static TransformOperator identity(std::size_t n);

  // --- queries ------------------------------------------------------------
  bool valid() const { return impl_ != nullptr; }
  std::size_t in_dim() const;
  std::size_t out_dim() const;
  OpKind kind() const;
  bool orthonormal() const;

  // Spectral structure, when the operator (or its composition with the DFT)
  // is diagonalized by Fourier: one spectrum per stacked filter.
  bool has_spectrum() const;
  const std::vector<cvec>& spectra() const;
  std::size_t filter_count() const;
  // grid shape of the underlying signal domain (n2 == 1 for 1D)
  std::size_t grid_rows() const;
  std::size_t grid_cols() const;

  // Diagonal of T*T when it is diagonal in the coordinate basis
  // (spectral compositions and orthonormal operators). Empty otherwise.
  std::vector<double> gram_diagonal() const;

  // Extreme eigenvalues of T*T when structure makes them exact without a
  // dense decomposition; (0, 0) signals "not available".
  std::pair<double, double> gram_eigen_extremes() const;

  // --- actions ------------------------------------------------------------
  cvec apply(const cvec& v, Apply mode) const;
  cvec operator()(const cvec& v) const { return apply(v, Apply::forward); }

  // Materialize the action as a dense matrix (guarded by a size limit).
  Eigen::MatrixXcd to_dense(Apply mode = Apply::forward) const;

  // k-th column of T (resp. T~) without materializing the whole matrix.
  cvec column(std::size_t k) const;
  cvec tilde_column(std::size_t k) const;

  std::string describe() const;

 private:
  explicit TransformOperator(std::shared_ptr<const detail::OpImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::OpImpl> impl_;

  friend TransformOperator compose(const TransformOperator&,
                                   const TransformOperator&);
  friend SingularBounds singular_bounds(const TransformOperator&);
  friend ColumnNorms column_norms(const TransformOperator&);
  friend class detail::OpImpl;
};

// T = phi . pinv(psi): both factors act on the same signal space.
// Uses the spectral fast path when psi is a DFT and phi is circulant.
TransformOperator compose(const TransformOperator& phi,
                          const TransformOperator& psi);

SingularBounds singular_bounds(const TransformOperator& op);

ColumnNorms column_norms(const TransformOperator& op);

// Dense-materialization guard: operators beyond this entry count must stay
// structured.
inline constexpr std::size_t kDenseEntryLimit = std::size_t{1} << 24;

}  // namespace tsparse
