#include "tsparse/linop.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tsparse/fft.hpp"

namespace tsparse {

namespace {

constexpr double kRankTol = 1e-12;

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  int l = 0;
  while ((std::size_t{1} << l) < n) ++l;
  if ((std::size_t{1} << l) != n)
    throw std::invalid_argument("dimension must be a power of two");
  return l;
}

cvec spectrum_of(const cvec& kernel, std::size_t n1, std::size_t n2) {
  if (kernel.size() != n1 * n2)
    throw std::invalid_argument("kernel size does not match grid");
  cvec lambda = kernel;
  fft::forward(lambda, n1, n2);  // unnormalized DFT == sqrt(n) * Psi * phi
  return lambda;
}

// Single analysis sweep: pairwise averages to the front, differences behind.
void haar_step(cxd* v, std::size_t m, cvec& scratch) {
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::size_t half = m / 2;
  for (std::size_t i = 0; i < half; ++i) {
    scratch[i] = (v[2 * i] + v[2 * i + 1]) * inv_sqrt2;
    scratch[half + i] = (v[2 * i] - v[2 * i + 1]) * inv_sqrt2;
  }
  std::copy(scratch.begin(), scratch.begin() + m, v);
}

void haar_unstep(cxd* v, std::size_t m, cvec& scratch) {
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::size_t half = m / 2;
  for (std::size_t i = 0; i < half; ++i) {
    scratch[2 * i] = (v[i] + v[half + i]) * inv_sqrt2;
    scratch[2 * i + 1] = (v[i] - v[half + i]) * inv_sqrt2;
  }
  std::copy(scratch.begin(), scratch.begin() + m, v);
}

void haar_forward(cxd* v, std::size_t n, int level, cvec& scratch) {
  std::size_t m = n;
  for (int l = 0; l < level; ++l, m /= 2) haar_step(v, m, scratch);
}

void haar_inverse(cxd* v, std::size_t n, int level, cvec& scratch) {
  std::size_t m = n >> (level - 1);
  for (int l = 0; l < level; ++l, m *= 2) haar_unstep(v, m, scratch);
}

}  // namespace

double ColumnNorms::one_to_two() const {
  return col2.empty() ? 0.0 : *std::max_element(col2.begin(), col2.end());
}

double ColumnNorms::pinv_two_to_inf() const {
  return tilde_col2.empty()
             ? 0.0
             : *std::max_element(tilde_col2.begin(), tilde_col2.end());
}

namespace detail {

class OpImpl {
 public:
  OpImpl(std::size_t n_in, std::size_t n_out, OpKind kind, bool ortho)
      : n_in_(n_in), n_out_(n_out), kind_(kind), ortho_(ortho) {}
  virtual ~OpImpl() = default;

  std::size_t in_dim() const { return n_in_; }
  std::size_t out_dim() const { return n_out_; }
  OpKind kind() const { return kind_; }
  bool orthonormal() const { return ortho_; }

  virtual cvec apply(const cvec& v, Apply mode) const = 0;

  virtual const std::vector<cvec>* spectra() const { return nullptr; }
  virtual std::size_t grid_rows() const { return n_in_; }
  virtual std::size_t grid_cols() const { return 1; }
  virtual std::vector<double> gram_diagonal() const {
    if (ortho_) return std::vector<double>(n_in_, 1.0);
    return {};
  }
  virtual std::pair<double, double> gram_eigen_extremes() const {
    if (ortho_) return {1.0, 1.0};
    return {0.0, 0.0};
  }
  virtual bool fast_column_norms(ColumnNorms&) const { return false; }
  virtual std::string name() const = 0;

  void check_dim(const cvec& v, Apply mode) const {
    std::size_t want =
        (mode == Apply::forward || mode == Apply::tilde) ? n_in_ : n_out_;
    if (v.size() != want) {
      std::ostringstream os;
      os << name() << ": dimension mismatch, got " << v.size() << ", want "
         << want;
      throw std::invalid_argument(os.str());
    }
  }

  static TransformOperator wrap(std::shared_ptr<const OpImpl> p);

 private:
  std::size_t n_in_, n_out_;
  OpKind kind_;
  bool ortho_;
};

TransformOperator OpImpl::wrap(std::shared_ptr<const OpImpl> p) {
  return TransformOperator(std::move(p));
}

namespace {

class DenseImpl final : public OpImpl {
 public:
  explicit DenseImpl(Eigen::MatrixXcd a)
      : OpImpl(static_cast<std::size_t>(a.cols()),
               static_cast<std::size_t>(a.rows()), OpKind::dense,
               /*ortho=*/false),
        a_(std::move(a)) {
    if (a_.size() == 0) throw std::invalid_argument("dense: empty matrix");
  }

  const Eigen::MatrixXcd& matrix() const { return a_; }

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    Eigen::Map<const Eigen::VectorXcd> x(v.data(),
                                         static_cast<Eigen::Index>(v.size()));
    Eigen::VectorXcd y;
    switch (mode) {
      case Apply::forward:
        y = a_ * x;
        break;
      case Apply::adjoint:
        y = a_.adjoint() * x;
        break;
      case Apply::pinv: {
        const Svd& s = svd();
        y = s.v * (s.inv_sigma.asDiagonal() * (s.u.adjoint() * x));
        break;
      }
      case Apply::tilde: {
        const Svd& s = svd();
        y = s.u * (s.inv_sigma.asDiagonal() * (s.v.adjoint() * x));
        break;
      }
    }
    return cvec(y.data(), y.data() + y.size());
  }

  std::string name() const override { return "dense"; }

  struct Svd {
    Eigen::MatrixXcd u, v;
    Eigen::VectorXd sigma;      // all singular values, descending
    Eigen::VectorXd inv_sigma;  // zero entries excluded from inversion
    Eigen::Index rank = 0;
  };

  const Svd& svd() const {
    std::call_once(svd_once_, [this] {
      Eigen::JacobiSVD<Eigen::MatrixXcd> dec(
          a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd_.u = dec.matrixU();
      svd_.v = dec.matrixV();
      svd_.sigma = dec.singularValues();
      double tol = kRankTol * (svd_.sigma.size() ? svd_.sigma(0) : 0.0);
      svd_.inv_sigma.resize(svd_.sigma.size());
      for (Eigen::Index i = 0; i < svd_.sigma.size(); ++i) {
        bool keep = svd_.sigma(i) > tol;
        svd_.inv_sigma(i) = keep ? 1.0 / svd_.sigma(i) : 0.0;
        if (keep) svd_.rank = i + 1;
      }
    });
    return svd_;
  }

 private:
  Eigen::MatrixXcd a_;
  mutable Svd svd_;
  mutable std::once_flag svd_once_;
};

class DftImpl final : public OpImpl {
 public:
  DftImpl(std::size_t n1, std::size_t n2, OpKind kind)
      : OpImpl(n1 * n2, n1 * n2, kind, /*ortho=*/true), n1_(n1), n2_(n2) {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("dft: zero dimension");
  }

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    cvec out = v;
    double scale = 1.0 / std::sqrt(static_cast<double>(in_dim()));
    if (mode == Apply::forward || mode == Apply::tilde) {
      fft::forward(out, n1_, n2_);
    } else {
      fft::inverse(out, n1_, n2_);
    }
    for (auto& z : out) z *= scale;
    return out;
  }

  bool fast_column_norms(ColumnNorms& cn) const override {
    std::size_t n = in_dim();
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    cn.col2.assign(n, 1.0);
    cn.tilde_col2.assign(n, 1.0);
    cn.colinf.assign(n, inv_sqrt_n);
    cn.tilde_colinf.assign(n, inv_sqrt_n);
    return true;
  }

  std::size_t grid_rows() const override { return n1_; }
  std::size_t grid_cols() const override { return n2_; }
  std::string name() const override { return n2_ == 1 ? "dft" : "dft2"; }

 private:
  std::size_t n1_, n2_;
};

class HaarImpl final : public OpImpl {
 public:
  HaarImpl(std::size_t n, int level)
      : OpImpl(n, n, OpKind::haar, /*ortho=*/true), level_(level) {
    if (level < 1) throw std::invalid_argument("haar: level must be >= 1");
    if (n % (std::size_t{1} << level) != 0)
      throw std::invalid_argument("haar: level too deep for n");
  }

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    cvec out = v;
    cvec scratch(out.size());
    if (mode == Apply::forward || mode == Apply::tilde) {
      haar_forward(out.data(), out.size(), level_, scratch);
    } else {
      haar_inverse(out.data(), out.size(), level_, scratch);
    }
    return out;
  }

  std::string name() const override { return "haar"; }

 private:
  int level_;
};

class Haar2Impl final : public OpImpl {
 public:
  Haar2Impl(std::size_t n1, std::size_t n2)
      : OpImpl(n1 * n2, n1 * n2, OpKind::haar2, /*ortho=*/true),
        n1_(n1),
        n2_(n2),
        l1_(log2_exact(n1)),
        l2_(log2_exact(n2)) {}

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    cvec out = v;
    cvec scratch(std::max(n1_, n2_));
    cvec row(n2_);
    bool fwd = (mode == Apply::forward || mode == Apply::tilde);
    // W_{n2} (x) W_{n1} on a column-major n1 x n2 grid: 1D transform down
    // every column, then along every row.
    for (std::size_t j = 0; j < n2_; ++j) {
      cxd* col = out.data() + j * n1_;
      if (fwd)
        haar_forward(col, n1_, l1_, scratch);
      else
        haar_inverse(col, n1_, l1_, scratch);
    }
    for (std::size_t i = 0; i < n1_; ++i) {
      for (std::size_t j = 0; j < n2_; ++j) row[j] = out[i + j * n1_];
      if (fwd)
        haar_forward(row.data(), n2_, l2_, scratch);
      else
        haar_inverse(row.data(), n2_, l2_, scratch);
      for (std::size_t j = 0; j < n2_; ++j) out[i + j * n1_] = row[j];
    }
    return out;
  }

  std::size_t grid_rows() const override { return n1_; }
  std::size_t grid_cols() const override { return n2_; }
  std::string name() const override { return "haar2"; }

 private:
  std::size_t n1_, n2_;
  int l1_, l2_;
};

// Circular convolutions (possibly a bank of them), acting on the signal
// domain. All actions reduce to pointwise spectral multipliers.
class CirculantImpl final : public OpImpl {
 public:
  CirculantImpl(std::vector<cvec> spectra, std::size_t n1, std::size_t n2,
                OpKind kind)
      : OpImpl(n1 * n2, spectra.size() * n1 * n2, kind, /*ortho=*/false),
        spectra_(std::move(spectra)),
        n1_(n1),
        n2_(n2) {
    gram_.assign(in_dim(), 0.0);
    for (const auto& lam : spectra_) {
      if (lam.size() != in_dim())
        throw std::invalid_argument("circulant: spectrum size mismatch");
      for (std::size_t k = 0; k < lam.size(); ++k) gram_[k] += std::norm(lam[k]);
    }
    double top = *std::max_element(gram_.begin(), gram_.end());
    null_tol_ = kRankTol * kRankTol * top;
  }

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    std::size_t n = in_dim();
    std::size_t ell = spectra_.size();
    double inv_n = 1.0 / static_cast<double>(n);
    if (mode == Apply::forward || mode == Apply::tilde) {
      cvec f = v;
      fft::forward(f, n1_, n2_);
      cvec out(ell * n);
      cvec band(n);
      for (std::size_t j = 0; j < ell; ++j) {
        for (std::size_t k = 0; k < n; ++k)
          band[k] = multiplier(j, k, mode) * f[k];
        fft::inverse(band, n1_, n2_);
        for (std::size_t k = 0; k < n; ++k) out[j * n + k] = band[k] * inv_n;
      }
      return out;
    }
    // adjoint / pinv: accumulate conj-multiplied bands in frequency space
    cvec acc(n, cxd{0.0, 0.0});
    cvec band(n);
    for (std::size_t j = 0; j < ell; ++j) {
      std::copy(v.begin() + j * n, v.begin() + (j + 1) * n, band.begin());
      fft::forward(band, n1_, n2_);
      for (std::size_t k = 0; k < n; ++k)
        acc[k] += std::conj(multiplier(j, k, mode)) * band[k];
    }
    fft::inverse(acc, n1_, n2_);
    for (auto& z : acc) z *= inv_n;
    return acc;
  }

  // Effective per-band multiplier for each action.
  //   forward: lambda_j      tilde: lambda_j / s      (both C^n -> C^{ln})
  //   adjoint: lambda_j      pinv:  lambda_j / s      (conjugated in apply)
  cxd multiplier(std::size_t j, std::size_t k, Apply mode) const {
    cxd lam = spectra_[j][k];
    if (mode == Apply::forward || mode == Apply::adjoint) return lam;
    return gram_[k] > null_tol_ ? lam / gram_[k] : cxd{0.0, 0.0};
  }

  const std::vector<cvec>* spectra() const override { return &spectra_; }
  std::vector<double> gram_diagonal() const override { return {}; }
  std::pair<double, double> gram_eigen_extremes() const override {
    auto [lo, hi] = std::minmax_element(gram_.begin(), gram_.end());
    return {*lo, *hi};
  }
  std::size_t grid_rows() const override { return n1_; }
  std::size_t grid_cols() const override { return n2_; }
  const std::vector<double>& gram() const { return gram_; }
  double null_tol() const { return null_tol_; }
  std::string name() const override { return "circulant"; }

 private:
  std::vector<cvec> spectra_;
  std::size_t n1_, n2_;
  std::vector<double> gram_;  // s[k] = sum_j |lambda_j[k]|^2
  double null_tol_;
};

// T = Phi Psi^dagger with Psi the (unitary) DFT and Phi circulant:
// T = (I_l (x) Psi*) [diag(lambda_1); ...; diag(lambda_l)].
class SpectralComposedImpl final : public OpImpl {
 public:
  SpectralComposedImpl(std::vector<cvec> spectra, std::size_t n1,
                       std::size_t n2)
      : OpImpl(n1 * n2, spectra.size() * n1 * n2, OpKind::composed,
               detect_ortho(spectra)),
        spectra_(std::move(spectra)),
        n1_(n1),
        n2_(n2) {
    gram_.assign(in_dim(), 0.0);
    for (const auto& lam : spectra_)
      for (std::size_t k = 0; k < lam.size(); ++k) gram_[k] += std::norm(lam[k]);
    double top = *std::max_element(gram_.begin(), gram_.end());
    null_tol_ = kRankTol * kRankTol * top;
  }

  static bool detect_ortho(const std::vector<cvec>& spectra) {
    if (spectra.size() != 1) return false;
    for (const auto& z : spectra[0])
      if (std::abs(std::abs(z) - 1.0) > 1e-12) return false;
    return true;
  }

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    std::size_t n = in_dim();
    std::size_t ell = spectra_.size();
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    if (mode == Apply::forward || mode == Apply::tilde) {
      cvec out(ell * n);
      cvec band(n);
      for (std::size_t j = 0; j < ell; ++j) {
        for (std::size_t k = 0; k < n; ++k)
          band[k] = multiplier(j, k, mode) * v[k];
        fft::inverse(band, n1_, n2_);
        for (std::size_t k = 0; k < n; ++k)
          out[j * n + k] = band[k] * inv_sqrt_n;
      }
      return out;
    }
    cvec acc(n, cxd{0.0, 0.0});
    cvec band(n);
    for (std::size_t j = 0; j < ell; ++j) {
      std::copy(v.begin() + j * n, v.begin() + (j + 1) * n, band.begin());
      fft::forward(band, n1_, n2_);
      for (std::size_t k = 0; k < n; ++k)
        acc[k] += std::conj(multiplier(j, k, mode)) * band[k] * inv_sqrt_n;
    }
    return acc;
  }

  cxd multiplier(std::size_t j, std::size_t k, Apply mode) const {
    cxd lam = spectra_[j][k];
    if (mode == Apply::forward || mode == Apply::adjoint) return lam;
    return gram_[k] > null_tol_ ? lam / gram_[k] : cxd{0.0, 0.0};
  }

  bool fast_column_norms(ColumnNorms& cn) const override {
    std::size_t n = in_dim();
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    cn.col2.resize(n);
    cn.tilde_col2.resize(n);
    cn.colinf.resize(n);
    cn.tilde_colinf.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = gram_[k];
      double peak = 0.0;
      for (const auto& lam : spectra_) peak = std::max(peak, std::abs(lam[k]));
      cn.col2[k] = std::sqrt(s);
      cn.colinf[k] = peak * inv_sqrt_n;
      bool null = s <= null_tol_;
      cn.tilde_col2[k] = null ? 0.0 : 1.0 / std::sqrt(s);
      cn.tilde_colinf[k] = null ? 0.0 : (peak / s) * inv_sqrt_n;
    }
    return true;
  }

  const std::vector<cvec>* spectra() const override { return &spectra_; }
  std::vector<double> gram_diagonal() const override { return gram_; }
  std::pair<double, double> gram_eigen_extremes() const override {
    auto [lo, hi] = std::minmax_element(gram_.begin(), gram_.end());
    return {*lo, *hi};
  }
  std::size_t grid_rows() const override { return n1_; }
  std::size_t grid_cols() const override { return n2_; }
  const std::vector<double>& gram() const { return gram_; }
  double null_tol() const { return null_tol_; }
  std::string name() const override { return "spectral-composed"; }

 private:
  std::vector<cvec> spectra_;
  std::size_t n1_, n2_;
  std::vector<double> gram_;
  double null_tol_;
};

// T = Phi Psi* for a unitary square Psi and arbitrary Phi:
//   T^dagger = Psi Phi^dagger and T~ = Phi~ Psi*.
class UnitaryPsiComposedImpl final : public OpImpl {
 public:
  UnitaryPsiComposedImpl(std::shared_ptr<const OpImpl> phi,
                         std::shared_ptr<const OpImpl> psi)
      : OpImpl(psi->out_dim(), phi->out_dim(), OpKind::composed,
               phi->orthonormal() && psi->orthonormal()),
        phi_(std::move(phi)),
        psi_(std::move(psi)) {}

  cvec apply(const cvec& v, Apply mode) const override {
    check_dim(v, mode);
    switch (mode) {
      case Apply::forward:
        return phi_->apply(psi_->apply(v, Apply::pinv), Apply::forward);
      case Apply::adjoint:
        return psi_->apply(phi_->apply(v, Apply::adjoint), Apply::forward);
      case Apply::pinv:
        return psi_->apply(phi_->apply(v, Apply::pinv), Apply::forward);
      case Apply::tilde:
        return phi_->apply(psi_->apply(v, Apply::pinv), Apply::tilde);
    }
    throw std::logic_error("unreachable");
  }

  // unitary conjugation preserves the spectrum of Phi*Phi
  std::pair<double, double> gram_eigen_extremes() const override {
    if (orthonormal()) return {1.0, 1.0};
    return phi_->gram_eigen_extremes();
  }

  std::string name() const override { return "composed"; }

 private:
  std::shared_ptr<const OpImpl> phi_, psi_;
};

}  // namespace

}  // namespace detail

// --- TransformOperator façade ----------------------------------------------

using detail::OpImpl;

std::size_t TransformOperator::in_dim() const { return impl_->in_dim(); }
std::size_t TransformOperator::out_dim() const { return impl_->out_dim(); }
OpKind TransformOperator::kind() const { return impl_->kind(); }
bool TransformOperator::orthonormal() const { return impl_->orthonormal(); }
bool TransformOperator::has_spectrum() const {
  return impl_->spectra() != nullptr;
}
const std::vector<cvec>& TransformOperator::spectra() const {
  const auto* s = impl_->spectra();
  if (!s) throw std::logic_error("operator has no spectral representation");
  return *s;
}
std::size_t TransformOperator::filter_count() const {
  const auto* s = impl_->spectra();
  return s ? s->size() : 1;
}
std::size_t TransformOperator::grid_rows() const { return impl_->grid_rows(); }
std::size_t TransformOperator::grid_cols() const { return impl_->grid_cols(); }
std::vector<double> TransformOperator::gram_diagonal() const {
  return impl_->gram_diagonal();
}
std::pair<double, double> TransformOperator::gram_eigen_extremes() const {
  return impl_->gram_eigen_extremes();
}

cvec TransformOperator::apply(const cvec& v, Apply mode) const {
  return impl_->apply(v, mode);
}

Eigen::MatrixXcd TransformOperator::to_dense(Apply mode) const {
  std::size_t ncols =
      (mode == Apply::forward || mode == Apply::tilde) ? in_dim() : out_dim();
  std::size_t nrows =
      (mode == Apply::forward || mode == Apply::tilde) ? out_dim() : in_dim();
  if (nrows * ncols > kDenseEntryLimit)
    throw std::invalid_argument("operator too large to materialize densely");
  Eigen::MatrixXcd a(nrows, ncols);
  cvec e(ncols, cxd{0.0, 0.0});
  for (std::size_t k = 0; k < ncols; ++k) {
    e[k] = 1.0;
    cvec col = apply(e, mode);
    for (std::size_t i = 0; i < nrows; ++i)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
    e[k] = 0.0;
  }
  return a;
}

cvec TransformOperator::column(std::size_t k) const {
  cvec e(in_dim(), cxd{0.0, 0.0});
  e.at(k) = 1.0;
  return apply(e, Apply::forward);
}

cvec TransformOperator::tilde_column(std::size_t k) const {
  cvec e(in_dim(), cxd{0.0, 0.0});
  e.at(k) = 1.0;
  return apply(e, Apply::tilde);
}

std::string TransformOperator::describe() const {
  std::ostringstream os;
  os << impl_->name() << " " << out_dim() << "x" << in_dim();
  return os.str();
}

// --- factories --------------------------------------------------------------

TransformOperator TransformOperator::dense(Eigen::MatrixXcd a) {
  return OpImpl::wrap(std::make_shared<detail::DenseImpl>(std::move(a)));
}

TransformOperator TransformOperator::dft(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dft: n must be positive");
  return OpImpl::wrap(std::make_shared<detail::DftImpl>(n, 1, OpKind::dft));
}

TransformOperator TransformOperator::dft2(std::size_t n1, std::size_t n2) {
  if (n1 == 0 || n2 == 0)
    throw std::invalid_argument("dft2: dimensions must be positive");
  return OpImpl::wrap(std::make_shared<detail::DftImpl>(n1, n2, OpKind::dft2));
}

TransformOperator TransformOperator::haar(std::size_t n, int level) {
  return OpImpl::wrap(std::make_shared<detail::HaarImpl>(n, level));
}

TransformOperator TransformOperator::haar2(std::size_t n1, std::size_t n2) {
  if (!is_pow2(n1) || !is_pow2(n2))
    throw std::invalid_argument("haar2: dimensions must be powers of two");
  return OpImpl::wrap(std::make_shared<detail::Haar2Impl>(n1, n2));
}

TransformOperator TransformOperator::circulant(const cvec& kernel) {
  std::size_t n = kernel.size();
  if (n == 0) throw std::invalid_argument("circulant: empty kernel");
  std::vector<cvec> spec{spectrum_of(kernel, n, 1)};
  return OpImpl::wrap(std::make_shared<detail::CirculantImpl>(
      std::move(spec), n, 1, OpKind::circulant));
}

TransformOperator TransformOperator::circulant2(const cvec& kernel,
                                                std::size_t n1,
                                                std::size_t n2) {
  std::vector<cvec> spec{spectrum_of(kernel, n1, n2)};
  return OpImpl::wrap(std::make_shared<detail::CirculantImpl>(
      std::move(spec), n1, n2, OpKind::circulant));
}

TransformOperator TransformOperator::circulant_stack(
    const std::vector<cvec>& kernels, std::size_t n1, std::size_t n2) {
  if (kernels.empty())
    throw std::invalid_argument("circulant_stack: no kernels");
  std::vector<cvec> spec;
  spec.reserve(kernels.size());
  for (const auto& k : kernels) spec.push_back(spectrum_of(k, n1, n2));
  return OpImpl::wrap(std::make_shared<detail::CirculantImpl>(
      std::move(spec), n1, n2, OpKind::circulant_stack));
}

TransformOperator TransformOperator::identity(std::size_t n) {
  cvec e1(n, cxd{0.0, 0.0});
  e1[0] = 1.0;
  return circulant(e1);
}

TransformOperator TransformOperator::finite_difference_1d(std::size_t n) {
  if (n < 2) throw std::invalid_argument("finite difference needs n >= 2");
  cvec kernel(n, cxd{0.0, 0.0});
  kernel[0] = 1.0;
  kernel[1] = -1.0;
  std::vector<cvec> spec{spectrum_of(kernel, n, 1)};
  return OpImpl::wrap(std::make_shared<detail::CirculantImpl>(
      std::move(spec), n, 1, OpKind::finite_diff_1d));
}

TransformOperator TransformOperator::finite_difference_2d(std::size_t n1,
                                                          std::size_t n2) {
  if (n1 < 2 || n2 < 2)
    throw std::invalid_argument("finite difference needs n1, n2 >= 2");
  // vertical block (I_{n2} (x) Phi_{TV,n1}) first, then horizontal
  cvec kv(n1 * n2, cxd{0.0, 0.0}), kh(n1 * n2, cxd{0.0, 0.0});
  kv[0] = 1.0;
  kv[1] = -1.0;       // offset (1, 0)
  kh[0] = 1.0;
  kh[n1] = -1.0;      // offset (0, 1)
  std::vector<cvec> spec{spectrum_of(kv, n1, n2), spectrum_of(kh, n1, n2)};
  return OpImpl::wrap(std::make_shared<detail::CirculantImpl>(
      std::move(spec), n1, n2, OpKind::finite_diff_2d));
}

// --- composition -------------------------------------------------------------

TransformOperator compose(const TransformOperator& phi,
                          const TransformOperator& psi) {
  if (phi.in_dim() != psi.in_dim())
    throw std::invalid_argument("compose: operators act on different spaces");

  bool psi_is_dft = psi.kind() == OpKind::dft || psi.kind() == OpKind::dft2;
  if (psi_is_dft && phi.has_spectrum() &&
      phi.grid_rows() == psi.grid_rows() &&
      phi.grid_cols() == psi.grid_cols()) {
    return OpImpl::wrap(std::make_shared<detail::SpectralComposedImpl>(
        phi.spectra(), phi.grid_rows(), phi.grid_cols()));
  }

  if (psi.orthonormal() && psi.in_dim() == psi.out_dim()) {
    return OpImpl::wrap(std::make_shared<detail::UnitaryPsiComposedImpl>(
        phi.impl_, psi.impl_));
  }

  // general case: materialize T = Phi pinv(Psi)
  SingularBounds sb = singular_bounds(psi);
  if (sb.sigma_min <= kRankTol * sb.sigma_max)
    throw std::invalid_argument("compose: psi is not of full column rank");
  Eigen::MatrixXcd pinv_psi = psi.to_dense(Apply::pinv);
  Eigen::MatrixXcd phid = phi.to_dense(Apply::forward);
  return TransformOperator::dense(phid * pinv_psi);
}

// --- spectral utilities -------------------------------------------------------

namespace {

SingularBounds bounds_from_gram(const std::vector<double>& gram, double tol) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double s : gram) {
    if (s <= tol) continue;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (hi == 0.0) throw std::invalid_argument("operator is identically zero");
  return {std::sqrt(lo), std::sqrt(hi)};
}

// Largest eigenvalue of the PSD map v -> T*(T v) by power iteration.
double top_gram_eigenvalue(const TransformOperator& op, double tol) {
  std::size_t n = op.in_dim();
  cvec v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  };
  for (auto& z : v) z = cxd{next(), next()};
  double prev = 0.0;
  for (int it = 0; it < 2000; ++it) {
    cvec w = op.apply(op.apply(v, Apply::forward), Apply::adjoint);
    double norm = 0.0;
    for (const auto& z : w) norm += std::norm(z);
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 4 && std::abs(norm - prev) <= tol * std::max(1.0, norm))
      return norm;
    prev = norm;
  }
  return prev;
}

}  // namespace

SingularBounds singular_bounds(const TransformOperator& op) {
  if (op.orthonormal()) return {1.0, 1.0};
  if (op.has_spectrum()) {
    const auto& spec = op.spectra();
    std::size_t n = op.in_dim();
    std::vector<double> gram(n, 0.0);
    for (const auto& lam : spec)
      for (std::size_t k = 0; k < n; ++k) gram[k] += std::norm(lam[k]);
    double top = *std::max_element(gram.begin(), gram.end());
    return bounds_from_gram(gram, kRankTol * kRankTol * top);
  }
  std::size_t n = op.in_dim(), N = op.out_dim();
  if (std::max(n, N) <= 4096 && n * N <= kDenseEntryLimit) {
    Eigen::MatrixXcd a = op.to_dense();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const auto& s = svd.singularValues();
    return {s(s.size() - 1), s(0)};
  }
  // large non-structured operator: power iteration on T*T, then on the
  // shifted map sigma_max^2 I - T*T whose top eigenvalue is
  // sigma_max^2 - sigma_min^2
  double top = top_gram_eigenvalue(op, 1e-8);
  std::size_t dim = op.in_dim();
  cvec v(dim);
  std::uint64_t state = 0x2545f4914f6cdd1dull;
  auto next = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  };
  for (auto& z : v) z = cxd{next(), next()};
  double prev = 0.0, val = 0.0;
  for (int it = 0; it < 2000; ++it) {
    cvec w = op.apply(op.apply(v, Apply::forward), Apply::adjoint);
    for (std::size_t i = 0; i < dim; ++i) w[i] = top * v[i] - w[i];
    double norm = 0.0;
    for (const auto& z : w) norm += std::norm(z);
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / norm;
    val = norm;
    if (it > 4 && std::abs(norm - prev) <= 1e-8 * std::max(1.0, norm)) break;
    prev = norm;
  }
  double smin_sq = std::max(0.0, top - val);
  return {std::sqrt(smin_sq), std::sqrt(top)};
}

ColumnNorms column_norms(const TransformOperator& op) {
  ColumnNorms cn;
  if (op.impl_->fast_column_norms(cn)) return cn;
  std::size_t n = op.in_dim();
  cn.col2.resize(n);
  cn.tilde_col2.resize(n);
  cn.colinf.resize(n);
  cn.tilde_colinf.resize(n);
  auto fill = [&](std::size_t k, const cvec& col, std::vector<double>& two,
                  std::vector<double>& inf) {
    double sq = 0.0, peak = 0.0;
    for (const auto& z : col) {
      sq += std::norm(z);
      peak = std::max(peak, std::abs(z));
    }
    two[k] = std::sqrt(sq);
    inf[k] = peak;
  };
  for (std::size_t k = 0; k < n; ++k) {
    fill(k, op.column(k), cn.col2, cn.colinf);
    fill(k, op.tilde_column(k), cn.tilde_col2, cn.tilde_colinf);
  }
  return cn;
}

}  // namespace tsparse
