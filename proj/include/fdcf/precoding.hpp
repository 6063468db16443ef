/**
 * @file precoding.hpp
 * @brief Transmit basis and receive filter constructions.
 *
 * Downlink weights are represented as a fixed basis (one column per user)
 * scaled by per-user power weights: W = basis * diag(sqrt(omega)). Besides
 * plain zero-forcing and conjugate (MRT/MRC) processing, this includes the
 * orthonormal-basis zero-forcing construction built from an LQ factorisation
 * and its interference-suppressing variant, which projects the downlink
 * channel onto the complement of the dominant aggregated AP-to-AP subspace
 * before forming the basis.
 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdcf {

// Condition-number ceiling for pseudo-inverse and triangular solves.
inline constexpr double kConditionLimit = 1e8;

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

enum class PrecoderLabel { kZf, kOnbZf, kOnbZfPca, kMrt };
enum class ReceiverLabel { kZf, kZfSic, kMrc };

struct PrecoderBasis {
  Eigen::MatrixXcd basis;  // N x K, column k serves downlink user k
  PrecoderLabel label = PrecoderLabel::kZf;
  int pca_rank = 0;  // suppressed subspace dimension (PCA variant only)
};

struct ReceiverSet {
  Eigen::MatrixXcd rows;  // L x N, row l decodes uplink user l
  ReceiverLabel label = ReceiverLabel::kZf;
};

// Antenna index bookkeeping for per-AP blocks of stacked vectors/matrices.
struct ApSelector {
  std::vector<int> antennas;
  std::vector<int> offsets;
  int n_total = 0;

  int count() const { return static_cast<int>(antennas.size()); }
};

inline ApSelector per_ap_selector(const std::vector<int>& antennas) {
  ApSelector sel;
  sel.antennas = antennas;
  sel.offsets.resize(antennas.size());
  int n = 0;
  for (std::size_t m = 0; m < antennas.size(); ++m) {
    if (antennas[m] < 1) throw std::invalid_argument("per_ap_selector: antenna counts must be positive");
    sel.offsets[m] = n;
    n += antennas[m];
  }
  sel.n_total = n;
  return sel;
}

inline double condition_number(const Eigen::MatrixXcd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

/// Zero-forcing transmit basis: H^H (H H^H)^{-1}, so H * basis = I.
inline Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_d) {
  if (h_d.rows() > h_d.cols()) {
    throw std::invalid_argument("zf_precoder: more users than antennas");
  }
  double cond = condition_number(h_d);
  if (!(cond < kConditionLimit)) {
    throw SingularMatrixError("zf_precoder: channel matrix condition number " + std::to_string(cond) +
                              " exceeds limit");
  }
  Eigen::MatrixXcd gram = h_d * h_d.adjoint();
  return gram.ldlt().solve(h_d).adjoint();
}

/// Zero-forcing receive filters: rows of (H^H H)^{-1} H^H, so rows * H = I.
inline Eigen::MatrixXcd zf_receiver(const Eigen::MatrixXcd& h_u) {
  if (h_u.cols() > h_u.rows()) {
    throw std::invalid_argument("zf_receiver: more users than antennas");
  }
  double cond = condition_number(h_u);
  if (!(cond < kConditionLimit)) {
    throw SingularMatrixError("zf_receiver: channel matrix condition number " + std::to_string(cond) +
                              " exceeds limit");
  }
  Eigen::MatrixXcd gram = h_u.adjoint() * h_u;
  return gram.ldlt().solve(h_u.adjoint());
}

inline PrecoderBasis mrt_basis(const Eigen::MatrixXcd& h_d) {
  return {h_d.adjoint(), PrecoderLabel::kMrt, 0};
}

inline ReceiverSet mrc_receiver(const Eigen::MatrixXcd& h_u) {
  return {h_u.adjoint(), ReceiverLabel::kMrc};
}

/// LQ factorisation H = T Q with T lower triangular (positive real diagonal)
/// and Q having orthonormal rows. Computed as the QR of H^H.
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> lq_decompose(const Eigen::MatrixXcd& h) {
  const int k = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  if (k > n) throw std::invalid_argument("lq_decompose: need at least as many columns as rows");
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(h.adjoint());
  Eigen::MatrixXcd q_thin = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  // Fix phases so diag(T) is real positive.
  for (int i = 0; i < k; ++i) {
    std::complex<double> d = r(i, i);
    double mag = std::abs(d);
    if (mag > 0.0) {
      std::complex<double> ph = d / mag;
      r.row(i) *= std::conj(ph);
      q_thin.col(i) *= ph;
    }
  }
  return {r.adjoint(), q_thin.adjoint()};  // T = R^H (lower), Q = Qthin^H
}

/// Inverse of a lower-triangular matrix scaled by its diagonal: returns the
/// unit lower-triangular Ttilde with T * Ttilde = diag(T). Entries follow the
/// back-substitution recursion
///   Ttilde(i,j) = -(1/T(i,i)) * sum_{j'=j}^{i-1} T(i,j') Ttilde(j',j),  i > j.
inline Eigen::MatrixXcd ttilde_inverse(const Eigen::MatrixXcd& t) {
  const int k = static_cast<int>(t.rows());
  if (t.cols() != k) throw std::invalid_argument("ttilde_inverse: matrix must be square");
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    double d = std::abs(t(i, i));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  if (!(dmin > 0.0) || dmax / dmin > kConditionLimit) {
    throw SingularMatrixError("ttilde_inverse: triangular factor is singular or ill conditioned");
  }
  Eigen::MatrixXcd tt = Eigen::MatrixXcd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    tt(j, j) = 1.0;
    for (int i = j + 1; i < k; ++i) {
      std::complex<double> acc = 0.0;
      for (int jp = j; jp < i; ++jp) acc += t(i, jp) * tt(jp, j);
      tt(i, j) = -acc / t(i, i);
    }
  }
  return tt;
}

/// Orthonormal-basis zero-forcing: basis = Q^H Ttilde from the LQ of H_d, so
/// H_d * basis = diag(T) with positive diagonal. Compared with the plain
/// pseudo-inverse this keeps per-column power well conditioned.
inline PrecoderBasis onb_zf_basis(const Eigen::MatrixXcd& h_d) {
  auto [t, q] = lq_decompose(h_d);
  Eigen::MatrixXcd tt = ttilde_inverse(t);
  return {q.adjoint() * tt, PrecoderLabel::kOnbZf, 0};
}

/// Energy-ratio rule for choosing the suppressed subspace dimension: smallest
/// n with (sum of the n largest eigenvalues) / (total) >= delta and n < N-1,
/// else N-1. A zero matrix yields 0.
inline int pca_suppressed_rank(const Eigen::VectorXd& eigs_desc, double delta) {
  const int n_dim = static_cast<int>(eigs_desc.size());
  double total = eigs_desc.sum();
  if (!(total > 0.0)) return 0;
  double acc = 0.0;
  for (int n = 1; n <= n_dim; ++n) {
    acc += eigs_desc(n - 1);
    if (acc / total >= delta && n < n_dim - 1) return n;
  }
  return n_dim - 1;
}

/// Interference-suppressing variant: eigendecompose G_aa^H G_aa, project H_d
/// onto the orthogonal complement of the dominant subspace (dimension chosen
/// by the energy-ratio rule at level delta), then build the orthonormal-basis
/// zero-forcing precoder inside that complement.
inline PrecoderBasis onb_zf_pca_basis(const Eigen::MatrixXcd& h_d, const Eigen::MatrixXcd& g_aa,
                                      double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("onb_zf_pca_basis: delta must lie in (0, 1]");
  }
  const int n = static_cast<int>(h_d.cols());
  const int k = static_cast<int>(h_d.rows());
  if (g_aa.rows() != n || g_aa.cols() != n) {
    throw std::invalid_argument("onb_zf_pca_basis: G_aa must be N x N");
  }
  if (g_aa.norm() == 0.0) {
    PrecoderBasis b = onb_zf_basis(h_d);
    b.label = PrecoderLabel::kOnbZfPca;
    return b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g_aa.adjoint() * g_aa);
  if (es.info() != Eigen::Success) {
    throw SingularMatrixError("onb_zf_pca_basis: eigendecomposition failed");
  }
  Eigen::VectorXd eigs_desc = es.eigenvalues().reverse();
  eigs_desc = eigs_desc.cwiseMax(0.0);  // clamp tiny negative round-off
  int nbar = pca_suppressed_rank(eigs_desc, delta);
  if (k >= n - nbar) {
    throw SingularMatrixError("onb_zf_pca_basis: suppressed rank " + std::to_string(nbar) +
                              " leaves fewer than K+1 usable dimensions");
  }
  PrecoderBasis out;
  out.label = PrecoderLabel::kOnbZfPca;
  out.pca_rank = nbar;
  if (nbar == 0) {
    out.basis = onb_zf_basis(h_d).basis;
    return out;
  }
  Eigen::MatrixXcd u_bar = es.eigenvectors().rightCols(nbar);  // top eigenvectors
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(n, n) - u_bar * u_bar.adjoint();
  Eigen::MatrixXcd h_proj = h_d * proj;
  auto [t, q] = lq_decompose(h_proj);
  double dmax = 0.0;
  for (int i = 0; i < k; ++i) dmax = std::max(dmax, std::abs(t(i, i)));
  for (int i = 0; i < k; ++i) {
    if (std::abs(t(i, i)) <= dmax / kConditionLimit) {
      throw SingularMatrixError("onb_zf_pca_basis: downlink user " + std::to_string(i) +
                                " has no channel component outside the suppressed subspace");
    }
  }
  out.basis = proj * (q.adjoint() * ttilde_inverse(t));
  return out;
}

inline PrecoderBasis zf_precoder_basis(const Eigen::MatrixXcd& h_d) {
  return {zf_precoder(h_d), PrecoderLabel::kZf, 0};
}

inline ReceiverSet zf_receiver_set(const Eigen::MatrixXcd& h_u) {
  return {zf_receiver(h_u), ReceiverLabel::kZf};
}

/// Successive-cancellation zero-forcing: user l is decoded treating users
/// decoded earlier (index < l) as removed and later ones as noise, so its
/// filter is the first row of the pseudo-inverse of [h_l ... h_L].
inline ReceiverSet zf_sic_receivers(const Eigen::MatrixXcd& h_u) {
  const int l_ul = static_cast<int>(h_u.cols());
  ReceiverSet out;
  out.label = ReceiverLabel::kZfSic;
  out.rows.resize(l_ul, h_u.rows());
  for (int l = 0; l < l_ul; ++l) {
    Eigen::MatrixXcd tail = h_u.rightCols(l_ul - l);
    Eigen::MatrixXcd pinv = zf_receiver(tail);
    out.rows.row(l) = pinv.row(0);
  }
  return out;
}

/// Weight recovery: W = basis * diag(sqrt(omega)).
inline Eigen::MatrixXcd make_precoder_matrix(const Eigen::MatrixXcd& basis,
                                             const Eigen::VectorXd& omega) {
  if (basis.cols() != omega.size()) {
    throw std::invalid_argument("make_precoder_matrix: weight count must match basis columns");
  }
  if ((omega.array() < 0.0).any()) {
    throw std::invalid_argument("make_precoder_matrix: weights must be nonnegative");
  }
  return basis * omega.cwiseSqrt().asDiagonal();
}

}  // namespace fdcf
