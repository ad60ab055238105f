#pragma once

/**
 * @file modal.hpp
 * @brief Multi-signal matrix pencil engine.
 *
 * Streams of one channel are stacked as block Hankel matrices, truncated to
 * rank p with an SVD, and the p common modes are read off the shift structure
 * of the dominant right singular subspace. Residues come from a per-stream
 * Vandermonde least-squares solve.
 *
 * Stream sets are passed as (m x N) matrices, one stream per row.
 */

#include "evid/core.hpp"

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evid {

struct PencilConfig {
  int order_p{6};
  std::optional<int> pencil_L;  ///< nullopt = auto (N / 2)
  double error_threshold{0.01};
  int p_max{20};

  /// Pencil parameter for a window of N samples.
  [[nodiscard]] int resolve_L(Eigen::Index num_samples) const;
};

/// Fit diagnostics for one channel group.
struct PencilDiagnostics {
  Eigen::VectorXd singular_values;   ///< descending
  std::vector<double> E_p_curve;     ///< E_p for p = 1..p_max
  std::vector<double> per_stream_E_i;
};

/// Thin spectral summary of a (stacked) Hankel matrix.
struct HankelSpectrum {
  Eigen::VectorXd singular_values;  ///< descending
  Eigen::MatrixXd right_vectors;    ///< columns pair with singular_values
  double frobenius_norm{0.0};
};

struct RankTruncation {
  Eigen::MatrixXd approximation;  ///< best rank-p approximation H_p
  double E_p{0.0};
  Eigen::VectorXd singular_values;
  bool degenerate{false};  ///< input was the zero matrix
};

struct PencilRoots {
  Eigen::VectorXcd z;  ///< nonzero eigenvalues, descending magnitude
  bool underdetermined{false};
};

struct StreamErrors {
  std::vector<double> errors;
  std::vector<bool> degenerate;  ///< stream norm below 1e-12, error reported as 0
};

/// (N - L) x (L + 1) Hankel matrix with entry (r, c) = samples[r + c]. Requires 1 <= L <= N - 2.
[[nodiscard]] Eigen::MatrixXd hankel_single(std::span<const double> samples, int L);

/// Vertical concatenation of hankel_single for each row of `streams`.
[[nodiscard]] Eigen::MatrixXd hankel_stacked(const Eigen::MatrixXd& streams, int L);

/// Singular values and right singular vectors, via QR first when the matrix is tall.
[[nodiscard]] HankelSpectrum hankel_spectrum(const Eigen::MatrixXd& H);

/// ||H - H_p||_F / ||H||_F from a spectrum; 0 for the zero matrix.
[[nodiscard]] double rank_error(const HankelSpectrum& spectrum, int p);

/// rank_error for p = 1..p_max (clamped to the available rank). Non-increasing.
[[nodiscard]] std::vector<double> rank_error_curve(const HankelSpectrum& spectrum, int p_max);

[[nodiscard]] RankTruncation rank_p_truncate(const Eigen::MatrixXd& H, int p);

/// Generalized eigenvalues of (H2, H1), where H1/H2 are the first/last L columns of `Hp`,
/// computed as eigenvalues of pinv_p(H1) * H2. Keeps the p of largest magnitude.
[[nodiscard]] PencilRoots pencil_eigenvalues(const Eigen::MatrixXd& Hp, int p);

/// Same eigenvalues obtained from the p dominant right singular vectors of H:
/// eig(pinv(V1) * V2) with V1/V2 the first/last L rows of V_p.
[[nodiscard]] PencilRoots pencil_eigenvalues_from_basis(const Eigen::MatrixXd& right_vectors, int p);

/// Least-squares residues (m x p) for Vandermonde model y_i(n) = sum_k R_ik z_k^n.
/// Throws InvalidInput when two z values coincide within 1e-10.
[[nodiscard]] Eigen::MatrixXcd solve_residues(const Eigen::MatrixXd& streams, const Eigen::VectorXcd& z);

/// y_i(n) = Re{ sum_k R_ik z_k^n } for n = 0..N-1; returns (m x N).
[[nodiscard]] Eigen::MatrixXd reconstruct(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& residues,
                                          Eigen::Index num_samples);

/// E_i = ||yhat_i - y_i|| / ||y_i|| per row.
[[nodiscard]] StreamErrors reconstruction_errors(const Eigen::MatrixXd& original,
                                                 const Eigen::MatrixXd& reconstructed);

/// Converts pencil roots to (sigma, omega) modes, merging conjugate pairs.
[[nodiscard]] std::vector<Mode> modes_from_roots(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& residues,
                                                 double sample_period);

/// Orders modes by descending average residue (excluded streams skipped),
/// then larger omega, then larger sigma.
void sort_modes_by_residue(std::vector<Mode>& modes, const std::vector<bool>& excluded = {});

/// Rebuilds the (m x N) modal signal from a decomposition's modes.
[[nodiscard]] Eigen::MatrixXd synthesize(const ModalDecomposition& dec, double sample_period,
                                         Eigen::Index num_samples);

/// Full pipeline for one channel group of (already detrended) streams.
[[nodiscard]] ModalDecomposition decompose_channel(const Eigen::MatrixXd& streams, const PencilConfig& cfg,
                                                   double sample_period);

/// decompose_channel plus the E_p curve up to cfg.p_max.
struct ChannelAnalysis {
  ModalDecomposition decomposition;
  PencilDiagnostics diagnostics;
};
[[nodiscard]] ChannelAnalysis analyze_channel(const Eigen::MatrixXd& streams, const PencilConfig& cfg,
                                              double sample_period);

struct OrderSelection {
  int p{1};
  bool satisfied{true};  ///< false when p_max was returned without meeting the threshold
  std::vector<std::string> warnings;
};

/// Smallest p for which E_p and every E_i stay within cfg.error_threshold for all
/// events and channels. Events are used as given (detrend beforehand if needed).
/// An empty `channels` list means every channel present in each event.
[[nodiscard]] OrderSelection select_model_order(const std::vector<EventRecord>& events, const PencilConfig& cfg,
                                                const std::vector<ChannelKind>& channels = {});

}  // namespace evid
