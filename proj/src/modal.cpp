#include "evid/modal.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace evid {
namespace {

constexpr double kNearZeroRoot = 1e-8;
constexpr double kDuplicateRoot = 1e-10;
constexpr double kPairTolerance = 1e-6;
constexpr double kDegenerateNorm = 1e-12;
constexpr double kRankTolerance = 1e-12;  // relative singular value below which H is rank deficient

double wrap_angle(double a) {
  // std::arg yields [-pi, pi]; fold -pi onto +pi.
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

void sort_roots(std::vector<std::complex<double>>& roots) {
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() > b.real();
  });
}

PencilRoots keep_largest(const Eigen::VectorXcd& eigenvalues, int p) {
  std::vector<std::complex<double>> roots(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  sort_roots(roots);
  PencilRoots out;
  std::vector<std::complex<double>> kept;
  for (const auto& r : roots) {
    if (static_cast<int>(kept.size()) == p) break;
    if (std::abs(r) > kNearZeroRoot) kept.push_back(r);
  }
  out.underdetermined = static_cast<int>(kept.size()) < p;
  out.z = Eigen::Map<Eigen::VectorXcd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  return out;
}

void check_pencil_geometry(Eigen::Index num_samples, int L, int p) {
  if (L < 1 || L > num_samples - 2) {
    throw InvalidInput("pencil parameter L=" + std::to_string(L) + " out of range for N=" +
                       std::to_string(num_samples));
  }
  if (!(p < L && L < num_samples - p)) {
    throw InvalidInput("pencil requires p < L < N - p (p=" + std::to_string(p) + ", L=" + std::to_string(L) +
                       ", N=" + std::to_string(num_samples) + ")");
  }
}

// Everything after the SVD: roots, residues, errors and conjugate merging.
ModalDecomposition decompose_from_spectrum(const Eigen::MatrixXd& streams, const HankelSpectrum& spectrum, int p,
                                           int L, double sample_period, double threshold) {
  ModalDecomposition dec;
  dec.pencil_order_p = p;
  dec.pencil_L = L;
  const auto m = static_cast<std::size_t>(streams.rows());

  if (spectrum.frobenius_norm == 0.0) {
    dec.rank_error_E_p = 0.0;
    dec.reconstruction_errors.assign(m, 0.0);
    dec.degenerate_streams.assign(m, true);
    dec.underdetermined = true;
    dec.low_confidence = true;
    return dec;
  }

  // Directions beyond the numerical rank carry no signal and would yield arbitrary roots.
  int rank = 0;
  const auto& sv = spectrum.singular_values;
  while (rank < sv.size() && sv[rank] > kRankTolerance * sv[0]) ++rank;
  const int usable = std::min({p, static_cast<int>(spectrum.right_vectors.cols()), rank});
  dec.rank_error_E_p = rank_error(spectrum, p);
  dec.low_confidence = dec.rank_error_E_p > threshold;

  PencilRoots roots = pencil_eigenvalues_from_basis(spectrum.right_vectors, usable);
  dec.underdetermined = roots.underdetermined || usable < p;
  if (roots.z.size() == 0) {
    dec.reconstruction_errors.assign(m, 1.0);
    dec.degenerate_streams.assign(m, false);
    return dec;
  }

  const Eigen::MatrixXcd residues = solve_residues(streams, roots.z);
  const Eigen::MatrixXd fitted = reconstruct(roots.z, residues, streams.cols());
  StreamErrors errs = reconstruction_errors(streams, fitted);
  dec.reconstruction_errors = std::move(errs.errors);
  dec.degenerate_streams = std::move(errs.degenerate);
  dec.modes = modes_from_roots(roots.z, residues, sample_period);
  sort_modes_by_residue(dec.modes, dec.degenerate_streams);
  return dec;
}

}  // namespace

int PencilConfig::resolve_L(Eigen::Index num_samples) const {
  return pencil_L.value_or(static_cast<int>(num_samples / 2));
}

Eigen::MatrixXd hankel_single(std::span<const double> samples, int L) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (L < 1 || L > n - 2) {
    throw InvalidInput("hankel_single: L=" + std::to_string(L) + " requires 1 <= L <= N-2 with N=" +
                       std::to_string(n));
  }
  const Eigen::Index rows = n - L;
  Eigen::MatrixXd h(rows, L + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c <= L; ++c) h(r, c) = samples[static_cast<std::size_t>(r + c)];
  }
  return h;
}

Eigen::MatrixXd hankel_stacked(const Eigen::MatrixXd& streams, int L) {
  if (streams.rows() == 0) throw InvalidInput("hankel_stacked: no streams");
  const Eigen::Index n = streams.cols();
  if (L < 1 || L > n - 2) {
    throw InvalidInput("hankel_stacked: L=" + std::to_string(L) + " out of range for N=" + std::to_string(n));
  }
  const Eigen::Index block = n - L;
  Eigen::MatrixXd h(streams.rows() * block, L + 1);
  for (Eigen::Index i = 0; i < streams.rows(); ++i) {
    for (Eigen::Index r = 0; r < block; ++r) {
      h.row(i * block + r) = streams.row(i).segment(r, L + 1);
    }
  }
  return h;
}

HankelSpectrum hankel_spectrum(const Eigen::MatrixXd& H) {
  HankelSpectrum out;
  out.frobenius_norm = H.norm();
  if (H.rows() >= H.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(H);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(H.cols()).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    out.right_vectors = svd.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    out.right_vectors = svd.matrixV();
  }
  return out;
}

double rank_error(const HankelSpectrum& spectrum, int p) {
  if (spectrum.frobenius_norm == 0.0) return 0.0;
  const auto& s = spectrum.singular_values;
  double tail = 0.0;
  double total = 0.0;
  for (Eigen::Index k = s.size() - 1; k >= 0; --k) {
    total += s[k] * s[k];
    if (k >= p) tail += s[k] * s[k];
  }
  if (total == 0.0) return 0.0;
  return std::min(1.0, std::sqrt(tail / total));
}

std::vector<double> rank_error_curve(const HankelSpectrum& spectrum, int p_max) {
  const auto& s = spectrum.singular_values;
  // Suffix sums keep the curve monotone regardless of rounding.
  std::vector<double> suffix(static_cast<std::size_t>(s.size()) + 1, 0.0);
  for (Eigen::Index k = s.size() - 1; k >= 0; --k) {
    suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k) + 1] + s[k] * s[k];
  }
  const double total = suffix.front();
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(std::max(p_max, 0)));
  for (int p = 1; p <= p_max; ++p) {
    if (total == 0.0) {
      curve.push_back(0.0);
      continue;
    }
    const auto idx = static_cast<std::size_t>(std::min<Eigen::Index>(p, s.size()));
    curve.push_back(std::min(1.0, std::sqrt(suffix[idx] / total)));
  }
  return curve;
}

RankTruncation rank_p_truncate(const Eigen::MatrixXd& H, int p) {
  if (p < 1 || p > std::min(H.rows(), H.cols())) {
    throw InvalidInput("rank_p_truncate: p=" + std::to_string(p) + " must be in [1, min(rows, cols)]");
  }
  RankTruncation out;
  const HankelSpectrum spectrum = hankel_spectrum(H);
  out.singular_values = spectrum.singular_values;
  if (spectrum.frobenius_norm == 0.0) {
    out.approximation = H;
    out.E_p = 0.0;
    out.degenerate = true;
    return out;
  }
  const Eigen::MatrixXd vp = spectrum.right_vectors.leftCols(p);
  out.approximation = (H * vp) * vp.transpose();
  out.E_p = rank_error(spectrum, p);
  return out;
}

PencilRoots pencil_eigenvalues(const Eigen::MatrixXd& Hp, int p) {
  const Eigen::Index L = Hp.cols() - 1;
  if (p < 1 || Hp.cols() < p + 1) {
    throw InvalidInput("pencil_eigenvalues: need at least p+1 columns (p=" + std::to_string(p) + ")");
  }
  const Eigen::MatrixXd h1 = Hp.leftCols(L);
  const Eigen::MatrixXd h2 = Hp.rightCols(L);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(h1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index rank = std::min<Eigen::Index>(p, s.size());
  Eigen::Index kept = 0;
  while (kept < rank && s[kept] > s[0] * 1e-14 && s[kept] > 0.0) ++kept;

  Eigen::MatrixXd pencil = Eigen::MatrixXd::Zero(L, L);
  if (kept > 0) {
    // pinv_p(H1) * H2 = V_p S_p^{-1} (U_p^T H2)
    const Eigen::MatrixXd projected = svd.matrixU().leftCols(kept).transpose() * h2;
    const Eigen::VectorXd inv = s.head(kept).cwiseInverse();
    pencil = svd.matrixV().leftCols(kept) * (inv.asDiagonal() * projected);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(pencil, false);
  return keep_largest(es.eigenvalues(), p);
}

PencilRoots pencil_eigenvalues_from_basis(const Eigen::MatrixXd& right_vectors, int p) {
  const Eigen::Index L = right_vectors.rows() - 1;
  if (p < 1 || p > right_vectors.cols() || L < p) {
    throw InvalidInput("pencil_eigenvalues_from_basis: p=" + std::to_string(p) + " incompatible with basis");
  }
  const Eigen::MatrixXd vp = right_vectors.leftCols(p);
  const Eigen::MatrixXd v1 = vp.topRows(L);
  const Eigen::MatrixXd v2 = vp.bottomRows(L);
  const Eigen::MatrixXd shift = v1.completeOrthogonalDecomposition().solve(v2);
  Eigen::EigenSolver<Eigen::MatrixXd> es(shift, false);
  return keep_largest(es.eigenvalues(), p);
}

Eigen::MatrixXcd solve_residues(const Eigen::MatrixXd& streams, const Eigen::VectorXcd& z) {
  if (z.size() == 0) throw InvalidInput("solve_residues: no modes");
  for (Eigen::Index a = 0; a < z.size(); ++a) {
    for (Eigen::Index b = a + 1; b < z.size(); ++b) {
      if (std::abs(z[a] - z[b]) <= kDuplicateRoot) {
        throw InvalidInput("solve_residues: duplicate modes make the Vandermonde system singular");
      }
    }
  }
  const Eigen::Index n = streams.cols();
  Eigen::MatrixXcd vandermonde(n, z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    std::complex<double> power{1.0, 0.0};
    for (Eigen::Index t = 0; t < n; ++t) {
      vandermonde(t, k) = power;
      power *= z[k];
    }
  }
  const Eigen::MatrixXcd rhs = streams.transpose().cast<std::complex<double>>();
  const Eigen::MatrixXcd solution = vandermonde.colPivHouseholderQr().solve(rhs);
  return solution.transpose();
}

Eigen::MatrixXd reconstruct(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& residues, Eigen::Index num_samples) {
  if (residues.cols() != z.size()) throw InvalidInput("reconstruct: residue columns must match mode count");
  Eigen::MatrixXcd powers(z.size(), num_samples);
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    std::complex<double> power{1.0, 0.0};
    for (Eigen::Index t = 0; t < num_samples; ++t) {
      powers(k, t) = power;
      power *= z[k];
    }
  }
  return (residues * powers).real();
}

StreamErrors reconstruction_errors(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstructed) {
  if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols()) {
    throw InvalidInput("reconstruction_errors: shape mismatch");
  }
  StreamErrors out;
  out.errors.reserve(static_cast<std::size_t>(original.rows()));
  out.degenerate.reserve(static_cast<std::size_t>(original.rows()));
  for (Eigen::Index i = 0; i < original.rows(); ++i) {
    const double denom = original.row(i).norm();
    if (denom < kDegenerateNorm) {
      out.errors.push_back(0.0);
      out.degenerate.push_back(true);
    } else {
      out.errors.push_back((reconstructed.row(i) - original.row(i)).norm() / denom);
      out.degenerate.push_back(false);
    }
  }
  return out;
}

std::vector<Mode> modes_from_roots(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& residues,
                                   double sample_period) {
  const Eigen::Index count = z.size();
  std::vector<bool> used(static_cast<std::size_t>(count), false);
  std::vector<Mode> modes;

  auto make_mode = [&](std::complex<double> root, Eigen::Index column, bool conjugate, bool paired) {
    Mode mode;
    mode.damping_sigma = std::log(std::abs(root)) / sample_period;
    mode.angular_freq_omega = std::abs(std::arg(root)) / sample_period;
    mode.paired = paired;
    mode.residues.reserve(static_cast<std::size_t>(residues.rows()));
    for (Eigen::Index i = 0; i < residues.rows(); ++i) {
      const std::complex<double> r = conjugate ? std::conj(residues(i, column)) : residues(i, column);
      mode.residues.push_back({std::abs(r), wrap_angle(std::arg(r))});
    }
    return mode;
  };

  for (Eigen::Index a = 0; a < count; ++a) {
    if (used[static_cast<std::size_t>(a)]) continue;
    used[static_cast<std::size_t>(a)] = true;
    const std::complex<double> za = z[a];
    const double tol = kPairTolerance * std::max(1.0, std::abs(za));

    if (std::abs(za - std::conj(za)) <= tol) {
      modes.push_back(make_mode({za.real(), 0.0}, a, false, false));
      continue;
    }

    Eigen::Index partner = -1;
    double best = tol;
    for (Eigen::Index b = 0; b < count; ++b) {
      if (b == a || used[static_cast<std::size_t>(b)]) continue;
      const double gap = std::abs(za - std::conj(z[b]));
      if (gap <= best) {
        best = gap;
        partner = b;
      }
    }
    if (partner >= 0) {
      used[static_cast<std::size_t>(partner)] = true;
      const Eigen::Index rep = za.imag() >= 0.0 ? a : partner;
      modes.push_back(make_mode(z[rep], rep, false, true));
    } else {
      // Lone complex root: Re{R z^n} == Re{conj(R) conj(z)^n}, so flip to the upper half plane.
      modes.push_back(make_mode(za.imag() >= 0.0 ? za : std::conj(za), a, za.imag() < 0.0, false));
    }
  }
  return modes;
}

void sort_modes_by_residue(std::vector<Mode>& modes, const std::vector<bool>& excluded) {
  std::stable_sort(modes.begin(), modes.end(), [&](const Mode& a, const Mode& b) {
    const double ra = a.average_residue(excluded);
    const double rb = b.average_residue(excluded);
    if (ra != rb) return ra > rb;
    if (a.angular_freq_omega != b.angular_freq_omega) return a.angular_freq_omega > b.angular_freq_omega;
    return a.damping_sigma > b.damping_sigma;
  });
}

Eigen::MatrixXd synthesize(const ModalDecomposition& dec, double sample_period, Eigen::Index num_samples) {
  const auto m = static_cast<Eigen::Index>(dec.num_streams());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, num_samples);
  for (const Mode& mode : dec.modes) {
    const std::complex<double> z =
        std::exp(std::complex<double>(mode.damping_sigma, mode.angular_freq_omega) * sample_period);
    const double factor = mode.paired ? 2.0 : 1.0;
    for (Eigen::Index i = 0; i < m && i < static_cast<Eigen::Index>(mode.residues.size()); ++i) {
      const auto& res = mode.residues[static_cast<std::size_t>(i)];
      std::complex<double> term = std::polar(res.magnitude, res.angle);
      for (Eigen::Index t = 0; t < num_samples; ++t) {
        out(i, t) += factor * term.real();
        term *= z;
      }
    }
  }
  return out;
}

ChannelAnalysis analyze_channel(const Eigen::MatrixXd& streams, const PencilConfig& cfg, double sample_period) {
  const Eigen::Index n = streams.cols();
  const int L = cfg.resolve_L(n);
  check_pencil_geometry(n, L, cfg.order_p);

  const HankelSpectrum spectrum = hankel_spectrum(hankel_stacked(streams, L));
  ChannelAnalysis out;
  out.decomposition =
      decompose_from_spectrum(streams, spectrum, cfg.order_p, L, sample_period, cfg.error_threshold);
  out.diagnostics.singular_values = spectrum.singular_values;
  out.diagnostics.E_p_curve = rank_error_curve(spectrum, cfg.p_max);
  out.diagnostics.per_stream_E_i = out.decomposition.reconstruction_errors;
  return out;
}

ModalDecomposition decompose_channel(const Eigen::MatrixXd& streams, const PencilConfig& cfg,
                                     double sample_period) {
  return analyze_channel(streams, cfg, sample_period).decomposition;
}

OrderSelection select_model_order(const std::vector<EventRecord>& events, const PencilConfig& cfg,
                                  const std::vector<ChannelKind>& channels) {
  if (events.empty()) throw InvalidInput("select_model_order: no events");

  struct Group {
    const Eigen::MatrixXd* streams;
    HankelSpectrum spectrum;
    int L;
    double sample_period;
  };
  std::vector<Group> groups;
  int p_cap = cfg.p_max;
  for (const auto& ev : events) {
    std::vector<ChannelKind> wanted = channels;
    if (wanted.empty()) {
      for (const auto& [kind, _] : ev.channels) wanted.push_back(kind);
    }
    for (ChannelKind kind : wanted) {
      auto it = ev.channels.find(kind);
      if (it == ev.channels.end()) {
        throw InvalidInput("event " + ev.event_id + " lacks channel " + std::string(to_string(kind)));
      }
      const int L = cfg.resolve_L(it->second.cols());
      check_pencil_geometry(it->second.cols(), L, 1);
      Group g{&it->second, hankel_spectrum(hankel_stacked(it->second, L)), L, ev.sample_period()};
      p_cap = std::min({p_cap, static_cast<int>(g.spectrum.right_vectors.cols()), L - 1,
                        static_cast<int>(it->second.cols()) - L - 1});
      groups.push_back(std::move(g));
    }
  }

  OrderSelection out;
  for (int p = 1; p <= p_cap; ++p) {
    bool all_ok = true;
    for (const Group& g : groups) {
      if (rank_error(g.spectrum, p) > cfg.error_threshold) {
        all_ok = false;
        break;
      }
      try {
        const ModalDecomposition dec =
            decompose_from_spectrum(*g.streams, g.spectrum, p, g.L, g.sample_period, cfg.error_threshold);
        const bool fits = std::all_of(dec.reconstruction_errors.begin(), dec.reconstruction_errors.end(),
                                      [&](double e) { return e <= cfg.error_threshold; });
        if (!fits) {
          all_ok = false;
          break;
        }
      } catch (const InvalidInput&) {
        all_ok = false;
        break;
      }
    }
    if (all_ok) {
      out.p = p;
      out.satisfied = true;
      return out;
    }
  }
  out.p = std::max(1, p_cap);
  out.satisfied = false;
  std::ostringstream msg;
  msg << "no model order up to " << out.p << " meets the " << cfg.error_threshold << " error threshold";
  out.warnings.push_back(msg.str());
  return out;
}

}  // namespace evid
