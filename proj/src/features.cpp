#include "evid/features.hpp"

#include "evid/modal.hpp"

#include <algorithm>
#include <cmath>

namespace evid {
namespace {

constexpr double kDuplicateTolerance = 1e-6;

bool same_mode(const Mode& a, const Mode& b) {
  return a.angular_freq_omega > 0.0 && b.angular_freq_omega > 0.0 &&
         std::abs(a.damping_sigma - b.damping_sigma) <= kDuplicateTolerance * std::max(1.0, std::abs(a.damping_sigma)) &&
         std::abs(a.angular_freq_omega - b.angular_freq_omega) <=
             kDuplicateTolerance * std::max(1.0, a.angular_freq_omega);
}

std::string feature_name(ChannelKind kind, int mode, std::string_view component, int stream = 0) {
  std::string name = std::string(to_string(kind)) + ".mode" + std::to_string(mode) + "." + std::string(component);
  if (stream > 0) name += "_" + std::to_string(stream);
  return name;
}

}  // namespace

void FeatureConfig::validate() const {
  if (p_prime < 1) throw InvalidInput("p' must be >= 1");
  if (m_prime < 1) throw InvalidInput("m' must be >= 1");
  if (channels.empty()) throw InvalidInput("feature config needs at least one channel");
  for (std::size_t i = 1; i < channels.size(); ++i) {
    if (!(channels[i - 1] < channels[i])) {
      throw InvalidInput("feature channels must be unique and in canonical order VPM, VPA, IPM, IPA, F");
    }
  }
}

std::size_t FeatureConfig::dimension() const noexcept {
  const auto p = static_cast<std::size_t>(p_prime);
  const auto m = static_cast<std::size_t>(m_prime);
  return 2 * channels.size() * (p + m * p);
}

RankedModes dedup_and_rank_modes(const ModalDecomposition& dec, int p_prime) {
  if (p_prime < 1) throw InvalidInput("p' must be >= 1");
  RankedModes out;
  for (const Mode& mode : dec.modes) {
    auto twin = std::find_if(out.modes.begin(), out.modes.end(), [&](const Mode& k) { return same_mode(k, mode); });
    if (twin != out.modes.end()) {
      twin->paired = true;
      continue;
    }
    out.modes.push_back(mode);
  }
  sort_modes_by_residue(out.modes, dec.degenerate_streams);

  if (static_cast<int>(out.modes.size()) > p_prime) out.modes.resize(static_cast<std::size_t>(p_prime));
  if (static_cast<int>(out.modes.size()) < p_prime) {
    out.padded = true;
    Mode zero;
    zero.residues.assign(dec.num_streams(), Residue{});
    out.modes.resize(static_cast<std::size_t>(p_prime), zero);
  }
  return out;
}

ChannelFeatures channel_features(const ModalDecomposition& dec, const FeatureConfig& cfg, ChannelKind kind) {
  if (cfg.p_prime < 1 || cfg.m_prime < 1) throw InvalidInput("p' and m' must be >= 1");
  const RankedModes ranked = dedup_and_rank_modes(dec, cfg.p_prime);
  const auto p = static_cast<std::size_t>(cfg.p_prime);
  const auto m = static_cast<std::size_t>(cfg.m_prime);

  ChannelFeatures out;
  out.padded = ranked.padded;
  out.values.reserve(2 * (p + m * p));
  out.names.reserve(2 * (p + m * p));

  for (std::size_t k = 0; k < p; ++k) {
    out.values.push_back(ranked.modes[k].angular_freq_omega);
    out.names.push_back(feature_name(kind, static_cast<int>(k + 1), "omega"));
  }
  for (std::size_t k = 0; k < p; ++k) {
    out.values.push_back(ranked.modes[k].damping_sigma);
    out.names.push_back(feature_name(kind, static_cast<int>(k + 1), "sigma"));
  }

  std::vector<std::vector<Residue>> top(p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto& residues = ranked.modes[k].residues;
    for (std::size_t i = 0; i < residues.size(); ++i) {
      if (i < dec.degenerate_streams.size() && dec.degenerate_streams[i]) continue;
      top[k].push_back(residues[i]);
    }
    // Content-based order so stream permutations cannot change the row.
    std::sort(top[k].begin(), top[k].end(), [](const Residue& a, const Residue& b) {
      if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
      return a.angle > b.angle;
    });
    if (top[k].size() < m) {
      out.padded = true;
      top[k].resize(m, Residue{});
    } else {
      top[k].resize(m);
    }
  }

  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      out.values.push_back(top[k][j].magnitude);
      out.names.push_back(feature_name(kind, static_cast<int>(k + 1), "res_mag", static_cast<int>(j + 1)));
    }
  }
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      out.values.push_back(top[k][j].angle);
      out.names.push_back(feature_name(kind, static_cast<int>(k + 1), "res_ang", static_cast<int>(j + 1)));
    }
  }
  return out;
}

FeatureVector build_feature_vector(const EventRecord& event, const std::map<ChannelKind, ModalDecomposition>& decs,
                                   const FeatureConfig& cfg) {
  cfg.validate();
  FeatureVector fv;
  fv.event_id = event.event_id;
  fv.label = event.label;
  fv.values.reserve(cfg.dimension());
  fv.names.reserve(cfg.dimension());
  for (ChannelKind kind : cfg.channels) {
    auto it = decs.find(kind);
    if (it == decs.end()) {
      throw InvalidInput("event " + event.event_id + ": no decomposition for channel " + std::string(to_string(kind)));
    }
    ChannelFeatures part = channel_features(it->second, cfg, kind);
    fv.padded = fv.padded || part.padded;
    fv.values.insert(fv.values.end(), part.values.begin(), part.values.end());
    fv.names.insert(fv.names.end(), std::make_move_iterator(part.names.begin()),
                    std::make_move_iterator(part.names.end()));
  }
  return fv;
}

}  // namespace evid
