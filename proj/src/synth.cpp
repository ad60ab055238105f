#include "evid/synth.hpp"

#include "evid/preprocess.hpp"
#include "evid/rng.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace evid {
namespace {

struct ChannelProfile {
  double scale;   // typical ringdown amplitude in channel units
  double offset;  // pre-event operating point
};

ChannelProfile profile_for(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::VPM: return {0.02, 1.0};
    case ChannelKind::VPA: return {0.05, 0.3};
    case ChannelKind::IPM: return {0.10, 1.0};
    case ChannelKind::IPA: return {0.05, -0.2};
    case ChannelKind::F: return {0.005, 60.0};
  }
  return {1.0, 0.0};
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::vector<std::string> ClassTemplate::validate(double sample_rate_hz) const {
  std::vector<std::string> problems;
  const double nyquist = std::numbers::pi * sample_rate_hz;
  if (modes.empty()) problems.push_back(name + ": template has no mode bands");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto& b = modes[k];
    const std::string tag = name + " band " + std::to_string(k) + ": ";
    if (b.sigma_min > b.sigma_max || b.omega_min > b.omega_max || b.amplitude_min > b.amplitude_max) {
      problems.push_back(tag + "range bounds are inverted");
    }
    if (b.sigma_max > 0.0) problems.push_back(tag + "sigma must be <= 0 (decaying)");
    if (b.omega_min <= 0.0 || b.omega_max >= nyquist) problems.push_back(tag + "omega must lie in (0, pi/Ts)");
    if (b.amplitude_min <= 0.0) problems.push_back(tag + "amplitude must be positive");
  }
  if (decay_min < 0.0 || decay_min > decay_max) problems.push_back(name + ": invalid spatial decay range");
  if (trend_slope_max < 0.0) problems.push_back(name + ": trend slope bound must be >= 0");
  if (snr_db_min > snr_db_max) problems.push_back(name + ": invalid SNR range");
  return problems;
}

std::vector<ChannelKind> default_channels(int n_ch) {
  switch (n_ch) {
    case 1: return {ChannelKind::VPM};
    case 3: return {ChannelKind::VPM, ChannelKind::VPA, ChannelKind::F};
    case 5: return {kAllChannels.begin(), kAllChannels.end()};
    default: break;
  }
  if (n_ch < 1 || n_ch > 5) throw InvalidInput("channel count must be in 1..5");
  return {kAllChannels.begin(), kAllChannels.begin() + n_ch};
}

SyntheticEvent generate_event_with_truth(const ClassTemplate& tmpl, const SynthConfig& cfg, std::uint64_t seed,
                                         std::string event_id) {
  if (auto problems = tmpl.validate(cfg.sample_rate_hz); !problems.empty()) throw InvalidInput(problems.front());
  if (cfg.num_streams < 1 || cfg.num_samples < 4) throw InvalidInput("synth needs m >= 1 and N >= 4");
  if (cfg.channels.empty()) throw InvalidInput("synth needs at least one channel");

  Rng rng(seed);
  const double ts = 1.0 / cfg.sample_rate_hz;
  const auto m = static_cast<Eigen::Index>(cfg.num_streams);
  const auto n = static_cast<Eigen::Index>(cfg.num_samples);

  SyntheticEvent out;
  out.record.event_id = std::move(event_id);
  out.record.label = tmpl.label;
  out.record.sample_rate_hz = cfg.sample_rate_hz;

  for (const ModeBand& band : tmpl.modes) {
    out.planted.push_back({uniform(rng, band.sigma_min, band.sigma_max), uniform(rng, band.omega_min, band.omega_max),
                           uniform(rng, band.amplitude_min, band.amplitude_max)});
  }
  out.snr_db = uniform(rng, tmpl.snr_db_min, tmpl.snr_db_max);
  const double decay = uniform(rng, tmpl.decay_min, tmpl.decay_max);

  // A PMU's distance from the disturbance is shared by all of its channels.
  std::vector<double> distance(static_cast<std::size_t>(m));
  for (auto& d : distance) d = uniform(rng, 0.0, 1.0);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> row(static_cast<std::size_t>(n));

  for (ChannelKind kind : cfg.channels) {
    const ChannelProfile prof = profile_for(kind);
    Eigen::MatrixXd clean = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double spatial = std::exp(-decay * distance[static_cast<std::size_t>(i)]);
      for (const PlantedMode& mode : out.planted) {
        const double magnitude = prof.scale * mode.amplitude * spatial * uniform(rng, 0.8, 1.2);
        const double phase = uniform(rng, -std::numbers::pi, std::numbers::pi);
        // Conjugate pair R z^n + conj(R z^n) = 2 |R| e^{sigma t} cos(omega t + phase).
        for (Eigen::Index t = 0; t < n; ++t) {
          const double time = static_cast<double>(t) * ts;
          clean(i, t) += 2.0 * magnitude * std::exp(mode.sigma * time) * std::cos(mode.omega * time + phase);
        }
      }
    }

    Eigen::MatrixXd observed = clean;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double slope = uniform(rng, -tmpl.trend_slope_max, tmpl.trend_slope_max) * prof.scale;
      const double level = tmpl.operating_point ? prof.offset : 0.0;
      for (Eigen::Index t = 0; t < n; ++t) observed(i, t) += level + slope * static_cast<double>(t);

      if (std::isfinite(out.snr_db)) {
        for (Eigen::Index t = 0; t < n; ++t) row[static_cast<std::size_t>(t)] = clean(i, t);
        const auto detrended = detrend_stream(row);
        double power = 0.0;
        for (double v : detrended.values) power += v * v;
        const double rms = std::sqrt(power / static_cast<double>(n));
        const double noise_sd = rms / std::pow(10.0, out.snr_db / 20.0);
        for (Eigen::Index t = 0; t < n; ++t) observed(i, t) += noise_sd * gauss(rng);
      }
    }
    out.ringdown.emplace(kind, std::move(clean));
    out.record.channels.emplace(kind, std::move(observed));
  }
  return out;
}

EventRecord generate_event(const ClassTemplate& tmpl, const SynthConfig& cfg, std::uint64_t seed,
                           std::string event_id) {
  return generate_event_with_truth(tmpl, cfg, seed, std::move(event_id)).record;
}

std::vector<EventRecord> generate_corpus(const std::vector<ClassTemplate>& templates, const std::vector<int>& counts,
                                         const SynthConfig& cfg, std::uint64_t seed) {
  if (templates.size() != counts.size()) throw InvalidInput("generate_corpus: one count per template required");
  std::vector<EventRecord> corpus;
  std::uint64_t index = 0;
  for (std::size_t c = 0; c < templates.size(); ++c) {
    if (counts[c] < 0) throw InvalidInput("generate_corpus: negative count");
    for (int j = 0; j < counts[c]; ++j, ++index) {
      char id[32];
      std::snprintf(id, sizeof(id), "evt-%05llu", static_cast<unsigned long long>(index));
      corpus.push_back(generate_event(templates[c], cfg, derive_seed(seed, index), id));
    }
  }
  return corpus;
}

std::vector<ClassTemplate> default_templates() {
  ClassTemplate line_trip;
  line_trip.name = "line-trip-like";
  line_trip.label = EventClass::LineTrip;
  line_trip.modes = {
      {-0.60, -0.20, 3.6, 5.0, 1.0, 1.5},
      {-0.50, -0.10, 6.0, 8.0, 0.3, 0.8},
      {-0.80, -0.20, 9.0, 12.0, 0.2, 0.6},
  };
  line_trip.decay_min = 2.0;
  line_trip.decay_max = 4.0;
  line_trip.trend_slope_max = 0.01;
  line_trip.snr_db_min = 30.0;
  line_trip.snr_db_max = 50.0;

  ClassTemplate gen_loss;
  gen_loss.name = "gen-loss-like";
  gen_loss.label = EventClass::GenerationLoss;
  gen_loss.modes = {
      {-0.30, -0.05, 1.5, 3.1, 1.0, 1.5},
      {-0.50, -0.10, 6.0, 8.0, 0.3, 0.8},
      {-0.80, -0.20, 9.0, 12.0, 0.2, 0.6},
  };
  gen_loss.decay_min = 0.3;
  gen_loss.decay_max = 1.0;
  gen_loss.trend_slope_max = 0.01;
  gen_loss.snr_db_min = 30.0;
  gen_loss.snr_db_max = 50.0;
  return {line_trip, gen_loss};
}

ClassTemplate planted_template(int pairs, double snr_db, EventClass label) {
  static const ModeBand bands[] = {
      {-0.40, -0.10, 2.0, 3.0, 1.0, 1.4},
      {-0.50, -0.15, 5.0, 6.5, 0.6, 0.9},
      {-0.60, -0.20, 8.5, 10.5, 0.4, 0.6},
      {-0.60, -0.20, 12.0, 14.0, 0.3, 0.5},
  };
  if (pairs < 1 || pairs > 4) throw InvalidInput("planted_template supports 1..4 pairs");
  ClassTemplate t;
  t.name = "planted-" + std::to_string(2 * pairs);
  t.label = label;
  t.modes.assign(bands, bands + pairs);
  t.decay_min = 0.2;
  t.decay_max = 0.8;
  t.trend_slope_max = 0.0;
  t.operating_point = false;
  t.snr_db_min = snr_db;
  t.snr_db_max = snr_db;
  return t;
}

}  // namespace evid
