#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: one JSON document covering every stage.
 *
 * Missing keys keep their defaults; unknown keys and ill-typed values are
 * rejected with ConfigError so typos never pass silently.
 */

#include "evid/baseline.hpp"
#include "evid/learn.hpp"
#include "evid/pipeline.hpp"
#include "evid/select.hpp"
#include "evid/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace evid {

/// Invalid or unreadable configuration (the CLI maps it to exit code 2).
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct RunConfig {
  std::uint64_t seed{0};

  std::vector<int> class_counts{400, 400};  ///< line-trip-like, gen-loss-like
  SynthConfig synth;
  bool noise_free{false};  ///< drop the templates' measurement noise
  bool trend_free{false};  ///< drop operating point and affine trend

  ExtractionConfig extraction;
  SelectionConfig selection;
  LearnerConfig learner;
  int bootstraps_B_c{200};
  double test_fraction{1.0 / 3.0};
  int folds{5};
  double threshold{0.5};

  BaselineConfig baseline;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

[[nodiscard]] RunConfig parse_run_config(const std::string& json_text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Default templates with the noise_free / trend_free switches applied.
[[nodiscard]] std::vector<ClassTemplate> corpus_templates(const RunConfig& cfg);

/// Canonical JSON form (sorted keys, every field present).
[[nodiscard]] std::string to_json(const RunConfig& cfg);
[[nodiscard]] std::string config_fingerprint(const RunConfig& cfg);

/// Independent seeds for the stages that draw random numbers.
enum class SeedStream : std::uint64_t { Synth = 1, Split = 2, Selection = 3, Evaluation = 4, Folds = 5 };
[[nodiscard]] std::uint64_t stage_seed(const RunConfig& cfg, SeedStream stream) noexcept;

}  // namespace evid
