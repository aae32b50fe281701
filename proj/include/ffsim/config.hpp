// Experiment configuration: INI-style text (sections [source], [switch],
// [timing], [sweep], [losses], [output]) or the equivalent JSON object.

#pragma once

#include "ffsim/feedforward.hpp"
#include "ffsim/montecarlo.hpp"
#include "ffsim/source.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ffsim {

/// Malformed user input (config or data file). Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct ExperimentConfig {
  SourceModel source = SourceModel::ideal();
  SwitchModel switch_model{};
  TimingBudget timing{};
  // source and switch_model above take precedence over the copies in here.
  SweepSpec sweep{};
  std::vector<LossComponent> losses = default_loss_components();
  std::filesystem::path output_dir = ".";

  /// SweepSpec with the source and switch of this config filled in.
  SweepSpec sweep_spec() const;
  /// Throws ConfigError naming the section and the offending field.
  void validate() const;
};

/// Parses INI text. Blank lines and lines starting with '#' or ';' are
/// skipped; every other line is "[section]" or "key = value". Unknown
/// sections or keys, duplicates and bad values throw ConfigError with
/// "<origin>:<line>: ..." and the key named.
///
/// In [source], `purity` may replace `visibility` (converted with the mode's
/// mixing family). With mode = ideal and no leak_probability key, switch
/// crosstalk is off; other modes take it from [switch] isolation_db. A
/// [losses] section replaces the default loss list with its "name = dB"
/// entries. The random seed is not a config key.
ExperimentConfig parse_config_ini(std::string_view text, std::string_view origin = "<config>");
/// JSON object with one member per section, values as in the INI form.
ExperimentConfig parse_config_json(std::string_view text, std::string_view origin = "<config>");

ExperimentConfig load_config_ini(const std::filesystem::path& path);
ExperimentConfig load_config_json(const std::filesystem::path& path);

}  // namespace ffsim
