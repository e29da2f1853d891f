#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "mrpchan/models.hpp"
#include "mrpchan/simulate.hpp"

namespace mrpchan {

inline constexpr int kConfigSchema = 1;

/// A model read from a config file: either a channel (kind "channel") or a
/// statically modulated renewal output (kind "static").
struct ModelConfig {
  std::string kind;
  Channel channel;
  StaticModel static_model;
  std::vector<std::string> block_names;
  /// Normalized document the model was built from.
  nlohmann::json document;

  /// FNV-1a of the compact dump of `document`, as 16 hex digits.
  std::string hash() const;
};

/// Density objects: {"exponential": {"rate", "weight"?}}, {"erlang": {"shape", "rate"}}
/// or {"terms": [{"coeff", "power", "rate"}]} with complex numbers as [re, im].
ExpPoly density_from_json(const nlohmann::json& j);
nlohmann::json density_to_json(const ExpPoly& f);

/// Kernel objects: {"states", "construction", ...} with construction one of
/// generator ("rates": [{from, to, rate}]), conditional ("transitions": [{from, to, p, density}]),
/// competing ("clocks": [{from, to, density}]) or explicit ("densities": [{from, to, density}]).
SemiMarkovKernel kernel_from_json(const nlohmann::json& j);
/// Explicit construction, exact term by term.
nlohmann::json kernel_to_json(const SemiMarkovKernel& k);

/// Marginal objects: {"classes": [{from, to, class}], "default_class"?, "marks": {"state/class": mark}}.
MarginalSpec marginal_from_json(const SemiMarkovKernel& k, const nlohmann::json& j);
nlohmann::json marginal_to_json(const SemiMarkovKernel& k, const MarginalSpec& m);

ModelConfig parse_config(const nlohmann::json& j);
ModelConfig load_config(const std::string& path);

nlohmann::json channel_to_json(const Channel& c);
nlohmann::json static_model_to_json(const StaticModel& m, const std::vector<std::string>& names);

/// Built-in names of channel_by_name plus "gene-static" (the two-concentration output model).
ModelConfig builtin_config(const std::string& name);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mrpchan
