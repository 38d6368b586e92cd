#include <array>

#include "erf/enhanced.hpp"

namespace erforest {

namespace {

// Per-dataset settings found by cross-validation.
constexpr std::array<Preset, 15> kPresets{{
    {"adult", true, true, true, 6, 0.20},
    {"aids", true, false, false, 5, 0.05},
    {"credit", true, true, false, 6, 0.05},
    {"credit-card", true, false, true, 6, 1.00},
    {"deposit", true, true, false, 6, 0.10},
    {"diabetes", true, false, false, 6, 0.05},
    {"gamma", true, true, false, 6, 0.05},
    {"heart", true, true, false, 6, 0.05},
    {"hotel", true, true, false, 6, 0.20},
    {"loan", true, true, false, 5, 0.10},
    {"online", false, true, false, 6, 0.10},
    {"shopping", true, true, false, 5, 0.05},
    {"stroke", true, false, false, 5, 0.50},
    {"spleen", true, true, false, 6, 0.10},
    {"wine", true, false, true, 6, 0.10},
}};

}  // namespace

TrainConfig Preset::apply(TrainConfig base) const {
  base.use_sample_probs = sample_probs;
  base.use_sample_weights = sample_weights;
  base.feature_mode = per_tree_features ? FeatureMode::per_tree : FeatureMode::per_split;
  base.max_depth = max_depth;
  base.lambda = lambda;
  return base;
}

std::span<const Preset> presets() { return kPresets; }

std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  if (name == "credit_card" || name == "creditcard") return find_preset("credit-card");
  return std::nullopt;
}

}  // namespace erforest
