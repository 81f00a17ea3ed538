#pragma once

#include <json.hpp>

#include "heatplan/geometry.hpp"
#include "heatplan/grid.hpp"

namespace heatplan {

struct LossConfig {
  double alpha = -1.0;       // imitation time-weight scale; negative decays with t
  double focal_gamma = 2.0;  // exponent on the prediction
  double focal_beta = 4.0;   // exponent on the Gaussian penalty reduction
  double epsilon = 1e-6;     // probability clamp
  double lambda_imi = 1.0;
  double lambda_hm = 1.0;
  double lambda_occ = 100.0;

  void validate() const;
};

LossConfig loss_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const LossConfig& config);

/// Sum over t = 1..T of exp(t / (alpha T)) * (|dx| + |dy| + |wrap(dheading)|).
double imitation_loss(const Trajectory& predicted, const Trajectory& target,
                      const LossConfig& config);

/// Penalty-reduced focal loss summed over planes. Each plane is normalized by
/// its count of positive pixels (target == 1); planes without positives
/// contribute their negative term unnormalized. Throws ValidationError when
/// no plane has a positive pixel.
double heatmap_focal_loss(const SpatialTemporalGrid& predicted, const SpatialTemporalGrid& target,
                          const LossConfig& config);

/// Mean binary cross-entropy over all pixels and planes.
double occupancy_bce(const SpatialTemporalGrid& predicted, const SpatialTemporalGrid& target,
                     double epsilon = 1e-6);

struct LossParts {
  double imitation = 0.0;
  double heatmap = 0.0;
  double occupancy = 0.0;
};

double total_loss(const LossParts& parts, const LossConfig& config);

}  // namespace heatplan
