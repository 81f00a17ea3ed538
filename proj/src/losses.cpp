#include "heatplan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace heatplan {

using nlohmann::json;

void LossConfig::validate() const {
  if (!std::isfinite(alpha) || alpha == 0.0) throw RangeError("loss.alpha must be finite and nonzero");
  if (!(focal_gamma > 0.0) || !(focal_beta > 0.0)) {
    throw RangeError("loss.focal_gamma and loss.focal_beta must be > 0");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw RangeError("loss.epsilon must lie in (0, 0.5)");
  if (!(lambda_imi >= 0.0) || !(lambda_hm >= 0.0) || !(lambda_occ >= 0.0)) {
    throw RangeError("loss weights must be >= 0");
  }
}

LossConfig loss_config_from_json(const json& doc) {
  using jsonu::read;
  LossConfig c;
  const std::string p = "loss";
  jsonu::reject_unknown(doc,
                        {"alpha", "focal_gamma", "focal_beta", "epsilon", "lambda_imi", "lambda_hm",
                         "lambda_occ"},
                        p);
  read(doc, "alpha", c.alpha, p);
  read(doc, "focal_gamma", c.focal_gamma, p);
  read(doc, "focal_beta", c.focal_beta, p);
  read(doc, "epsilon", c.epsilon, p);
  read(doc, "lambda_imi", c.lambda_imi, p);
  read(doc, "lambda_hm", c.lambda_hm, p);
  read(doc, "lambda_occ", c.lambda_occ, p);
  c.validate();
  return c;
}

json to_json(const LossConfig& c) {
  return {{"alpha", c.alpha},         {"focal_gamma", c.focal_gamma}, {"focal_beta", c.focal_beta},
          {"epsilon", c.epsilon},     {"lambda_imi", c.lambda_imi},   {"lambda_hm", c.lambda_hm},
          {"lambda_occ", c.lambda_occ}};
}

double imitation_loss(const Trajectory& predicted, const Trajectory& target, const LossConfig& config) {
  config.validate();
  if (predicted.size() != target.size()) {
    throw ShapeError("imitation_loss: horizons differ (" + std::to_string(predicted.size()) + " vs " +
                     std::to_string(target.size()) + ")");
  }
  const double horizon = static_cast<double>(predicted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& a = predicted[i].pose;
    const auto& b = target[i].pose;
    const double l1 = std::abs(a.x() - b.x()) + std::abs(a.y() - b.y()) +
                      std::abs(normalize_angle(a.heading() - b.heading()));
    sum += std::exp(static_cast<double>(i + 1) / (config.alpha * horizon)) * l1;
  }
  return sum;
}

namespace {

void require_same_shape(const SpatialTemporalGrid& a, const SpatialTemporalGrid& b, const char* op) {
  if (a.planes() != b.planes() || a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(std::string(op) + ": grid shapes differ");
  }
}

}  // namespace

double heatmap_focal_loss(const SpatialTemporalGrid& predicted, const SpatialTemporalGrid& target,
                          const LossConfig& config) {
  config.validate();
  require_same_shape(predicted, target, "heatmap_focal_loss");
  const double eps = config.epsilon;
  double total = 0.0;
  std::size_t all_positives = 0;
  for (std::size_t t = 0; t < target.planes(); ++t) {
    const auto pred = predicted.plane(t);
    const auto tgt = target.plane(t);
    double pos = 0.0, neg = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      const double p = std::clamp(static_cast<double>(pred[i]), eps, 1.0 - eps);
      const double y = tgt[i];
      if (y == 1.0) {
        pos -= std::pow(1.0 - p, config.focal_gamma) * std::log(p);
        ++positives;
      } else {
        neg -= std::pow(1.0 - y, config.focal_beta) * std::pow(p, config.focal_gamma) *
               std::log(1.0 - p);
      }
    }
    total += positives > 0 ? (pos + neg) / static_cast<double>(positives) : neg;
    all_positives += positives;
  }
  if (all_positives == 0) throw ValidationError("heatmap_focal_loss: target has no positive pixel");
  return total;
}

double occupancy_bce(const SpatialTemporalGrid& predicted, const SpatialTemporalGrid& target,
                     double epsilon) {
  require_same_shape(predicted, target, "occupancy_bce");
  const auto pred = predicted.values();
  const auto tgt = target.values();
  if (pred.empty()) throw ShapeError("occupancy_bce: empty grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred[i]), epsilon, 1.0 - epsilon);
    const double y = tgt[i];
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.size());
}

double total_loss(const LossParts& parts, const LossConfig& config) {
  return config.lambda_imi * parts.imitation + config.lambda_hm * parts.heatmap +
         config.lambda_occ * parts.occupancy;
}

}  // namespace heatplan
