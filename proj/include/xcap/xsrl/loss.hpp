#pragma once

#include <map>

#include <Eigen/Core>

#include "xcap/xsrl/embedding.hpp"

namespace xcap::xsrl {

inline constexpr double kDefaultTemperature = 0.07;

struct PairLoss {
  double loss = 0.0;
  Eigen::MatrixXd dX;
  Eigen::MatrixXd dY;
};

/// ½[CE(rows of XYᵀ/τ) + CE(rows of YXᵀ/τ)] with diagonal targets, and its
/// gradient with respect to X and Y as given (no renormalization).
PairLoss info_nce_symmetric(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double tau);

struct MseLoss {
  double loss = 0.0;
  Eigen::MatrixXd dX;
};

/// Mean over batch and dimensions of (X − T)².
MseLoss mse_align_loss(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T);

using ModalityBatch = std::map<Modality, Eigen::MatrixXd>;

struct MultiLoss {
  double loss = 0.0;
  int terms = 0;
  std::map<Modality, Eigen::MatrixXd> grads;
};

/// Σ over m ≠ RGB of info_nce_symmetric(RGB, m).
MultiLoss image_loss(const ModalityBatch& batch, double tau);
/// Σ over unordered modality pairs of info_nce_symmetric.
MultiLoss cross_sensory_loss(const ModalityBatch& batch, double tau);

}  // namespace xcap::xsrl
