#include "xcap/xsrl/loss.hpp"

#include <cmath>

#include "xcap/error.hpp"

namespace xcap::xsrl {

using Eigen::MatrixXd;

PairLoss info_nce_symmetric(const MatrixXd& X, const MatrixXd& Y, double tau) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw ArgumentError("info_nce: X and Y shapes differ");
  if (X.rows() < 2) throw ArgumentError("info_nce: batch must hold at least 2 rows");
  if (!(tau > 0.0)) throw ArgumentError("info_nce: temperature must be positive");
  const auto B = X.rows();
  const MatrixXd S = X * Y.transpose() / tau;

  // Row softmax (X→Y) and column softmax (Y→X), both stabilized.
  MatrixXd Pr(B, B), Pc(B, B);
  double row_ce = 0.0, col_ce = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const double mx = S.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (S.row(i).array() - mx).exp();
    const double z = e.sum();
    Pr.row(i) = e / z;
    row_ce += mx + std::log(z) - S(i, i);
  }
  for (Eigen::Index j = 0; j < B; ++j) {
    const double mx = S.col(j).maxCoeff();
    const Eigen::VectorXd e = (S.col(j).array() - mx).exp();
    const double z = e.sum();
    Pc.col(j) = e / z;
    col_ce += mx + std::log(z) - S(j, j);
  }
  PairLoss out;
  const double b = static_cast<double>(B);
  out.loss = 0.5 * (row_ce + col_ce) / b;
  const MatrixXd I = MatrixXd::Identity(B, B);
  const MatrixXd G = 0.5 * ((Pr - I) + (Pc - I)) / b;
  out.dX = G * Y / tau;
  out.dY = G.transpose() * X / tau;
  if (!std::isfinite(out.loss)) throw TrainingError("info_nce: non-finite loss");
  return out;
}

MseLoss mse_align_loss(const MatrixXd& X, const MatrixXd& T) {
  if (X.rows() != T.rows() || X.cols() != T.cols()) throw ArgumentError("mse_align_loss: shape mismatch");
  if (X.size() == 0) throw ArgumentError("mse_align_loss: empty input");
  const MatrixXd D = X - T;
  const double n = static_cast<double>(X.size());
  return {D.squaredNorm() / n, 2.0 * D / n};
}

namespace {

MultiLoss pairwise(const ModalityBatch& batch, double tau, bool rgb_anchored) {
  if (batch.size() < 2) throw ArgumentError("loss: need at least 2 modalities");
  if (rgb_anchored && !batch.contains(Modality::Rgb)) throw ArgumentError("image_loss: RGB modality missing");
  MultiLoss out;
  for (const auto& [m, X] : batch) out.grads[m] = MatrixXd::Zero(X.rows(), X.cols());
  for (auto a = batch.begin(); a != batch.end(); ++a)
    for (auto b = std::next(a); b != batch.end(); ++b) {
      if (rgb_anchored && a->first != Modality::Rgb && b->first != Modality::Rgb) continue;
      const PairLoss p = info_nce_symmetric(a->second, b->second, tau);
      out.loss += p.loss;
      out.grads[a->first] += p.dX;
      out.grads[b->first] += p.dY;
      ++out.terms;
    }
  return out;
}

}  // namespace

MultiLoss image_loss(const ModalityBatch& batch, double tau) { return pairwise(batch, tau, true); }

MultiLoss cross_sensory_loss(const ModalityBatch& batch, double tau) { return pairwise(batch, tau, false); }

}  // namespace xcap::xsrl
