#pragma once

// Fully-connected position-error regressor.
//
// Hidden layer: affine -> batch normalization -> activation. Output layer:
// affine only. Inputs are standardized with training-split statistics.
// Activations are column-per-sample matrices.

#include "eep/dataset.hpp"
#include "eep/ravenstate.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eep {

enum class Activation { sigmoid, relu, elu };
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

enum class Mode { train, inference };

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // floored to 1 for constant features

  static Standardizer fit(const RowMatrix& features);
  /// features: rows are samples. Returns one column per sample.
  [[nodiscard]] Eigen::MatrixXd apply(const RowMatrix& features) const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  bool batch_norm = false;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

struct MLPModel {
  std::vector<int> sizes;  // input, hidden..., output
  Activation activation = Activation::sigmoid;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
  Standardizer input;
  std::vector<DenseLayer> layers;

  /// Glorot (sigmoid) or He (relu, elu) uniform weights, zero biases, unit BN scale.
  static MLPModel create(const std::vector<int>& sizes, Activation activation, bool batch_norm, std::uint64_t seed);
  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] double l1_norm() const;  // summed |weight| over every layer
  void validate() const;
};

class NonFiniteInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// x: standardized inputs, one column per sample. Train mode uses batch statistics
/// and leaves running statistics untouched. Inference output for a column does
/// not depend on the other columns.
Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& x, Mode mode);

/// Gradients in the layout of the model's layers.
struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> beta;
};

struct LossValue {
  double mse = 0.0;  // mean over samples and output components
  double l1 = 0.0;   // rate * summed |weight|
  [[nodiscard]] double total() const { return mse + l1; }
};

/// Train-mode loss and its gradient for one batch. Batch statistics are
/// returned for the running-average update.
struct BatchPass {
  LossValue loss;
  Gradients grad;
  std::vector<Eigen::VectorXd> batch_mean;
  std::vector<Eigen::VectorXd> batch_var;
};
BatchPass loss_and_gradient(const MLPModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double l1_rate);

struct TrainingConfig {
  std::vector<int> hidden{600, 500, 400};
  Activation activation = Activation::sigmoid;
  bool batch_norm = true;
  double learning_rate = 1e-8;
  bool auto_scale_lr = true;     // multiply by lr_scale after stagnation_epochs without progress
  double lr_scale = 1000.0;
  int stagnation_epochs = 200;
  double max_learning_rate = 1e-2;
  int epochs = 10000;
  int batch_size = 1024;
  double l1_rate = 5e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int patience = 0;             // early stopping on validation loss; 0 disables
  double time_budget_s = 0.0;   // wall-clock cap; 0 disables
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean batch MSE in train mode
  double val_loss = 0.0;    // MSE in inference mode
  double val_rms_mm = 0.0;  // 3D RMS of validation residuals
  double learning_rate = 0.0;
};

struct TrainingResult {
  MLPModel model;  // parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool stopped_early = false;
  double seconds = 0.0;  // wall clock, not part of any artifact
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<EpochRecord> h)
      : std::runtime_error(what), history(std::move(h)) {}
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainingResult train(const Dataset& train_set, const Dataset& val_set, const TrainingConfig& cfg,
                     const EpochCallback& on_epoch = {});

/// Predicted error for raw (unstandardized) features, one row per sample.
Eigen::MatrixXd predict_errors(const MLPModel& model, const RowMatrix& features);
Vec3 predict_error(const MLPModel& model, const FeatureVector& features);

/// Reported position plus predicted error.
Vec3 correct_position(const MLPModel& model, const FeatureVector& features);

void write_model(const std::filesystem::path& path, const MLPModel& model);
MLPModel read_model(const std::filesystem::path& path);

/// Rows: epoch, train_loss, val_loss, val_rms_mm, learning_rate.
void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace eep
