#include "eep/nn_estimator.hpp"
#include "eep/text_table.hpp"

#include "grad_check.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <limits>

namespace eep {
namespace {

using testing::check_gradients;
using testing::random_matrix;
using testing::toy_network;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Labels are a fixed linear map of a few features plus a constant.
Dataset linear_dataset(int n, std::uint64_t seed, double scale = 1.0) {
  Dataset ds;
  ds.features = random_matrix(n, kFeatureCount, seed);
  ds.labels.resize(n, kLabelCount);
  for (int i = 0; i < n; ++i) {
    ds.timestamps.push_back(i * 0.1);
    ds.trajectory.push_back(0);
    const auto f = ds.features.row(i);
    ds.labels(i, 0) = scale * (2.0 * f(30) - f(40) + 0.5);
    ds.labels(i, 1) = scale * (f(50) + f(60));
    ds.labels(i, 2) = scale * (-1.5 * f(70) - 1.0);
  }
  return ds;
}

TrainingConfig small_config() {
  TrainingConfig c;
  c.hidden = {24};
  c.learning_rate = 1e-2;
  c.auto_scale_lr = false;
  c.epochs = 60;
  c.batch_size = 64;
  c.l1_rate = 0.0;
  c.seed = 4;
  return c;
}

TEST(Gradient, AffineOnly) {
  const MLPModel m = toy_network({4, 3}, Activation::sigmoid, false, 1);
  const auto r = check_gradients(m, random_matrix(4, 6, 2), random_matrix(3, 6, 3), 0.0);
  EXPECT_EQ(r.checked, 15u);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Gradient, SigmoidHiddenLayer) {
  const MLPModel m = toy_network({4, 5, 3}, Activation::sigmoid, false, 4);
  const auto r = check_gradients(m, random_matrix(4, 8, 5), random_matrix(3, 8, 6), 0.0);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Gradient, BatchNormSigmoid) {
  const MLPModel m = toy_network({4, 5, 3}, Activation::sigmoid, true, 7);
  const auto r = check_gradients(m, random_matrix(4, 8, 8), random_matrix(3, 8, 9), 0.0);
  EXPECT_EQ(r.checked, 20u + 5u + 5u + 5u + 15u + 3u);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Gradient, TwoBatchNormLayersWithL1) {
  const MLPModel m = toy_network({3, 5, 4, 2}, Activation::sigmoid, true, 10);
  const auto r = check_gradients(m, random_matrix(3, 10, 11), random_matrix(2, 10, 12), 1e-3);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Gradient, EluHiddenLayer) {
  const MLPModel m = toy_network({4, 5, 3}, Activation::elu, true, 13);
  const auto r = check_gradients(m, random_matrix(4, 8, 14), random_matrix(3, 8, 15), 0.0);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Forward, ZeroParametersGiveZeroOutput) {
  MLPModel m = MLPModel::create({6, 4, 3}, Activation::sigmoid, false, 1);
  for (auto& L : m.layers) {
    L.weight.setZero();
    L.bias.setZero();
  }
  const Eigen::MatrixXd out = forward(m, random_matrix(6, 5, 2), Mode::inference);
  EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forward, HandComputedSingleUnit) {
  MLPModel m = MLPModel::create({2, 1, 1}, Activation::sigmoid, false, 1);
  m.layers[0].weight << 0.5, -1.0;
  m.layers[0].bias << 0.25;
  m.layers[1].weight << 2.0;
  m.layers[1].bias << -1.0;
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  EXPECT_NEAR(forward(m, x, Mode::inference)(0, 0), 2.0 * sigmoid(-1.25) - 1.0, 1e-15);
}

TEST(Forward, HandComputedBatchNormInference) {
  MLPModel m = MLPModel::create({1, 1, 1}, Activation::relu, true, 1);
  m.layers[0].weight << 3.0;
  m.layers[0].bias << 1.0;
  m.layers[0].running_mean << 2.0;
  m.layers[0].running_var << 4.0;
  m.layers[0].gamma << 0.5;
  m.layers[0].beta << 0.1;
  m.layers[1].weight << 1.0;
  m.layers[1].bias << 0.0;
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  const double expected = 0.5 * (7.0 - 2.0) / std::sqrt(4.0 + m.bn_epsilon) + 0.1;
  EXPECT_NEAR(forward(m, x, Mode::inference)(0, 0), expected, 1e-14);
}

TEST(Forward, TrainModeNormalizesOverBatch) {
  MLPModel m = MLPModel::create({1, 1, 1}, Activation::relu, true, 1);
  m.layers[0].weight << 1.0;
  m.layers[1].weight << 1.0;
  m.layers[0].beta << 5.0;  // keeps every normalized value positive
  Eigen::MatrixXd x(1, 4);
  x << 1, 2, 3, 4;
  const Eigen::MatrixXd out = forward(m, x, Mode::train);
  EXPECT_NEAR(out.mean(), 5.0, 1e-12);
  EXPECT_NEAR((out.array() - 5.0).square().mean(), 1.25 / (1.25 + m.bn_epsilon), 1e-12);
}

TEST(Forward, InferenceIsBatchIndependentBitwise) {
  const MLPModel m = toy_network({10, 16, 12, 3}, Activation::sigmoid, true, 20);
  const Eigen::MatrixXd x = random_matrix(10, 37, 21);
  const Eigen::MatrixXd full = forward(m, x, Mode::inference);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::MatrixXd one = forward(m, x.col(j), Mode::inference);
    EXPECT_EQ(one.col(0), full.col(j));
  }
  Eigen::MatrixXd reversed = x.rowwise().reverse();
  const Eigen::MatrixXd rev_out = forward(m, reversed, Mode::inference);
  EXPECT_EQ(rev_out.rowwise().reverse().eval(), full);
}

TEST(Forward, NonFiniteInputRejected) {
  const MLPModel m = MLPModel::create({2, 2, 1}, Activation::sigmoid, true, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  x(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(m, x, Mode::inference), NonFiniteInput);
  EXPECT_THROW(forward(m, Eigen::MatrixXd::Zero(3, 1), Mode::inference), std::invalid_argument);
}

TEST(Model, CreateShapesAndCount) {
  const MLPModel m = MLPModel::create({118, 600, 500, 400, 3}, Activation::sigmoid, true, 1);
  EXPECT_NO_THROW(m.validate());
  const std::size_t expected = (118 * 600 + 600 * 3) + (600 * 500 + 500 * 3) + (500 * 400 + 400 * 3) + (400 * 3 + 3);
  EXPECT_EQ(m.parameter_count(), expected);
  EXPECT_FALSE(m.layers.back().batch_norm);
  const double limit = std::sqrt(6.0 / (118 + 600));
  EXPECT_LE(m.layers[0].weight.cwiseAbs().maxCoeff(), limit);
}

TEST(Standardizer, ConstantOffsetIsAbsorbed) {
  const RowMatrix f = random_matrix(50, 5, 30);
  RowMatrix shifted = f;
  shifted.col(2).array() += 1000.0;
  shifted.col(4).array() -= 3.5;
  const Eigen::MatrixXd a = Standardizer::fit(f).apply(f);
  const Eigen::MatrixXd b = Standardizer::fit(shifted).apply(shifted);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(a.rowwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardizer, ConstantFeatureKeepsUnitScale) {
  RowMatrix f = random_matrix(20, 3, 31);
  f.col(1).setConstant(7.0);
  const Standardizer s = Standardizer::fit(f);
  EXPECT_EQ(s.stddev(1), 1.0);
  EXPECT_EQ(s.apply(f).row(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Training, LearnsLinearTarget) {
  const Dataset tr = linear_dataset(2000, 40), va = linear_dataset(300, 41);
  const double label_rms = std::sqrt(va.labels.rowwise().squaredNorm().mean());
  const TrainingResult r = train(tr, va, small_config());
  EXPECT_EQ(r.history.size(), 60u);
  EXPECT_LT(r.history.back().val_rms_mm, 0.2 * label_rms);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
  const Eigen::MatrixXd p = predict_errors(r.model, va.features);
  EXPECT_NEAR(std::sqrt((p - va.labels).rowwise().squaredNorm().mean()), r.history[r.best_epoch - 1].val_rms_mm,
              1e-9);
}

TEST(Training, ZeroLabelsGiveNearZeroPredictions) {
  Dataset tr = linear_dataset(1000, 42), va = linear_dataset(200, 43);
  tr.labels.setZero();
  va.labels.setZero();
  TrainingConfig c = small_config();
  c.epochs = 30;
  const TrainingResult r = train(tr, va, c);
  EXPECT_LT(predict_errors(r.model, va.features).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Training, L1PenaltyShrinksWeights) {
  const Dataset tr = linear_dataset(1000, 44), va = linear_dataset(200, 45);
  TrainingConfig c = small_config();
  c.epochs = 20;
  const double free_norm = train(tr, va, c).model.l1_norm();
  c.l1_rate = 1e-2;
  EXPECT_LT(train(tr, va, c).model.l1_norm(), 0.7 * free_norm);
}

TEST(Training, DeterministicForSeed) {
  const Dataset tr = linear_dataset(500, 46), va = linear_dataset(100, 47);
  TrainingConfig c = small_config();
  c.epochs = 5;
  const TrainingResult a = train(tr, va, c), b = train(tr, va, c);
  EXPECT_EQ(a.model.layers[0].weight, b.model.layers[0].weight);
  EXPECT_EQ(a.history.back().val_loss, b.history.back().val_loss);
}

TEST(Training, EarlyStoppingAndAutoScale) {
  Dataset tr = linear_dataset(500, 48), va = linear_dataset(100, 49);
  TrainingConfig c = small_config();
  c.epochs = 400;
  c.patience = 5;
  const TrainingResult r = train(tr, va, c);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(static_cast<int>(r.history.size()), r.best_epoch + 5);

  c = small_config();
  c.batch_norm = false;  // running statistics would move the validation loss on their own
  c.learning_rate = 1e-9;
  c.auto_scale_lr = true;
  c.stagnation_epochs = 2;
  c.lr_scale = 1000.0;
  c.max_learning_rate = 1e-2;
  c.epochs = 8;
  const TrainingResult s = train(tr, va, c);
  // Epochs 2 and 3 cannot improve at 1e-9, so the rate is scaled once epoch 3 ends.
  EXPECT_DOUBLE_EQ(s.history[2].learning_rate, 1e-9);
  EXPECT_NEAR(s.history[3].learning_rate, 1e-6, 1e-20);
  for (std::size_t i = 1; i < s.history.size(); ++i) {
    EXPECT_GE(s.history[i].learning_rate, s.history[i - 1].learning_rate);
    EXPECT_LE(s.history[i].learning_rate, c.max_learning_rate);
  }
}

TEST(Training, ConfigValidation) {
  TrainingConfig c;
  c.hidden = {};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainingConfig{};
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainingConfig{};
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const Dataset tr = linear_dataset(10, 1);
  EXPECT_THROW(train(tr, tr, TrainingConfig{}), std::invalid_argument);
}

TEST(Correction, ZeroNetworkLeavesReportedPosition) {
  MLPModel m = MLPModel::create({kFeatureCount, 4, kLabelCount}, Activation::sigmoid, true, 1);
  for (auto& L : m.layers) L.weight.setZero();
  m.input = Standardizer::fit(random_matrix(10, kFeatureCount, 2));
  FeatureVector f{};
  f[rs::reported_pos] = 10.0;
  f[rs::reported_pos + 1] = -20.0;
  f[rs::reported_pos + 2] = 30.5;
  EXPECT_EQ(correct_position(m, f), Vec3(10.0, -20.0, 30.5));
}

TEST(Correction, MatchesBatchPrediction) {
  const Dataset tr = linear_dataset(300, 50), va = linear_dataset(50, 51);
  TrainingConfig c = small_config();
  c.epochs = 2;
  const MLPModel m = train(tr, va, c).model;
  const Eigen::MatrixXd batch = predict_errors(m, va.features);
  for (std::size_t i = 0; i < 10; ++i) {
    FeatureVector f;
    for (int j = 0; j < kFeatureCount; ++j) f[j] = va.features(static_cast<Eigen::Index>(i), j);
    EXPECT_EQ(predict_error(m, f), Vec3(batch.row(static_cast<Eigen::Index>(i)).transpose()));
    EXPECT_EQ(correct_position(m, f), va.reported_position(i) + predict_error(m, f));
  }
}

TEST(ModelFile, RoundTripIsBitwise) {
  const auto dir = testing::scratch_dir("model_file");
  const Dataset tr = linear_dataset(300, 52), va = linear_dataset(50, 53);
  TrainingConfig c = small_config();
  c.epochs = 2;
  const TrainingResult r = train(tr, va, c);
  write_model(dir / "m.bin", r.model);
  const MLPModel back = read_model(dir / "m.bin");
  EXPECT_EQ(predict_errors(back, va.features), predict_errors(r.model, va.features));
  EXPECT_EQ(back.activation, r.model.activation);
  write_history(dir / "h.txt", r.history);
  const TextTable h = read_table(dir / "h.txt");
  EXPECT_EQ(h.rows.size(), 2u);
  EXPECT_EQ(h.header.front(), "epoch");
}

TEST(ModelFile, RejectsGarbage) {
  const auto dir = testing::scratch_dir("model_bad");
  {
    std::ofstream(dir / "x.bin") << "EEPMODEL but not really";
  }
  EXPECT_THROW(read_model(dir / "x.bin"), std::runtime_error);
}

TEST(Inference, FullSizeLatencyUnderOneMillisecond) {
  const MLPModel m = MLPModel::create({kFeatureCount, 600, 500, 400, kLabelCount}, Activation::sigmoid, true, 3);
  FeatureVector f{};
  std::vector<double> times;
  for (int i = 0; i < 200; ++i) {
    f[0] = i;
    const auto t0 = std::chrono::steady_clock::now();
    const Vec3 e = predict_error(m, f);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    ASSERT_TRUE(e.allFinite());
  }
  EXPECT_LT(testing::median(times), 1e-3);
}

TEST(Activation, NamesRoundTrip) {
  for (const auto a : {Activation::sigmoid, Activation::relu, Activation::elu}) {
    EXPECT_EQ(parse_activation(activation_name(a)), a);
  }
  EXPECT_THROW(parse_activation("tanh"), std::invalid_argument);
}

}  // namespace
}  // namespace eep
