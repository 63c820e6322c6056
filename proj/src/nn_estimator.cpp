#include "eep/nn_estimator.hpp"

#include "eep/text_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace eep {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::elu: return "elu";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "elu") return Activation::elu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Standardizer Standardizer::fit(const RowMatrix& features) {
  if (features.rows() < 1) throw std::invalid_argument("cannot standardize an empty feature set");
  Standardizer s;
  s.mean = features.colwise().mean().transpose();
  s.stddev.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (features.col(j).array() - s.mean(j)).square().mean();
    const double sd = std::sqrt(var);
    s.stddev(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(j))) ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const RowMatrix& features) const {
  if (features.cols() != mean.size()) throw std::invalid_argument("feature width does not match the standardizer");
  if (!features.allFinite()) throw NonFiniteInput("non-finite feature value");
  Eigen::MatrixXd x = features.transpose();
  x.colwise() -= mean;
  x.array().colwise() /= stddev.array();
  return x;
}

MLPModel MLPModel::create(const std::vector<int>& sizes, Activation activation, bool batch_norm, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs an input and an output size");
  for (const int s : sizes) {
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  MLPModel m;
  m.sizes = sizes;
  m.activation = activation;
  m.input.mean = Eigen::VectorXd::Zero(sizes.front());
  m.input.stddev = Eigen::VectorXd::Ones(sizes.front());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const bool hidden = l + 2 < sizes.size();
    const double limit = (hidden && activation != Activation::sigmoid) ? std::sqrt(6.0 / in) : std::sqrt(6.0 / (in + out));
    DenseLayer layer;
    layer.weight.resize(out, in);
    for (int j = 0; j < in; ++j) {
      for (int i = 0; i < out; ++i) layer.weight(i, j) = limit * u(rng);
    }
    layer.bias = Eigen::VectorXd::Zero(out);
    layer.batch_norm = hidden && batch_norm;
    if (layer.batch_norm) {
      layer.gamma = Eigen::VectorXd::Ones(out);
      layer.beta = Eigen::VectorXd::Zero(out);
      layer.running_mean = Eigen::VectorXd::Zero(out);
      layer.running_var = Eigen::VectorXd::Ones(out);
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::size_t MLPModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size() + l.gamma.size() + l.beta.size();
  return n;
}

double MLPModel::l1_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.cwiseAbs().sum();
  return s;
}

void MLPModel::validate() const {
  if (layers.size() + 1 != sizes.size()) throw std::invalid_argument("layer count does not match sizes");
  if (input.mean.size() != sizes.front() || input.stddev.size() != sizes.front()) {
    throw std::invalid_argument("standardizer width does not match the input size");
  }
  if ((input.stddev.array() <= 0).any()) throw std::invalid_argument("standardizer deviations must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    if (L.weight.rows() != sizes[l + 1] || L.weight.cols() != sizes[l] || L.bias.size() != sizes[l + 1]) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has the wrong shape");
    }
    if (!L.weight.allFinite() || !L.bias.allFinite()) throw std::invalid_argument("non-finite parameters");
    if (L.batch_norm) {
      if (L.gamma.size() != sizes[l + 1] || L.beta.size() != sizes[l + 1] || L.running_mean.size() != sizes[l + 1] ||
          L.running_var.size() != sizes[l + 1]) {
        throw std::invalid_argument("batch-norm parameters have the wrong shape");
      }
      if ((L.running_var.array() <= 0).any()) throw std::invalid_argument("running variance must be positive");
    }
  }
}

namespace {

void activate(Activation a, Eigen::MatrixXd& m) {
  switch (a) {
    case Activation::sigmoid: m = (1.0 + (-m.array()).exp()).inverse().matrix(); break;
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::elu: m = (m.array() > 0).select(m, m.array().exp() - 1.0); break;
  }
}

// Derivative of the activation expressed with its input y and output a.
Eigen::ArrayXXd activation_slope(Activation act, const Eigen::MatrixXd& y, const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::sigmoid: return a.array() * (1.0 - a.array());
    case Activation::relu: return (y.array() > 0).cast<double>();
    case Activation::elu: return (y.array() > 0).select(Eigen::ArrayXXd::Ones(y.rows(), y.cols()), a.array() + 1.0);
  }
  return {};
}

struct LayerCache {
  Eigen::MatrixXd input;  // a_l
  Eigen::MatrixXd xhat;   // normalized pre-activation (BN layers)
  Eigen::VectorXd inv_std;
  Eigen::MatrixXd y;      // activation input
  Eigen::MatrixXd out;    // a_{l+1}
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

// Whole-batch forward pass. In inference mode this uses matrix products over
// the batch, so results may differ from the per-column path in the last bits.
Eigen::MatrixXd forward_batch(const MLPModel& model, const Eigen::MatrixXd& x, Mode mode,
                              std::vector<LayerCache>* caches) {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& L = model.layers[l];
    const bool hidden = l + 1 < model.layers.size();
    LayerCache c;
    if (caches) c.input = a;
    Eigen::MatrixXd z = L.weight * a;
    z.colwise() += L.bias;
    if (L.batch_norm) {
      Eigen::VectorXd mean, var;
      if (mode == Mode::train) {
        mean = z.rowwise().mean();
        var = (z.colwise() - mean).array().square().rowwise().mean();
      } else {
        mean = L.running_mean;
        var = L.running_var;
      }
      const Eigen::VectorXd inv = (var.array() + model.bn_epsilon).rsqrt();
      Eigen::MatrixXd xhat = (z.colwise() - mean).array().colwise() * inv.array();
      z = (xhat.array().colwise() * L.gamma.array()).colwise() + L.beta.array();
      if (caches) {
        c.xhat = std::move(xhat);
        c.inv_std = inv;
        c.mean = mean;
        c.var = var;
      }
    }
    if (hidden) {
      if (caches) c.y = z;
      activate(model.activation, z);
    }
    a = std::move(z);
    if (caches) {
      c.out = a;
      caches->push_back(std::move(c));
    }
  }
  return a;
}

}  // namespace

Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& x, Mode mode) {
  if (x.rows() != model.sizes.front()) throw std::invalid_argument("input width does not match the network");
  if (!x.allFinite()) throw NonFiniteInput("non-finite feature value");
  if (mode == Mode::train) return forward_batch(model, x, mode, nullptr);
  // Column by column so every sample sees the same arithmetic regardless of the batch.
  Eigen::MatrixXd out(model.sizes.back(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd a = x.col(j);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& L = model.layers[l];
      Eigen::VectorXd z = L.weight * a + L.bias;
      if (L.batch_norm) {
        z = ((z - L.running_mean).array() * (L.running_var.array() + model.bn_epsilon).rsqrt() * L.gamma.array() +
             L.beta.array())
                .matrix();
      }
      if (l + 1 < model.layers.size()) {
        Eigen::MatrixXd m = z;
        activate(model.activation, m);
        z = m.col(0);
      }
      a = std::move(z);
    }
    out.col(j) = a;
  }
  return out;
}

BatchPass loss_and_gradient(const MLPModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            double l1_rate) {
  if (x.cols() != y.cols() || y.rows() != model.sizes.back()) throw std::invalid_argument("batch shapes disagree");
  std::vector<LayerCache> caches;
  const Eigen::MatrixXd out = forward_batch(model, x, Mode::train, &caches);
  const double b = static_cast<double>(x.cols());
  const double count = b * static_cast<double>(y.rows());

  BatchPass pass;
  const Eigen::MatrixXd diff = out - y;
  pass.loss.mse = diff.squaredNorm() / count;
  pass.loss.l1 = l1_rate * model.l1_norm();

  const std::size_t n = model.layers.size();
  pass.grad.weight.resize(n);
  pass.grad.bias.resize(n);
  pass.grad.gamma.resize(n);
  pass.grad.beta.resize(n);
  pass.batch_mean.resize(n);
  pass.batch_var.resize(n);

  Eigen::MatrixXd d = (2.0 / count) * diff;  // dL/d(layer output)
  for (std::size_t k = n; k-- > 0;) {
    const auto& L = model.layers[k];
    const auto& c = caches[k];
    if (k + 1 < n) d.array() *= activation_slope(model.activation, c.y, c.out);
    if (L.batch_norm) {
      pass.grad.gamma[k] = (d.array() * c.xhat.array()).rowwise().sum();
      pass.grad.beta[k] = d.rowwise().sum();
      const Eigen::MatrixXd dxhat = d.array().colwise() * L.gamma.array();
      const Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
      const Eigen::VectorXd sum_dxhat_xhat = (dxhat.array() * c.xhat.array()).rowwise().sum();
      d = ((b * dxhat.array()).colwise() - sum_dxhat.array() - c.xhat.array().colwise() * sum_dxhat_xhat.array())
              .colwise() *
          (c.inv_std.array() / b);
      pass.batch_mean[k] = c.mean;
      pass.batch_var[k] = c.var;
    }
    pass.grad.weight[k] = d * c.input.transpose();
    if (l1_rate > 0) pass.grad.weight[k] += l1_rate * L.weight.cwiseSign();
    pass.grad.bias[k] = d.rowwise().sum();
    if (k > 0) d = L.weight.transpose() * d;
  }
  return pass;
}

void TrainingConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("at least one hidden layer is required");
  for (const int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
  }
  if (!(learning_rate > 0 && lr_scale > 0 && max_learning_rate > 0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (epochs < 1 || batch_size < 2 || stagnation_epochs < 1) {
    throw std::invalid_argument("epochs >= 1, batch_size >= 2 and stagnation_epochs >= 1 are required");
  }
  if (l1_rate < 0) throw std::invalid_argument("L1 rate must be >= 0");
  if (!(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1 && adam_epsilon > 0)) {
    throw std::invalid_argument("Adam moments must lie in (0, 1) and epsilon must be positive");
  }
  if (patience < 0 || time_budget_s < 0) throw std::invalid_argument("patience and time budget must be >= 0");
}

namespace {

Eigen::MatrixXd labels_by_column(const Dataset& ds) { return ds.labels.transpose(); }

struct AdamSlot {
  Eigen::MatrixXd m, v;
  void step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& g, double lr, double b1, double b2, double eps,
            double c1, double c2) {
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(g.rows(), g.cols());
      v = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    }
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseAbs2();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

TrainingResult train(const Dataset& train_set, const Dataset& val_set, const TrainingConfig& cfg,
                     const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.size() < static_cast<std::size_t>(cfg.batch_size)) {
    throw std::invalid_argument("batch size exceeds the training set");
  }
  if (val_set.size() < 1) throw std::invalid_argument("validation set is empty");
  const auto start = std::chrono::steady_clock::now();

  std::vector<int> sizes{kFeatureCount};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(kLabelCount);
  MLPModel model = MLPModel::create(sizes, cfg.activation, cfg.batch_norm, cfg.seed);
  model.input = Standardizer::fit(train_set.features);

  const Eigen::MatrixXd xt = model.input.apply(train_set.features);
  const Eigen::MatrixXd yt = labels_by_column(train_set);
  const Eigen::MatrixXd xv = model.input.apply(val_set.features);
  const Eigen::MatrixXd yv = labels_by_column(val_set);

  const std::size_t nl = model.layers.size();
  std::vector<AdamSlot> sw(nl), sb(nl), sg(nl), sbeta(nl);
  std::mt19937_64 rng(cfg.seed ^ 0x5deece66dULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(xt.cols()));
  std::iota(order.begin(), order.end(), 0);

  TrainingResult result;
  result.model = model;
  double best = std::numeric_limits<double>::infinity();
  double lr = cfg.learning_rate;
  double stagnation_ref = std::numeric_limits<double>::infinity();
  int stagnation_start = 0;
  long step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(cfg.batch_size));
      if (b1 - b0 < 2) break;  // batch statistics need two samples
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(b0),
                                          order.begin() + static_cast<std::ptrdiff_t>(b1));
      const Eigen::MatrixXd xb = xt(Eigen::all, idx);
      const Eigen::MatrixXd yb = yt(Eigen::all, idx);
      const BatchPass pass = loss_and_gradient(model, xb, yb, cfg.l1_rate);
      if (!std::isfinite(pass.loss.total())) {
        throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch), result.history);
      }
      loss_sum += pass.loss.mse;
      ++batches;

      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      const double bn = static_cast<double>(b1 - b0);
      for (std::size_t l = 0; l < nl; ++l) {
        auto& L = model.layers[l];
        sw[l].step(L.weight, pass.grad.weight[l], lr, cfg.beta1, cfg.beta2, cfg.adam_epsilon, c1, c2);
        sb[l].step(L.bias, pass.grad.bias[l], lr, cfg.beta1, cfg.beta2, cfg.adam_epsilon, c1, c2);
        if (L.batch_norm) {
          sg[l].step(L.gamma, pass.grad.gamma[l], lr, cfg.beta1, cfg.beta2, cfg.adam_epsilon, c1, c2);
          sbeta[l].step(L.beta, pass.grad.beta[l], lr, cfg.beta1, cfg.beta2, cfg.adam_epsilon, c1, c2);
          L.running_mean = (1 - model.bn_momentum) * L.running_mean + model.bn_momentum * pass.batch_mean[l];
          L.running_var = (1 - model.bn_momentum) * L.running_var +
                          model.bn_momentum * pass.batch_var[l] * (bn / (bn - 1.0));
        }
      }
    }

    const Eigen::MatrixXd pv = forward_batch(model, xv, Mode::inference, nullptr);
    const double val_sq = (pv - yv).squaredNorm();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / std::max(1, batches);
    rec.val_loss = val_sq / static_cast<double>(yv.size());
    rec.val_rms_mm = std::sqrt(val_sq / static_cast<double>(yv.cols()));
    rec.learning_rate = lr;
    if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.train_loss)) {
      result.history.push_back(rec);
      throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(epoch), result.history);
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_loss < best) {
      best = rec.val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
    if (cfg.auto_scale_lr) {
      if (rec.val_loss < stagnation_ref * (1.0 - 1e-3)) {
        stagnation_ref = rec.val_loss;
        stagnation_start = epoch;
      } else if (epoch - stagnation_start >= cfg.stagnation_epochs && lr * cfg.lr_scale <= cfg.max_learning_rate) {
        lr *= cfg.lr_scale;
        stagnation_start = epoch;
      }
    }
    if (cfg.patience > 0 && epoch - result.best_epoch >= cfg.patience) {
      result.stopped_early = true;
      break;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.time_budget_s > 0 && elapsed >= cfg.time_budget_s) {
      result.stopped_early = true;
      break;
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Eigen::MatrixXd predict_errors(const MLPModel& model, const RowMatrix& features) {
  return forward(model, model.input.apply(features), Mode::inference).transpose();
}

Vec3 predict_error(const MLPModel& model, const FeatureVector& features) {
  RowMatrix row(1, kFeatureCount);
  for (int j = 0; j < kFeatureCount; ++j) row(0, j) = features[j];
  const Eigen::MatrixXd e = forward(model, model.input.apply(row), Mode::inference);
  return e.col(0);
}

Vec3 correct_position(const MLPModel& model, const FeatureVector& f) {
  return Vec3(f[rs::reported_pos], f[rs::reported_pos + 1], f[rs::reported_pos + 2]) + predict_error(model, f);
}

namespace {

constexpr char kModelMagic[8] = {'E', 'E', 'P', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated model file");
  return v;
}

void put_values(std::ostream& out, const double* p, Eigen::Index n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_values(std::istream& in, double* p, Eigen::Index n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated model file");
}

}  // namespace

void write_model(const std::filesystem::path& path, const MLPModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kModelMagic, sizeof(kModelMagic));
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, kFeatureLayoutVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.activation));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.sizes.size()));
  for (const int s : model.sizes) put<std::int32_t>(out, s);
  put<double>(out, model.bn_epsilon);
  put<double>(out, model.bn_momentum);
  put_values(out, model.input.mean.data(), model.input.mean.size());
  put_values(out, model.input.stddev.data(), model.input.stddev.size());
  for (const auto& L : model.layers) {
    put<std::uint8_t>(out, L.batch_norm ? 1 : 0);
    put_values(out, L.weight.data(), L.weight.size());  // column-major
    put_values(out, L.bias.data(), L.bias.size());
    if (L.batch_norm) {
      for (const auto* v : {&L.gamma, &L.beta, &L.running_mean, &L.running_var}) put_values(out, v->data(), v->size());
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

MLPModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": not a model file");
  }
  if (get<std::uint32_t>(in) != kModelVersion) throw std::runtime_error(path.string() + ": unsupported model version");
  if (get<std::uint32_t>(in) != kFeatureLayoutVersion) {
    throw std::runtime_error(path.string() + ": model was trained on another feature layout");
  }
  MLPModel m;
  const auto act = get<std::uint32_t>(in);
  if (act > 2) throw std::runtime_error(path.string() + ": bad activation code");
  m.activation = static_cast<Activation>(act);
  const auto ns = get<std::uint32_t>(in);
  if (ns < 2 || ns > 64) throw std::runtime_error(path.string() + ": bad layer count");
  for (std::uint32_t i = 0; i < ns; ++i) {
    const auto s = get<std::int32_t>(in);
    if (s < 1 || s > 100000) throw std::runtime_error(path.string() + ": bad layer size");
    m.sizes.push_back(s);
  }
  m.bn_epsilon = get<double>(in);
  m.bn_momentum = get<double>(in);
  m.input.mean.resize(m.sizes.front());
  m.input.stddev.resize(m.sizes.front());
  get_values(in, m.input.mean.data(), m.input.mean.size());
  get_values(in, m.input.stddev.data(), m.input.stddev.size());
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    DenseLayer L;
    L.batch_norm = get<std::uint8_t>(in) != 0;
    L.weight.resize(m.sizes[l + 1], m.sizes[l]);
    L.bias.resize(m.sizes[l + 1]);
    get_values(in, L.weight.data(), L.weight.size());
    get_values(in, L.bias.data(), L.bias.size());
    if (L.batch_norm) {
      for (auto* v : {&L.gamma, &L.beta, &L.running_mean, &L.running_var}) {
        v->resize(m.sizes[l + 1]);
        get_values(in, v->data(), v->size());
      }
    }
    m.layers.push_back(std::move(L));
  }
  m.validate();
  return m;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  TextTable t;
  t.header = {"epoch", "train_loss", "val_loss", "val_rms_mm", "learning_rate"};
  for (const auto& r : history) {
    t.rows.push_back({std::to_string(r.epoch), format_double(r.train_loss), format_double(r.val_loss),
                      format_double(r.val_rms_mm), format_double(r.learning_rate)});
  }
  write_table(path, t, {"losses are mean squared error in mm^2"});
}

}  // namespace eep
