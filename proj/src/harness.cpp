// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/harness.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <numeric>
#include <string>

#include "decor/config.hpp"
#include "decor/errors.hpp"
#include "decor/nn.hpp"
#include "decor/rng.hpp"

namespace decor {

// ---------------------------------------------------------------------------
// Metrics

AccuracyMatrix::AccuracyMatrix(std::size_t tasks)
    : tasks_(tasks), values_(tasks * (tasks + 1) / 2, 0.0), written_(tasks * (tasks + 1) / 2, false) {}

std::size_t AccuracyMatrix::offset(std::size_t t, std::size_t j) const {
  if (t < 1 || t > tasks_ || j < 1 || j > t) {
    throw IndexError("accuracy entry (" + std::to_string(t) + ", " + std::to_string(j) +
                     ") outside the lower triangle of a " + std::to_string(tasks_) + "-task matrix");
  }
  return (t - 1) * t / 2 + (j - 1);
}

void AccuracyMatrix::set(std::size_t t, std::size_t j, double accuracy) {
  const std::size_t k = offset(t, j);
  if (!(accuracy >= 0.0 && accuracy <= 100.0)) throw IndexError("accuracy must lie in [0, 100]");
  if (written_[k]) {
    throw StateError("accuracy entry (" + std::to_string(t) + ", " + std::to_string(j) + ") already written");
  }
  values_[k] = accuracy;
  written_[k] = true;
}

double AccuracyMatrix::at(std::size_t t, std::size_t j) const {
  const std::size_t k = offset(t, j);
  if (!written_[k]) throw StateError("accuracy entry (" + std::to_string(t) + ", " + std::to_string(j) + ") missing");
  return values_[k];
}

bool AccuracyMatrix::has(std::size_t t, std::size_t j) const noexcept {
  if (t < 1 || t > tasks_ || j < 1 || j > t) return false;
  return written_[(t - 1) * t / 2 + (j - 1)];
}

bool AccuracyMatrix::row_complete(std::size_t t) const noexcept {
  if (t < 1 || t > tasks_) return false;
  for (std::size_t j = 1; j <= t; ++j) {
    if (!has(t, j)) return false;
  }
  return true;
}

std::vector<double> AccuracyMatrix::row(std::size_t t) const {
  std::vector<double> out;
  for (std::size_t j = 1; j <= t; ++j) out.push_back(at(t, j));
  return out;
}

double average_accuracy(const AccuracyMatrix& a, std::size_t t) {
  if (!a.row_complete(t)) throw StateError("row " + std::to_string(t) + " of the accuracy matrix is incomplete");
  double sum = 0.0;
  for (std::size_t j = 1; j <= t; ++j) sum += a.at(t, j);
  return sum / static_cast<double>(t);
}

double max_forgetting(const AccuracyMatrix& a, std::size_t t) {
  for (std::size_t tau = 1; tau <= t; ++tau) {
    if (!a.row_complete(tau)) {
      throw StateError("row " + std::to_string(tau) + " of the accuracy matrix is incomplete");
    }
  }
  if (t == 1) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 1; j < t; ++j) {
    const double now = a.at(t, j);
    double worst = 0.0;  // tau = t contributes A[t][j] - A[t][j] = 0
    for (std::size_t tau = j; tau <= t; ++tau) worst = std::max(worst, a.at(tau, j) - now);
    sum += worst;
  }
  return sum / static_cast<double>(t - 1);
}

void verify_event_order(const RunRecord& record) {
  const auto position = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(record.events.begin(), record.events.end(), name);
    if (it == record.events.end()) return std::nullopt;
    return static_cast<std::size_t>(it - record.events.begin());
  };
  for (std::size_t t = 2; t <= record.tasks; ++t) {
    const auto inc = position("increment:" + std::to_string(t));
    const auto upd = position("update:" + std::to_string(t));
    if (inc && upd && *inc > *upd) {
      throw StateError("task " + std::to_string(t) + " was updated before its codebook indices existed");
    }
    if (uses_codebook(record.method) && upd && !inc) {
      throw StateError("task " + std::to_string(t) + " trained without codebook indices");
    }
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Models {
  nn::Network encoder;
  nn::Network head;       // classifier over all global classes
  nn::Network projector;  // contrastive projection head
  nn::Network predictor;  // index predictor, rebuilt every task
};

/// Adds `scale * src` into `dst` on the listed columns of dst.
void scatter_add(Matrix& dst, const Matrix& src, std::span<const std::size_t> columns, double scale) {
  for (std::size_t r = 0; r < dst.rows(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) dst(r, columns[c]) += scale * src(r, c);
  }
}

Matrix gather_columns(const Matrix& src, std::span<const std::size_t> columns) {
  Matrix out(src.rows(), columns.size());
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out(r, c) = src(r, columns[c]);
  }
  return out;
}

void add_scaled(Matrix& dst, const Matrix& src, double scale) {
  auto d = dst.values();
  const auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

class SequenceTrainer {
 public:
  SequenceTrainer(const ExperimentConfig& cfg, std::span<const TaskDataset> tasks, std::size_t num_classes,
                  std::uint64_t seed, RunRecord& record)
      : cfg_(cfg),
        tasks_(tasks),
        num_classes_(num_classes),
        seed_(seed),
        record_(record),
        encoder_opt_(options()),
        head_opt_(options()),
        projector_opt_(options()),
        predictor_opt_(options()) {
    std::vector<std::size_t> dims{tasks.front().feature_dim()};
    dims.insert(dims.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
    dims.push_back(cfg.feature_dim);
    models_.encoder = nn::Network::init(std::span<const std::size_t>(dims), nn::Activation::kRelu,
                                        derive_seed(seed, "init", {0}));
    models_.head = nn::Network::init({cfg.feature_dim, num_classes}, nn::Activation::kRelu,
                                     derive_seed(seed, "init", {1}));
    models_.projector = nn::Network::init({cfg.feature_dim, cfg.projector_hidden, cfg.projector_dim},
                                          nn::Activation::kRelu, derive_seed(seed, "init", {2}));
  }

  void run() {
    const std::size_t T = tasks_.size();
    record_.lep = ProtocolResult{AccuracyMatrix(T), {}, {}};
    record_.slep = ProtocolResult{AccuracyMatrix(T), {}, {}};
    for (std::size_t t = 1; t <= T; ++t) {
      try {
        train_task(t);
      } catch (const NumericError& e) {
        throw NumericError("training diverged on task " + std::to_string(t) + " (" + e.what() +
                           "); try a smaller lr or momentum");
      }
      evaluate(t);
      if (t < T) prepare_boundary(t + 1);
    }
    record_.decor_states = states_built_;
  }

 private:
  nn::Sgd::Options options() const { return {cfg_.lr, cfg_.momentum, cfg_.weight_decay}; }

  const TaskDataset& task(std::size_t t) const { return tasks_[t - 1]; }

  void train_task(std::size_t t) {
    record_.events.push_back("train:" + std::to_string(t));
    const TaskDataset train = task(t).only(Split::kTrain);
    if (train.size() == 0) throw ConfigError("task " + std::to_string(t) + " has no training samples");
    for (std::size_t c : train.class_set()) seen_classes_.push_back(c);
    std::sort(seen_classes_.begin(), seen_classes_.end());

    const bool distill = uses_codebook(cfg_.method) && state_.active();
    const bool teach = uses_teacher(cfg_.method) && teacher_.has_value();
    if (distill) {
      models_.predictor = init_index_predictor(
          PredictorConfig{cfg_.predictor_layers, cfg_.predictor_hidden, cfg_.codebook_size}, cfg_.feature_dim,
          derive_seed(seed_, "predictor", {t}));
      predictor_opt_.reset();
    }
    record_.storage_bits.push_back(distill ? storage_bits(state_.size(), state_.codebook_size(), true)
                                   : teach ? 8 * teacher_bytes_
                                           : 0);
    record_.decor_state_bytes.push_back(distill ? state_bytes_ : 0);
    record_.teacher_bytes.push_back(teach ? teacher_bytes_ : 0);

    double loss_sum = 0.0;
    std::size_t steps = 0;
    pd_sum_ = 0.0;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg_.epochs_per_task; ++epoch) {
      Rng shuffle_rng(derive_seed(seed_, "shuffle", {t, epoch}));
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      std::size_t batch_index = 0;
      for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size, ++batch_index) {
        const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
        const std::span<const std::size_t> rows(order.data() + start, end - start);
        if (is_contrastive(cfg_.method) && rows.size() < 2) continue;  // no negatives in a single pair
        AugmentationConfig aug = cfg_.augment;
        aug.seed = derive_seed(seed_, "augment", {t, epoch, batch_index});
        const double loss = is_contrastive(cfg_.method) ? contrastive_step(train, rows, aug, t, distill, teach)
                                                        : supervised_step(train, rows, aug, t, distill, teach);
        if (steps == 0) record_.events.push_back("update:" + std::to_string(t));
        loss_sum += loss;
        ++steps;
      }
    }
    record_.train_loss.push_back(steps == 0 ? 0.0 : loss_sum / static_cast<double>(steps));
    record_.distill_loss.push_back(steps == 0 ? 0.0 : pd_sum_ / static_cast<double>(steps));
  }

  /// Index-prediction term on encoder features; returns pd and adds lambda * dpd/dfeatures.
  double distill_term(const Matrix& features, std::span<const SampleId> ids, Matrix& feature_grad) {
    nn::ForwardTrace trace;
    const Matrix logits = nn::forward(models_.predictor, features, trace);
    nn::BatchLoss pd = distill_loss(logits, state_, ids);
    for (double& g : pd.grad.values()) g *= cfg_.lambda;
    nn::GradientSet grads = nn::GradientSet::zeros_like(models_.predictor);
    const Matrix back = nn::backward(models_.predictor, trace, pd.grad, grads);
    add_scaled(feature_grad, back, 1.0);
    predictor_opt_.step(models_.predictor, grads);
    pd_sum_ += pd.value;
    return pd.value;
  }

  double supervised_step(const TaskDataset& train, std::span<const std::size_t> rows, const AugmentationConfig& aug,
                         std::size_t t, bool distill, bool teach) {
    const Matrix x = augment(train.samples.gather_rows(rows), aug);
    std::vector<std::size_t> labels(rows.size());
    std::vector<SampleId> ids(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      labels[i] = train.labels[rows[i]];
      ids[i] = train.sample_ids[rows[i]];
    }

    nn::ForwardTrace enc_trace, head_trace;
    const Matrix features = nn::forward(models_.encoder, x, enc_trace);
    const Matrix logits = nn::forward(models_.head, features, head_trace);
    nn::BatchLoss ce = supervised_ce_loss(logits, labels, seen_classes_);
    double total = ce.value;
    if (teach) {
      const Matrix student = gather_columns(logits, teacher_->outputs());
      nn::BatchLoss kl = lwf_distill_loss(*teacher_, student, x);
      scatter_add(ce.grad, kl.grad, teacher_->outputs(), cfg_.lwf_lambda);
      total += cfg_.lwf_lambda * kl.value;
    }

    nn::GradientSet head_grads = nn::GradientSet::zeros_like(models_.head);
    Matrix feature_grad = nn::backward(models_.head, head_trace, ce.grad, head_grads);
    if (distill) {
      const double pd = distill_term(features, ids, feature_grad);
      total = combined_loss_supervised(total, pd, cfg_.lambda, t == 1);
    }
    nn::GradientSet enc_grads = nn::GradientSet::zeros_like(models_.encoder);
    nn::backward(models_.encoder, enc_trace, feature_grad, enc_grads);
    encoder_opt_.step(models_.encoder, enc_grads);
    head_opt_.step(models_.head, head_grads);
    return total;
  }

  double contrastive_step(const TaskDataset& train, std::span<const std::size_t> rows, const AugmentationConfig& aug,
                          std::size_t t, bool distill, bool teach) {
    const auto [xa, xb] = augment_two_views(train.samples.gather_rows(rows), aug);
    std::vector<SampleId> ids(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) ids[i] = train.sample_ids[rows[i]];

    nn::ForwardTrace enc_a, enc_b, proj_a, proj_b;
    const Matrix fa = nn::forward(models_.encoder, xa, enc_a);
    const Matrix fb = nn::forward(models_.encoder, xb, enc_b);
    const Matrix pa = nn::forward(models_.projector, fa, proj_a);
    const Matrix pb = nn::forward(models_.projector, fb, proj_b);
    PairLoss ssl = nt_xent_loss(pa, pb, cfg_.nt_xent_temperature);
    double total = ssl.value;
    if (teach) {
      nn::BatchLoss kl = lwf_distill_loss(*teacher_, pa, xa);
      add_scaled(ssl.grad_a, kl.grad, cfg_.lwf_lambda);
      total += cfg_.lwf_lambda * kl.value;
    }

    nn::GradientSet proj_grads = nn::GradientSet::zeros_like(models_.projector);
    Matrix grad_fa = nn::backward(models_.projector, proj_a, ssl.grad_a, proj_grads);
    const Matrix grad_fb = nn::backward(models_.projector, proj_b, ssl.grad_b, proj_grads);
    if (distill) {
      const double pd = distill_term(fa, ids, grad_fa);
      total = combined_loss_ssl(total, pd, cfg_.lambda, t == 1);
    }
    nn::GradientSet enc_grads = nn::GradientSet::zeros_like(models_.encoder);
    nn::backward(models_.encoder, enc_a, grad_fa, enc_grads);
    nn::backward(models_.encoder, enc_b, grad_fb, enc_grads);
    encoder_opt_.step(models_.encoder, enc_grads);
    projector_opt_.step(models_.projector, proj_grads);
    return total;
  }

  void evaluate(std::size_t t) {
    record_.events.push_back("evaluate:" + std::to_string(t));
    const std::uint64_t encoder_before = models_.encoder.checksum();
    const std::span<const TaskDataset> seen = tasks_.subspan(0, t);
    for (ProbeMode mode : {ProbeMode::kLep, ProbeMode::kSlep}) {
      ProbeConfig probe = cfg_.probe;
      probe.mode = mode;
      probe.seed = derive_seed(seed_, "probe", {t, mode == ProbeMode::kLep ? 0u : 1u});
      const std::vector<double> acc = evaluate_encoder(models_.encoder, seen, num_classes_, probe);
      ProtocolResult& result = mode == ProbeMode::kLep ? record_.lep : record_.slep;
      for (std::size_t j = 1; j <= t; ++j) result.matrix.set(t, j, acc[j - 1]);
      result.average.push_back(average_accuracy(result.matrix, t));
      result.forgetting.push_back(max_forgetting(result.matrix, t));
    }
    if (models_.encoder.checksum() != encoder_before) throw StateError("probe modified the encoder");
  }

  /// Boundary before task `next`: build the codebook indices and/or teacher
  /// snapshot from the encoder as it stands now.
  void prepare_boundary(std::size_t next) {
    if (uses_codebook(cfg_.method)) {
      const TaskDataset incoming = task(next).only(Split::kTrain);
      const std::uint64_t encoder_before = models_.encoder.checksum();
      IncrementOptions inc;
      inc.codebook_size = cfg_.codebook_size;
      inc.seed = derive_seed(seed_, "kmeans", {next});
      inc.max_iters = cfg_.kmeans_max_iters;
      inc.tol = cfg_.kmeans_tol;
      inc.restarts = cfg_.kmeans_restarts;
      state_ = increment(models_.encoder, incoming.samples, incoming.sample_ids, inc);
      if (models_.encoder.checksum() != encoder_before) throw StateError("increment modified the encoder");
      state_bytes_ = state_.serialize().size();
      ++states_built_;
      record_.events.push_back("increment:" + std::to_string(next));
    }
    if (uses_teacher(cfg_.method)) {
      if (is_contrastive(cfg_.method)) {
        teacher_.emplace(models_.encoder, models_.projector, cfg_.lwf_temperature);
      } else {
        teacher_.emplace(models_.encoder, models_.head, cfg_.lwf_temperature, seen_classes_);
      }
      teacher_bytes_ = teacher_->serialized_bytes();
      record_.events.push_back("snapshot:" + std::to_string(next));
    }
  }

  const ExperimentConfig& cfg_;
  std::span<const TaskDataset> tasks_;
  std::size_t num_classes_;
  std::uint64_t seed_;
  RunRecord& record_;

  Models models_;
  nn::Sgd encoder_opt_, head_opt_, projector_opt_, predictor_opt_;
  std::vector<std::size_t> seen_classes_;

  DecorState state_;
  std::uint64_t state_bytes_ = 0;
  std::size_t states_built_ = 0;
  std::optional<TeacherSnapshot> teacher_;
  std::uint64_t teacher_bytes_ = 0;
  double pd_sum_ = 0.0;
};

}  // namespace

RunRecord run_sequence(const ExperimentConfig& cfg, std::span<const TaskDataset> tasks, std::size_t num_classes,
                       std::uint64_t seed) {
  cfg.validate();
  if (tasks.empty()) throw ConfigError("task sequence is empty", "T");
  try {
    validate_sequence(tasks, num_classes);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), "data");
  }

  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config_hash = config_hash(cfg);
  record.seed = seed;
  record.method = cfg.method;
  record.tasks = tasks.size();
  record.codebook_size = cfg.codebook_size;
  record.predictor_layers = cfg.predictor_layers;
  record.lambda = cfg.lambda;
  record.primary = cfg.probe.mode;

  SequenceTrainer(cfg, tasks, num_classes, seed, record).run();
  verify_event_order(record);

  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunRecord run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.feature_file) {
    const FeatureFile file = load_feature_file(*cfg.feature_file);
    return run_sequence(cfg, file.tasks, file.num_classes, seed);
  }
  SyntheticConfig data = cfg.synthetic;
  data.seed = derive_seed(seed, "data", {cfg.synthetic.seed});
  const std::vector<TaskDataset> tasks = generate_synthetic_tasks(data, cfg.tasks);
  return run_sequence(cfg, tasks, data.num_classes, seed);
}

std::vector<RunRecord> sweep(const ExperimentConfig& base, const SweepGrid& grid, std::size_t jobs) {
  if (grid.codebook_sizes.empty() || grid.predictor_layers.empty()) throw ConfigError("sweep grid is empty", "grid");
  std::vector<ExperimentConfig> points;
  std::vector<std::uint64_t> seeds;
  for (std::size_t k : grid.codebook_sizes) {
    for (std::size_t l : grid.predictor_layers) {
      ExperimentConfig cfg = base;
      cfg.codebook_size = k;
      cfg.predictor_layers = l;
      if (k < 2) throw ConfigError("grid values must be >= 2", "K");
      if (l < 1) throw ConfigError("grid values must be >= 1", "L");
      cfg.validate();
      for (std::uint64_t s : base.seeds) {
        points.push_back(cfg);
        seeds.push_back(s);
      }
    }
  }

  std::vector<RunRecord> records(points.size());
  jobs = std::max<std::size_t>(1, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) records[i] = run_experiment(points[i], seeds[i]);
    return records;
  }
  std::size_t next = 0;
  while (next < points.size()) {
    std::vector<std::future<RunRecord>> batch;
    const std::size_t first = next;
    for (; next < points.size() && batch.size() < jobs; ++next) {
      batch.push_back(std::async(std::launch::async, [&points, &seeds, next] {
        return run_experiment(points[next], seeds[next]);
      }));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) records[first + i] = batch[i].get();
  }
  return records;
}

}  // namespace decor
