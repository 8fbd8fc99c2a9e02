#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "a2net/gradcheck.hpp"
#include "a2net/metrics.hpp"
#include "a2net/model.hpp"

namespace a2net {

struct TrainConfig {
  ModelConfig model;
  double lambda1 = 0.4;
  double lambda2 = 0.4;
  double learning_rate = 1e-3;
  std::size_t batch_size = 4;
  std::size_t epochs = 30;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double threshold = 0.5;
  ItaMode ita = ItaMode::kBoth;
  bool aux = true;
  bool literal_loss = false;
  DetachSide detach = DetachSide::kNone;
  Averaging averaging = Averaging::kMicro;
  // Documents of a batch are split over this many workers, each with a
  // private graph; 1 is the deterministic reference loop.
  std::size_t workers = 1;
  // Stop once dev ECPE F1 reaches this value.
  std::optional<double> stop_at_dev_f1;

  ForwardOptions forward_options(bool training) const;
};

// Throws std::invalid_argument naming the offending field.
void validate(const TrainConfig& cfg);

// Flat key=value view used for config files and checkpoint snapshots. Keys
// match the CLI long flag names.
std::map<std::string, std::string> to_key_values(const TrainConfig& cfg);
// Applies known keys; returns the keys it did not recognise.
std::vector<std::string> apply_key_values(TrainConfig& cfg, const std::map<std::string, std::string>& kv);

struct LossValues {
  double pair = 0.0;
  double aux = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// L = L_pair + lambda1 * L_aux + lambda2 * L_KL, dropping disabled terms.
Var total_loss(const LossTerms& terms, const TrainConfig& cfg);
LossValues loss_values(const LossTerms& terms, Var total);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decoupled weight decay Adam.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW(std::vector<Parameter*> params, Options options);

  // Throws TrainingError naming the parameter if any gradient is non-finite;
  // no parameter is touched in that case.
  void step();
  std::size_t steps() const { return step_; }
  const Options& options() const { return options_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  std::vector<Parameter*> params_;
  Options options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t step_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  LossValues mean_loss;  // averaged over training documents
  std::optional<MetricsReport> dev;
};

nlohmann::ordered_json to_json(const EpochLog& log);

struct FitResult {
  std::unique_ptr<A2Net> model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 1-based epoch whose parameters were kept
  LossValues initial_loss;     // mean over training documents before any step
};

// Trains from scratch. With a non-empty dev set the parameters of the best dev
// ECPE F1 epoch are returned, otherwise those of the last epoch.
FitResult fit(const std::vector<Document>& train, const std::vector<Document>& dev, const TrainConfig& cfg,
              std::shared_ptr<const EmbeddingStore> embeddings = nullptr);

// Builds an untrained model for `train` (vocabulary or embedding store).
std::unique_ptr<A2Net> build_model(const std::vector<Document>& train, const TrainConfig& cfg,
                                   std::shared_ptr<const EmbeddingStore> embeddings = nullptr);

// Sums per-document gradients of the total loss into Parameter::grad using
// private graphs per worker (eval or training mode per `training`).
LossValues accumulate_gradients(A2Net& model, std::span<const Document* const> docs, const TrainConfig& cfg,
                                bool training, std::uint64_t dropout_seed, std::size_t workers);

// Mean eval-mode loss terms over `docs`.
LossValues mean_loss(const A2Net& model, const std::vector<Document>& docs, const TrainConfig& cfg);

MetricsReport evaluate(const A2Net& model, const std::vector<Document>& docs, double threshold,
                       Averaging averaging = Averaging::kMicro);

// Finite-difference check of the full training loss (dropout off) on `doc`
// against every model parameter.
CheckReport grad_check_model(A2Net& model, const Document& doc, const TrainConfig& cfg, double eps = 1e-5,
                             double tol = 1e-4);

// Checkpoint container, see docs/checkpoint_format.md.
void save_checkpoint(const std::filesystem::path& path, const A2Net& model, const TrainConfig& cfg);

struct LoadedCheckpoint {
  TrainConfig config;
  std::unique_ptr<A2Net> model;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 std::shared_ptr<const EmbeddingStore> embeddings = nullptr);

}  // namespace a2net
