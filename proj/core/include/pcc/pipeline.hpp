#pragma once

// Two-stage fine-tuning of the toy encoder:
//
//   stage I   contrastive training on (anchor, positive, hard negative)
//             triplets with the extended InfoNCE objective;
//   stage II  starting from the stage-I checkpoint, training on fine-grained
//             scored pairs by minimising 1 - pearson(cosines, gold).
//
// plus the Spearman evaluation harness used to compare the two.

#include "pcc/data.hpp"
#include "pcc/encoder.hpp"
#include "pcc/losses.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pcc {

enum class Stage { I, II };

struct StageConfig {
    Stage stage = Stage::I;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t epochs = 1;
    /// Required for stage I, must be empty for stage II.
    std::optional<double> temperature;
    std::uint64_t seed = 0;
    /// Evaluate the dev sets every this many steps (0 = never).
    std::size_t eval_every = 0;
    VarianceGuard variance_guard = VarianceGuard::Training;
    bool keep_last_batch = false;
};

/// Throws InvalidInput when a stage-specific field is missing or misplaced,
/// or a numeric field is out of range.
void validate(const StageConfig& config);

/// Item id -> feature row lookup shared by training and evaluation.
class FeatureStore {
public:
    FeatureStore() = default;
    explicit FeatureStore(std::span<const ItemFeatures> items);

    Eigen::Index dim() const { return features_.cols(); }
    std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
    bool contains(const std::string& id) const { return index_.contains(id); }

    /// Feature rows for `ids`, in order. Throws InvalidInput on unknown ids.
    Eigen::MatrixXd gather(std::span<const std::string* const> ids) const;

private:
    std::unordered_map<std::string, Eigen::Index> index_;
    Eigen::MatrixXd features_;
};

struct TrainLogEntry {
    std::size_t step = 0;
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double loss = 0.0;
    double learning_rate = 0.0;
    double wall_seconds = 0.0;
};

struct DevEvalEntry {
    std::size_t step = 0;
    double average_x100 = 0.0;
};

struct TrainResult {
    EncoderParams params;
    std::vector<TrainLogEntry> log;
    std::vector<DevEvalEntry> dev_evals;
};

/// Named evaluation sets, e.g. {"dev", pairs}.
using EvalSets = std::vector<std::pair<std::string, std::vector<ScoredPair>>>;

/// Contrastive training. Batches whose triplets all carry hard negatives use
/// info_nce_extended, others plain info_nce. Throws InvalidInput on a bad
/// config or empty triplets, TrainingDiverged on non-finite loss or params.
TrainResult train_stage1(EncoderParams start, const FeatureStore& features, std::span<const Triplet> triplets,
                         const StageConfig& config, const EvalSets* dev = nullptr);

/// Pearson fine-tuning from a stage-I checkpoint; every parameter trains.
/// In Strict variance mode a degenerate batch raises DegenerateInput naming
/// the epoch and batch; a batch with constant gold always does.
TrainResult train_stage2(EncoderParams checkpoint, const FeatureStore& features, std::span<const ScoredPair> pairs,
                         const StageConfig& config, const EvalSets* dev = nullptr);

struct EvalReport {
    std::string checkpoint;
    std::map<std::string, double> per_dataset;  // Spearman x 100
    std::map<std::string, std::size_t> n_pairs;
    double average = 0.0;                       // unweighted mean of per_dataset
    std::string timestamp;
};

/// Any map from an N x D feature matrix to N embeddings.
using Embedder = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Spearman x 100 between pair cosines and gold scores, per set, and their
/// unweighted mean. Sets are evaluated concurrently; the report does not
/// depend on scheduling. Throws InvalidInput for sets with fewer than two
/// pairs and DegenerateInput for sets with constant gold.
EvalReport evaluate(const EncoderParams& params, const FeatureStore& features, const EvalSets& sets,
                    std::string checkpoint_id = {});
EvalReport evaluate(const Embedder& embed, const FeatureStore& features, const EvalSets& sets,
                    std::string checkpoint_id = {});

/// EvalReport JSON: {checkpoint, per_dataset, average, n_pairs, timestamp}.
std::string eval_report_json(const EvalReport& report);

/// One JSON object per line: {"step", "epoch", "batch", "loss", "lr"}.
/// Wall time is left out so the log is reproducible byte for byte.
void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log);
/// {"step", "wall_seconds"} per line.
void write_train_timing(std::ostream& out, std::span<const TrainLogEntry> log);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

} // namespace pcc
