#include "pcc/pipeline.hpp"

#include "pcc/correlation.hpp"
#include "pcc/errors.hpp"
#include "pcc/similarity.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <future>
#include <ostream>

namespace pcc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_loss(double loss, const TrainLogEntry& at) {
    if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite loss at step " + std::to_string(at.step) + " (epoch " +
                               std::to_string(at.epoch) + ", batch " + std::to_string(at.batch) + ")");
    }
}

void check_embeddings(const MatrixXd& emb, const TrainLogEntry& at) {
    if (!emb.rowwise().norm().allFinite()) {
        throw TrainingDiverged("non-finite embeddings at step " + std::to_string(at.step) + " (epoch " +
                               std::to_string(at.epoch) + ", batch " + std::to_string(at.batch) + ")");
    }
}

void maybe_eval(const EncoderParams& params, const FeatureStore& features, const StageConfig& config,
                const EvalSets* dev, std::size_t step, std::vector<DevEvalEntry>& out) {
    if (dev == nullptr || dev->empty() || config.eval_every == 0 || step % config.eval_every != 0) {
        return;
    }
    out.push_back(DevEvalEntry{step, evaluate(params, features, *dev).average});
}

} // namespace

void validate(const StageConfig& config) {
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw InvalidInput("stage config: learning_rate must be positive");
    }
    if (config.batch_size < 2) {
        throw InvalidInput("stage config: batch_size must be at least 2");
    }
    if (config.stage == Stage::I) {
        if (!config.temperature) {
            throw InvalidInput("stage config: stage I requires a temperature");
        }
        if (!(*config.temperature > 0.0) || !std::isfinite(*config.temperature)) {
            throw InvalidInput("stage config: temperature must be positive");
        }
    } else if (config.temperature) {
        throw InvalidInput("stage config: temperature is only meaningful for stage I");
    }
}

FeatureStore::FeatureStore(std::span<const ItemFeatures> items) {
    const Index dim = items.empty() ? 0 : static_cast<Index>(items.front().features.size());
    features_.resize(static_cast<Index>(items.size()), dim);
    for (std::size_t r = 0; r < items.size(); ++r) {
        if (static_cast<Index>(items[r].features.size()) != dim) {
            throw InvalidInput("FeatureStore: item '" + items[r].id + "' has a different feature dimension");
        }
        if (!index_.emplace(items[r].id, static_cast<Index>(r)).second) {
            throw InvalidInput("FeatureStore: duplicate item id '" + items[r].id + "'");
        }
        for (Index c = 0; c < dim; ++c) {
            features_(static_cast<Index>(r), c) = items[r].features[static_cast<std::size_t>(c)];
        }
    }
}

MatrixXd FeatureStore::gather(std::span<const std::string* const> ids) const {
    MatrixXd out(static_cast<Index>(ids.size()), features_.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const auto it = index_.find(*ids[r]);
        if (it == index_.end()) {
            throw InvalidInput("unknown item id '" + *ids[r] + "'");
        }
        out.row(static_cast<Index>(r)) = features_.row(it->second);
    }
    return out;
}

TrainResult train_stage1(EncoderParams start, const FeatureStore& features, std::span<const Triplet> triplets,
                         const StageConfig& config, const EvalSets* dev) {
    validate(config);
    if (config.stage != Stage::I) {
        throw InvalidInput("train_stage1: config is not a stage-I config");
    }
    if (triplets.empty()) {
        throw InvalidInput("train_stage1: no triplets");
    }
    if (!all_finite(start)) {
        throw TrainingDiverged("train_stage1: initial parameters are not finite");
    }

    TrainResult result{std::move(start), {}, {}};
    if (config.epochs == 0) {
        return result;
    }
    const double temperature = *config.temperature;
    const auto batches = make_batches(triplets.size(), std::min(config.batch_size, triplets.size()), config.seed,
                                      config.epochs, config.keep_last_batch);
    const auto t0 = Clock::now();

    std::vector<const std::string*> ids;
    for (const Batch& batch : batches) {
        const std::size_t n = batch.rows.size();
        bool extended = true;
        for (std::size_t r : batch.rows) {
            extended = extended && triplets[r].hard_negative.has_value();
        }

        ids.clear();
        for (std::size_t r : batch.rows) ids.push_back(&triplets[r].anchor);
        for (std::size_t r : batch.rows) ids.push_back(&triplets[r].positive);
        if (extended) {
            for (std::size_t r : batch.rows) ids.push_back(&*triplets[r].hard_negative);
        }

        EncodeCache cache;
        const MatrixXd emb = encode(result.params, features.gather(ids), &cache);
        const auto rows = static_cast<Index>(n);

        ContrastiveBatch cb;
        cb.anchors = emb.topRows(rows);
        cb.positives = emb.middleRows(rows, rows);
        if (extended) {
            cb.hard_negatives = emb.bottomRows(rows);
        }
        cb.temperature = temperature;

        TrainLogEntry entry{result.params.step + 1, batch.epoch, batch.index, 0.0, config.learning_rate, 0.0};
        check_embeddings(emb, entry);
        ContrastiveGrad grad;
        entry.loss = contrastive_loss_and_grad(cb, extended, &grad);
        check_loss(entry.loss, entry);

        MatrixXd grad_emb(emb.rows(), emb.cols());
        grad_emb.topRows(rows) = grad.anchors;
        grad_emb.middleRows(rows, rows) = grad.positives;
        if (extended) {
            grad_emb.bottomRows(rows) = *grad.hard_negatives;
        }
        apply_gradients(result.params, encode_backward(result.params, cache, grad_emb), config.learning_rate);

        entry.wall_seconds = seconds_since(t0);
        result.log.push_back(entry);
        maybe_eval(result.params, features, config, dev, static_cast<std::size_t>(result.params.step), result.dev_evals);
    }
    return result;
}

TrainResult train_stage2(EncoderParams checkpoint, const FeatureStore& features, std::span<const ScoredPair> pairs,
                         const StageConfig& config, const EvalSets* dev) {
    validate(config);
    if (config.stage != Stage::II) {
        throw InvalidInput("train_stage2: config is not a stage-II config");
    }
    if (pairs.size() < config.batch_size) {
        throw InvalidInput("train_stage2: " + std::to_string(pairs.size()) + " pairs is fewer than batch size " +
                           std::to_string(config.batch_size));
    }
    if (!all_finite(checkpoint)) {
        throw TrainingDiverged("train_stage2: checkpoint parameters are not finite");
    }

    TrainResult result{std::move(checkpoint), {}, {}};
    if (config.epochs == 0) {
        return result;
    }
    const auto batches =
        make_batches(pairs.size(), config.batch_size, config.seed, config.epochs, config.keep_last_batch);
    const auto t0 = Clock::now();

    std::vector<const std::string*> ids;
    SimilarityBatch sb;
    std::vector<double> grad_cos;
    for (const Batch& batch : batches) {
        const std::size_t n = batch.rows.size();
        const auto rows = static_cast<Index>(n);
        ids.clear();
        for (std::size_t r : batch.rows) ids.push_back(&pairs[r].s);
        for (std::size_t r : batch.rows) ids.push_back(&pairs[r].s_prime);

        EncodeCache cache;
        const MatrixXd emb = encode(result.params, features.gather(ids), &cache);
        const MatrixXd lhs = emb.topRows(rows);
        const MatrixXd rhs = emb.bottomRows(rows);

        TrainLogEntry entry{result.params.step + 1, batch.epoch, batch.index, 0.0, config.learning_rate, 0.0};
        check_embeddings(emb, entry);
        sb.cosines.resize(n);
        sb.gold_scores.resize(n);
        try {
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = static_cast<Index>(i);
                sb.cosines[i] = cosine(lhs.row(row).transpose(), rhs.row(row).transpose());
                sb.gold_scores[i] = pairs[batch.rows[i]].gs;
            }
            entry.loss = pearson_loss_and_grad(sb, config.variance_guard, &grad_cos);
        } catch (const DegenerateInput& e) {
            throw DegenerateInput("stage II epoch " + std::to_string(batch.epoch) + " batch " +
                                  std::to_string(batch.index) + ": " + e.what());
        }
        check_loss(entry.loss, entry);

        MatrixXd grad_emb(emb.rows(), emb.cols());
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Index>(i);
            grad_emb.row(row) = cosine_grad_lhs(lhs.row(row).transpose(), rhs.row(row).transpose(), grad_cos[i]);
            grad_emb.row(rows + row) =
                cosine_grad_lhs(rhs.row(row).transpose(), lhs.row(row).transpose(), grad_cos[i]);
        }
        apply_gradients(result.params, encode_backward(result.params, cache, grad_emb), config.learning_rate);

        entry.wall_seconds = seconds_since(t0);
        result.log.push_back(entry);
        maybe_eval(result.params, features, config, dev, static_cast<std::size_t>(result.params.step), result.dev_evals);
    }
    return result;
}

EvalReport evaluate(const Embedder& embed, const FeatureStore& features, const EvalSets& sets,
                    std::string checkpoint_id) {
    for (const auto& [name, pairs] : sets) {
        if (pairs.size() < 2) {
            throw InvalidInput("evaluate: set '" + name + "' has fewer than two pairs");
        }
    }

    const auto score_set = [&](const std::vector<ScoredPair>& pairs) {
        std::vector<const std::string*> ids;
        ids.reserve(2 * pairs.size());
        for (const ScoredPair& p : pairs) ids.push_back(&p.s);
        for (const ScoredPair& p : pairs) ids.push_back(&p.s_prime);
        const MatrixXd emb = embed(features.gather(ids));
        const auto n = static_cast<Index>(pairs.size());
        std::vector<double> cos(pairs.size());
        std::vector<double> gold(pairs.size());
        for (Index i = 0; i < n; ++i) {
            cos[static_cast<std::size_t>(i)] = cosine(emb.row(i).transpose(), emb.row(n + i).transpose());
            gold[static_cast<std::size_t>(i)] = pairs[static_cast<std::size_t>(i)].gs;
        }
        return 100.0 * spearman(cos, gold);
    };

    std::vector<std::future<double>> futures;
    futures.reserve(sets.size());
    for (const auto& entry : sets) {
        futures.push_back(std::async(std::launch::async, score_set, std::cref(entry.second)));
    }

    EvalReport report;
    report.checkpoint = std::move(checkpoint_id);
    double total = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        double score = 0.0;
        try {
            score = futures[i].get();
        } catch (const DegenerateInput& e) {
            throw DegenerateInput("evaluate: set '" + sets[i].first + "': " + e.what());
        }
        report.per_dataset[sets[i].first] = score;
        report.n_pairs[sets[i].first] = sets[i].second.size();
        total += score;
    }
    report.average = sets.empty() ? 0.0 : total / static_cast<double>(sets.size());
    return report;
}

EvalReport evaluate(const EncoderParams& params, const FeatureStore& features, const EvalSets& sets,
                    std::string checkpoint_id) {
    return evaluate([&params](const MatrixXd& x) { return encode(params, x); }, features, sets,
                    std::move(checkpoint_id));
}

std::string eval_report_json(const EvalReport& report) {
    json j;
    j["checkpoint"] = report.checkpoint;
    j["per_dataset"] = report.per_dataset;
    j["average"] = report.average;
    j["n_pairs"] = report.n_pairs;
    j["timestamp"] = report.timestamp;
    return j.dump(2);
}

void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log) {
    for (const TrainLogEntry& e : log) {
        json j;
        j["step"] = e.step;
        j["epoch"] = e.epoch;
        j["batch"] = e.batch;
        j["loss"] = e.loss;
        j["lr"] = e.learning_rate;
        out << j.dump() << '\n';
    }
}

void write_train_timing(std::ostream& out, std::span<const TrainLogEntry> log) {
    for (const TrainLogEntry& e : log) {
        json j;
        j["step"] = e.step;
        j["wall_seconds"] = e.wall_seconds;
        out << j.dump() << '\n';
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace pcc
