#pragma once

#include "pcc/encoder.hpp"
#include "pcc/pipeline.hpp"
#include "pcc/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcc {

/// Settings for the three-arm comparison run once per seed:
///   stage1_only               stage I on the synthetic triplets;
///   contrastive_continuation  stage I, then more contrastive training on
///                             train pairs with gs above the threshold;
///   pcc_tuning                stage I, then Pearson stage II on all train pairs.
/// All arms of a seed start from the same stage-I checkpoint.
struct ExperimentConfig {
    SynthConfig synth;
    EncoderShape encoder;
    StageConfig stage1;
    StageConfig continuation;
    StageConfig stage2;
    double continuation_threshold = 4.0;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    /// Seeds run concurrently on up to this many threads (0 = hardware).
    unsigned threads = 0;
};

/// Defaults used by `pcc experiment` when no config file is given.
ExperimentConfig default_experiment_config();

inline constexpr const char* kArmStage1 = "stage1_only";
inline constexpr const char* kArmContrastive = "contrastive_continuation";
inline constexpr const char* kArmPearson = "pcc_tuning";

struct ArmResult {
    std::string arm;
    std::uint64_t seed = 0;
    double test_spearman_x100 = 0.0;
    double dev_spearman_x100 = 0.0;
    double ceiling_x100 = 0.0;
    double final_loss = 0.0;
    std::size_t steps = 0;
};

struct ExperimentReport {
    std::vector<ArmResult> rows;  // seed-major, arms in the order above
    std::size_t n_test = 0;
    double ceiling_x100 = 0.0;

    std::vector<double> scores(const std::string& arm) const;
};

/// Runs every seed. For seed s the dataset, encoder init and stage shuffles
/// are derived from s, so a seed's result does not depend on the others.
ExperimentReport run_ceiling_experiment(const ExperimentConfig& config);

/// Runs a single seed.
std::vector<ArmResult> run_ceiling_seed(const ExperimentConfig& config, std::uint64_t seed);

/// `arm,test_spearman_x100,ceiling_x100,seed`, values at 6 decimals.
void write_experiment_csv(std::ostream& out, const ExperimentReport& report);
std::string experiment_report_json(const ExperimentReport& report);

} // namespace pcc
