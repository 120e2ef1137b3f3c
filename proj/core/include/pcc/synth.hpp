#pragma once

// Synthetic fine-grained similarity data.
//
// Every item has a latent vector z ~ N(0, I_L). What the encoder sees is
// x = A z + observation_noise * e with a random D x L mixing matrix A. The
// gold score of a pair is the affine image of cos(z_i, z_j) on [0, 5] plus
// truncated Gaussian score noise, so a model that recovers z up to rotation
// and scale ranks pairs perfectly up to that noise.
//
// Pair partners are chosen to spread cosines roughly uniformly over the
// achievable range, mimicking the flat score histogram of human-rated STS
// data rather than the cos ~ 0 concentration of random pairs.

#include "pcc/data.hpp"
#include "pcc/encoder.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcc {

struct SynthConfig {
    std::size_t num_items = 2000;
    std::size_t latent_dim = 8;
    std::size_t feature_dim = 32;
    double observation_noise = 0.1;
    double score_noise = 0.3;
    std::size_t num_pairs = 10000;
    std::uint64_t seed = 0;
    double dev_fraction = 0.1;
    double test_fraction = 0.1;
    /// Train pairs with gs strictly above this become contrastive positives.
    double positive_threshold = 4.0;
    /// Hard negatives are items whose pair with the anchor scores below this.
    double negative_threshold = 1.0;
    /// Fraction of pairs annotated on a second, SICK-like [1, 5] scale with a
    /// monotone distortion and then mapped back with rescale_sick. 0 = off.
    double secondary_scale_fraction = 0.0;
    double secondary_scale_gamma = 0.7;

    bool operator==(const SynthConfig&) const = default;
};

struct SynthDataset {
    SynthConfig config;
    std::vector<ItemFeatures> items;
    /// num_items x latent_dim; row i generated items[i].
    Eigen::MatrixXd latents;
    /// feature_dim x latent_dim.
    Eigen::MatrixXd mixing;
    std::vector<ScoredPair> train;
    std::vector<ScoredPair> dev;
    std::vector<ScoredPair> test;
    /// Contrastive triplets built from `train`, each with a hard negative.
    std::vector<Triplet> triplets;
};

/// Throws InvalidInput on an invalid config (dims < 2, num_pairs < 2,
/// fractions outside [0, 1), more pairs than distinct item pairs) and
/// GenerationError when the data cannot be built (no positives, no hard
/// negative for an anchor, overlap self-check failure).
SynthDataset synth_generate(const SynthConfig& config);

/// Writes items.jsonl, train.jsonl, dev.jsonl, test.jsonl, triplets.jsonl
/// and manifest.json (config, seed, counts, CRC-32 of each file) into `dir`.
void save_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data);

/// Reads back what save_synth_dataset wrote. Latents and mixing are not
/// persisted and come back empty.
SynthDataset load_synth_dataset(const std::filesystem::path& dir);

/// JSONL, one object per item: {"id": ..., "features": [...]}.
void save_items(const std::filesystem::path& path, const std::vector<ItemFeatures>& items);
std::vector<ItemFeatures> load_items(const std::filesystem::path& path);

} // namespace pcc
