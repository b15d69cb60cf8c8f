#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morphopt/linalg.hpp"
#include "morphopt/rng.hpp"

namespace morphopt {

struct Layer {
    Mat W;
    Vec b;
};

// Symmetric encoder-decoder MLP. Hidden layers use tanh; the latent and
// output layers are linear. Default shape 120 -> 64 -> 32 -> z and back.
struct AeModel {
    int input_dim = 120;
    int latent_dim = 2;
    std::vector<int> hidden = {64, 32};
    std::vector<Layer> enc;
    std::vector<Layer> dec;

    // uniform fan-in initialization, biases zero
    static AeModel init(int input_dim, int latent_dim, std::vector<int> hidden, Rng& rng);
};

Vec encode(const AeModel& m, const Vec& x);
Vec decode(const AeModel& m, const Vec& z);

// Exact Jacobian of the decoder at z (input_dim × latent_dim), one tangent
// forward pass per latent dimension.
Mat decoder_jacobian(const AeModel& m, const Vec& z);

// Relaxed distortion measure over a latent batch:
//   mean(Tr(G²)) / mean(Tr(G))²  with  G = JᵀJ.
// Throws ZeroJacobian when the mean trace vanishes.
double iso_loss(const AeModel& m, const std::vector<Vec>& z_batch);

// Mixup-style latent augmentation: z' = (1-a) z_i + a z_j with
// a ~ U[mix_lo, mix_hi) and (i, j) drawn uniformly. Output size equals input
// size; requires at least two points.
std::vector<Vec> augment_latents(const std::vector<Vec>& z, double mix_lo, double mix_hi,
                                 Rng& rng);

// Loss terms and parameter gradients for one batch: mean squared
// reconstruction error over `batch` plus iso_weight times the relaxed
// distortion measure at `iso_latents` (treated as constants). Exposed so the
// analytic gradients can be checked against finite differences of the
// forward losses.
struct LossGrads {
    double mse = 0.0;
    double iso = 0.0;
    std::vector<Layer> enc;  // same shapes as the model, filled with gradients
    std::vector<Layer> dec;
};
LossGrads batch_gradients(const AeModel& m, const std::vector<Vec>& batch,
                          const std::vector<Vec>& iso_latents, double iso_weight);

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 1000;
    int batch = 10;
    double iso_weight = 1e-7;
    double mix_lo = -0.2;
    double mix_hi = 1.2;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int latent_dim = 2;
    std::vector<int> hidden = {64, 32};
};

struct EpochStats {
    double mse = 0.0;
    double iso = 0.0;
    double total = 0.0;
};

struct TrainResult {
    AeModel model;
    std::vector<EpochStats> history;
};

// Adam training with shuffled minibatches; the iso term is evaluated on
// augmented latents treated as constants (no gradient into the encoder).
// Deterministic for a fixed seed. Throws NonFiniteLoss if the loss diverges.
TrainResult train(const std::vector<Vec>& dataset, const TrainConfig& cfg);

// Full-data mean squared reconstruction error (per feature).
double eval_mse(const AeModel& m, const std::vector<Vec>& dataset);

// Checkpoint serialization: shapes, row-major weights, training config, seed.
std::string model_to_json(const AeModel& m, const TrainConfig& cfg);
AeModel model_from_json(const std::string& text, TrainConfig* cfg_out = nullptr);

// (epoch, mse, iso, total) rows.
std::string history_to_csv(const std::vector<EpochStats>& history);

}  // namespace morphopt
