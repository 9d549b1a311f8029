#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "flowtriage/mlp.hpp"
#include "flowtriage/window.hpp"

namespace flowtriage {

// Feature scaling fitted on benign training-period windows only.
struct Standardizer {
    Eigen::Matrix<double, 6, 1> mu = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 1> sigma = Eigen::Matrix<double, 6, 1>::Ones();
    double epsilon = 1e-8;
};

// Reconstruction autoencoder; anomaly score = mean squared residual.
struct AEModel {
    Mlp net;
    std::vector<int> dims;
    int epochs = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
};

struct ScoredWindow {
    int index = 0;
    double aad_score = 0.0;
    WindowMetadata metadata;
    int label = 0;
};

// Model + scaler travel together: scores are only meaningful for inputs
// standardized with the same parameters used in training.
struct ScoringModel {
    AEModel model;
    Standardizer standardizer;
};

struct AETrainConfig {
    std::vector<int> dims = {6, 8, 2, 8, 6};
    int epochs = 200;
    double lr = 1e-2;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

// rows = samples, 6 columns; population-std convention, N >= 2 required
Standardizer fit_standardizer(const Eigen::MatrixXd& benign_numeric, double epsilon = 1e-8);

Eigen::MatrixXd standardize(const Standardizer& s, const Eigen::MatrixXd& x);
Eigen::Matrix<double, 6, 1> standardize_row(const Standardizer& s,
                                            const Eigen::Matrix<double, 6, 1>& x);

AEModel train_autoencoder(const Eigen::MatrixXd& benign_std, const AETrainConfig& cfg);

// Builds a model that performs exactly the given forward pass. Layer i maps
// dims[i] -> dims[i+1] with weights[i] (dims[i+1] x dims[i]) and acts[i].
AEModel load_explicit_weights(const std::vector<Eigen::MatrixXd>& weights,
                              const std::vector<Eigen::VectorXd>& biases,
                              const std::vector<Activation>& acts);

double mean_reconstruction_error(const AEModel& m, const Eigen::MatrixXd& rows);

// Analytic gradient of mean_reconstruction_error w.r.t. the flattened
// parameters; pairs with Mlp::flatten for finite-difference checks.
Eigen::VectorXd reconstruction_grad(const AEModel& m, const Eigen::MatrixXd& rows);

double aad_score(const AEModel& m, const Eigen::Matrix<double, 6, 1>& x);

std::vector<ScoredWindow> score_windows(const AEModel& m, const Standardizer& s,
                                        const std::vector<Window>& windows);

std::string scoring_model_to_json(const ScoringModel& sm);
ScoringModel scoring_model_from_json(const std::string& text);

}  // namespace flowtriage
