#pragma once

#include "prawn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace prawn::tags {

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

struct TrainMeta {
    std::uint64_t seed = 0;
    int epochs = 0;
    std::vector<double> loss_curve; // mean BCE per epoch, full pass
};

// Linear multi-label classifier: scores = sigmoid(x . W + b).
struct LinearMultiLabelModel {
    Mat weights; // d x T
    Vec bias;    // T
    TrainMeta trained_on;
};

struct BceResult {
    double loss = 0.0;
    Mat grad_weights;
    Vec grad_bias;
};

// Mean binary cross-entropy over all (example, tag) cells and its analytic
// gradient. Y entries must be 0/1.
BceResult bce_loss_and_gradient(const Mat& features, const Mat& labels, const Mat& weights,
                                const Vec& bias);

// AdamW minimization of the mean BCE; deterministic under the seed.
LinearMultiLabelModel train_multilabel(const Mat& features, const Mat& labels,
                                       const TrainConfig& config);

// Elementwise sigmoid of x . W + b.
Vec predict_tags(const LinearMultiLabelModel& model, const Vec& x);

// Mean-pool the 4 quartile frame features, then predict.
Vec estimate_gif_tags(const Mat& frame_features, const LinearMultiLabelModel& model);

// k gif ids closest to the query in Euclidean distance, ascending, ties by
// lexicographically smaller id.
std::vector<std::string> select_by_tags(const Vec& query,
                                        const std::map<std::string, Vec>& gif_tag_vectors,
                                        int k);

// Macro-averaged F1 at the threshold. Tags with neither positive labels nor
// positive predictions are excluded from the mean.
double macro_f1(const Mat& scores, const Mat& labels, double threshold = 0.5);

// "PRWT" model file: magic, u32 d, u32 T, little-endian f64 row-major
// weights then bias.
void write_model(std::ostream& out, const LinearMultiLabelModel& model);
LinearMultiLabelModel read_model(std::istream& in);
void write_model_file(const std::string& path, const LinearMultiLabelModel& model);
LinearMultiLabelModel read_model_file(const std::string& path);

} // namespace prawn::tags
