#pragma once

#include "prawn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prawn::joint {

// Multimodal feature blocks of one gif: features of its concatenated
// per-frame captions, of the detected object names (objects kept with
// probability > 0.5 at ingestion), and the mean of its region-of-interest
// feature vectors. A missing modality is a zero block with its flag off.
struct GifFeatureBundle {
    Vec caption_block;
    Vec object_name_block;
    Vec region_block;
    bool has_caption = true;
    bool has_object_names = true;
    bool has_region = true;
};

struct BundleDims {
    Index caption = 0;
    Index object_names = 0;
    Index region = 0;
    Index total() const { return caption + object_names + region; }
};

struct AblationMask {
    bool use_caption = true;
    bool use_object_names = true;
    bool use_region_features = true;
};

// [caption | object names | regions] with masked blocks zeroed.
// Throws on an all-false mask or block dimensions not matching `dims`.
Vec assemble_gif_features(const GifFeatureBundle& bundle, const AblationMask& mask,
                          const BundleDims& dims);
Mat assemble_feature_matrix(std::span<const GifFeatureBundle> bundles,
                            const AblationMask& mask, const BundleDims& dims);

// Two linear encoders into a shared embedding space plus the softmax
// temperature used by the contrastive objective.
struct JointEmbedParams {
    Mat w_text; // d_t x d_e
    Mat w_gif;  // d_g x d_e
    double temperature = 0.07;
};

enum class Side { Text, Gif };

struct DegenerateEmbeddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// L2-normalized projection x . W_side. Throws DegenerateEmbeddingError when
// the projection is exactly zero.
Vec encode(const JointEmbedParams& params, Side side, const Vec& x);
// Row-wise encode of a feature matrix.
Mat encode_all(const JointEmbedParams& params, Side side, const Mat& features);

struct ContrastiveResult {
    double loss = 0.0;
    Mat grad_w_text;
    Mat grad_w_gif;
};

// Symmetric in-batch softmax cross-entropy over the cosine similarity matrix
// S[i][j] = cos(text_i, gif_j) / temperature, diagonal pairs as targets.
ContrastiveResult contrastive_loss(const JointEmbedParams& params, const Mat& text_features,
                                   const Mat& gif_features);

struct JointTrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int epochs = 16;
    int batch_size = 16;
    double temperature = 0.07;
    Index embed_dim = 32;
    std::uint64_t seed = 0;
};

// AdamW over both encoders with a seeded shuffle schedule; deterministic.
JointEmbedParams train_joint(const Mat& text_features, const Mat& gif_features,
                             const JointTrainConfig& config);
// Assembles gif features with the mask first, then trains.
JointEmbedParams train_joint(const Mat& text_features,
                             std::span<const GifFeatureBundle> bundles,
                             const AblationMask& mask, const BundleDims& dims,
                             const JointTrainConfig& config);

// Top-k gif ids by cosine similarity against unit-norm gif embeddings,
// descending, ties by lexicographically smaller id.
std::vector<std::string> rank_gifs(const JointEmbedParams& params, const Vec& text_features,
                                   const Mat& gif_embeddings,
                                   std::span<const std::string> ids, int k);

// "PRWJ" parameter file: magic, u32 d_t, u32 d_g, u32 d_e, f64 temperature,
// then W_text and W_gif as little-endian f64 row-major.
void write_params(std::ostream& out, const JointEmbedParams& params);
JointEmbedParams read_params(std::istream& in);
void write_params_file(const std::string& path, const JointEmbedParams& params);
JointEmbedParams read_params_file(const std::string& path);

} // namespace prawn::joint
