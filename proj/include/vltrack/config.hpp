#pragma once

#include <cstdint>
#include <string>

#include "vltrack/common.hpp"

namespace vltrack {

// Dimensions and fixed hyperparameters of one model instance. The image and
// text encoders share an embedding space, so d_img must equal c_text.
struct ModelConfig {
    int d_img = 64;          // image feature dim (shared image/text space)
    int d_tok = 32;          // prompt / label token dim
    int c_text = 64;         // text feature dim C_T
    int c_vis = 64;          // visual feature channels C
    int stride = 16;         // backbone patch size and feature stride
    int search_size = 384;   // search crop resolution
    int template_size = 192; // template crop resolution (= image-encoder input)
    int prompt_tokens = 4;   // K learnable context tokens
    double tau_init = 0.07;  // initial softmax temperature
    uint64_t embed_seed = 17;  // word-embedding hash seed

    int search_grid() const { return search_size / stride; }
    int template_grid() const { return template_size / stride; }
    int meta_hidden() const { return d_img / 16; }

    void validate() const;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// Small config used by tests and the toy training pipeline: same dims as the
// default, smaller crops for fast CPU runs.
ModelConfig toy_config();

}  // namespace vltrack
