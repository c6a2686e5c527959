#pragma once

#include "vltrack/correlate.hpp"
#include "vltrack/head.hpp"
#include "vltrack/textconv.hpp"

namespace vltrack {

// All trainable state of one tracker instance.
struct TrackModel {
    ModelConfig cfg;
    ImageEncoderParams img_enc;
    TextEncoderParams txt_enc;
    BackboneParams backbone;
    PromptContextParams prompt;
    ProjectionParams proj;
    HeadParams head;

    static TrackModel init(const ModelConfig& cfg, uint64_t seed);

    void visit(const ParamVisitor& v);
    std::vector<Mat*> parameters();  // deterministic order
    // Parameter-space constraints applied after optimizer steps.
    void clamp_constraints();

    TokenEmbedder embedder() const {
        return HashTokenEmbedder{cfg.d_tok, cfg.embed_seed};
    }

    TargetDescription describe(const Image& patch, const EmbeddedVocabulary& ev) {
        return vltrack::describe(img_enc, txt_enc, prompt, patch, ev, cfg);
    }
};

// Versioned binary weight container: config header plus named arrays.
// save -> load reproduces bit-identical parameters.
void save_weights(const std::string& path, TrackModel& model);
TrackModel load_weights(const std::string& path);

}  // namespace vltrack
