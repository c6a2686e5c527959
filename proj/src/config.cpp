#include "vltrack/config.hpp"

#include <json.hpp>

namespace vltrack {

void ModelConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(cat("model config: ", what));
    };
    require(d_img >= 1 && d_tok >= 1 && c_text >= 1 && c_vis >= 1, "dims must be >= 1");
    require(d_img == c_text, "d_img must equal c_text (shared similarity space)");
    require(meta_hidden() >= 1, "d_img/16 must be >= 1");
    require(stride >= 1, "stride must be >= 1");
    require(search_size > 0 && search_size % stride == 0, "search_size must be a multiple of stride");
    require(template_size > 0 && template_size % stride == 0,
            "template_size must be a multiple of stride");
    require(prompt_tokens >= 1, "prompt_tokens must be >= 1");
    require(tau_init > 0, "tau_init must be positive");
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["d_img"] = d_img;
    j["d_tok"] = d_tok;
    j["c_text"] = c_text;
    j["c_vis"] = c_vis;
    j["stride"] = stride;
    j["search_size"] = search_size;
    j["template_size"] = template_size;
    j["prompt_tokens"] = prompt_tokens;
    j["tau_init"] = tau_init;
    j["embed_seed"] = embed_seed;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(cat("model config: parse error: ", e.what()));
    }
    ModelConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("d_img", c.d_img);
    get("d_tok", c.d_tok);
    get("c_text", c.c_text);
    get("c_vis", c.c_vis);
    get("stride", c.stride);
    get("search_size", c.search_size);
    get("template_size", c.template_size);
    get("prompt_tokens", c.prompt_tokens);
    get("tau_init", c.tau_init);
    get("embed_seed", c.embed_seed);
    c.validate();
    return c;
}

ModelConfig toy_config() {
    ModelConfig c;
    c.search_size = 128;
    c.template_size = 64;
    return c;
}

}  // namespace vltrack
