#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "t2v/core/tensor.hpp"
#include "t2v/errors.hpp"

namespace t2v {

// Flat run configuration. File format: `key = value` lines, '#' comments.
// Every key can also be overridden by an environment variable T2V_<KEY>
// (uppercased). Unknown keys are rejected by name.
struct RunConfig {
    // clip geometry
    i64 t = 32, c = 3, h = 64, w = 64;
    i64 fps = 25;
    // text encoder
    i64 f_t = 64, embed_dim = 32, gru_hidden = 64;
    // gist CVAE
    i64 d_g = 64, d_eta = 256, cvae_base = 64;
    // text filter
    i64 f_c = 64, kx = 3, ky = 3, kz = 3, d_gt = 256, t2f_base = 64;
    // video generator
    i64 d_n = 64, gen_base = 64;
    // critic
    i64 critic_base = 64;
    double clip_value = 0.01;
    // objective
    double gamma1 = 1.0, gamma2 = 1.0, gamma3 = 0.1;
    // optimizer
    double lr = 2e-4, adam_beta1 = 0.5, adam_beta2 = 0.999;
    i64 batch_size = 16;
    // data pipeline
    double min_keypoint_overlap = 0.5;
    double toy_noise_level = 0.02;

    i64 up_blocks() const {
        return static_cast<i64>(std::llround(std::log2(static_cast<double>(h) / 4.0)));
    }
    i64 critic_layers() const {
        return std::min<i64>(5, static_cast<i64>(std::llround(std::log2(static_cast<double>(h)))) - 1);
    }
    i64 time_seed() const { return t >> up_blocks(); }
};

namespace detail {

template <class F>
void config_fields(RunConfig& c, F&& f) {
    f("t", c.t); f("c", c.c); f("h", c.h); f("w", c.w); f("fps", c.fps);
    f("f_t", c.f_t); f("embed_dim", c.embed_dim); f("gru_hidden", c.gru_hidden);
    f("d_g", c.d_g); f("d_eta", c.d_eta); f("cvae_base", c.cvae_base);
    f("f_c", c.f_c); f("kx", c.kx); f("ky", c.ky); f("kz", c.kz);
    f("d_gt", c.d_gt); f("t2f_base", c.t2f_base);
    f("d_n", c.d_n); f("gen_base", c.gen_base);
    f("critic_base", c.critic_base); f("clip_value", c.clip_value);
    f("gamma1", c.gamma1); f("gamma2", c.gamma2); f("gamma3", c.gamma3);
    f("lr", c.lr); f("adam_beta1", c.adam_beta1); f("adam_beta2", c.adam_beta2);
    f("batch_size", c.batch_size);
    f("min_keypoint_overlap", c.min_keypoint_overlap);
    f("toy_noise_level", c.toy_noise_level);
}

inline void assign_config_value(const std::string& key, const std::string& raw, i64& dst) {
    size_t pos = 0;
    i64 v = 0;
    try {
        v = std::stoll(raw, &pos);
    } catch (const std::exception&) {
        throw config_error("config key `" + key + "`: not an integer: " + raw);
    }
    if (pos != raw.size()) throw config_error("config key `" + key + "`: not an integer: " + raw);
    dst = v;
}

inline void assign_config_value(const std::string& key, const std::string& raw, double& dst) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(raw, &pos);
    } catch (const std::exception&) {
        throw config_error("config key `" + key + "`: not a number: " + raw);
    }
    if (pos != raw.size()) throw config_error("config key `" + key + "`: not a number: " + raw);
    dst = v;
}

}  // namespace detail

inline void set_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    bool found = false;
    detail::config_fields(c, [&](const char* name, auto& field) {
        if (key == name) {
            detail::assign_config_value(key, value, field);
            found = true;
        }
    });
    if (!found) throw config_error("unknown config key `" + key + "`");
}

inline std::vector<std::string> config_keys() {
    RunConfig c;
    std::vector<std::string> keys;
    detail::config_fields(c, [&](const char* name, auto&) { keys.emplace_back(name); });
    return keys;
}

inline std::string dump_config(const RunConfig& c) {
    std::ostringstream os;
    RunConfig& mut = const_cast<RunConfig&>(c);
    detail::config_fields(mut, [&](const char* name, auto& field) {
        os << name << " = " << field << "\n";
    });
    return os.str();
}

inline void validate_config(const RunConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw config_error("config: " + msg);
    };
    need(c.c == 3, "c must be 3 (RGB)");
    need(c.kx == c.c, "kx must equal the channel count");
    need(c.h == c.w, "h and w must match");
    need(c.h >= 8 && (c.h & (c.h - 1)) == 0, "h must be a power of two >= 8");
    need(c.t >= 1, "t must be positive");
    need((c.t >> c.up_blocks()) << c.up_blocks() == c.t && (c.t >> c.up_blocks()) >= 1,
         "t must be divisible by 2^log2(h/4)");
    need(c.ky % 2 == 1 && c.kz % 2 == 1 && c.ky >= 1 && c.kz >= 1, "ky and kz must be odd");
    need(c.fps >= 1, "fps must be positive");
    need(c.gamma1 >= 0 && c.gamma2 >= 0 && c.gamma3 >= 0, "gamma weights must be >= 0");
    need(c.clip_value > 0, "clip_value must be positive");
    need(c.lr > 0, "lr must be positive");
    need(c.adam_beta1 >= 0 && c.adam_beta1 < 1 && c.adam_beta2 >= 0 && c.adam_beta2 < 1,
         "adam betas must be in [0, 1)");
    need(c.batch_size >= 2, "batch_size must be >= 2 (batch statistics)");
    need(c.min_keypoint_overlap >= 0 && c.min_keypoint_overlap <= 1,
         "min_keypoint_overlap must be in [0, 1]");
    need(c.toy_noise_level >= 0, "toy_noise_level must be >= 0");
    for (i64 v : {c.f_t, c.embed_dim, c.gru_hidden, c.d_g, c.d_eta, c.cvae_base, c.f_c,
                  c.d_gt, c.t2f_base, c.d_n, c.gen_base, c.critic_base})
        need(v >= 1, "all dimension settings must be positive");
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    i64 lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (!path.empty()) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw config_error("cannot read config file " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        c = parse_config_text(ss.str());
    }
    for (const auto& key : config_keys()) {
        std::string env = "T2V_";
        for (char ch : key) env.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        if (const char* v = std::getenv(env.c_str())) set_config_key(c, key, v);
    }
    validate_config(c);
    return c;
}

}  // namespace t2v
