#pragma once

#include <cstring>
#include <memory>

#include "t2v/data/tensor_io.hpp"
#include "t2v/train/trainer.hpp"

namespace t2v {

namespace detail {

constexpr char kCkptMagic[8] = {'T', '2', 'V', 'C', 'K', 'P', 'T', '1'};

inline std::uint32_t take_u32le(const std::string& in, size_t& at) {
    if (at + 4 > in.size()) throw std::invalid_argument("truncated checkpoint integer");
    const std::uint32_t v = get_u32le(reinterpret_cast<const unsigned char*>(in.data() + at));
    at += 4;
    return v;
}

inline float take_f32le(const std::string& in, size_t& at) {
    if (at + 4 > in.size()) throw std::invalid_argument("truncated checkpoint float");
    const float v = get_f32le(reinterpret_cast<const unsigned char*>(in.data() + at));
    at += 4;
    return v;
}

inline void put_str(std::string& out, const std::string& s) {
    put_u32le(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

inline std::string get_str(const std::string& in, size_t& at) {
    const std::uint32_t n = take_u32le(in, at);
    if (at + n > in.size()) throw std::invalid_argument("truncated checkpoint string");
    std::string s = in.substr(at, n);
    at += n;
    return s;
}

inline void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64le(const std::string& in, size_t& at) {
    if (at + 8 > in.size()) throw std::invalid_argument("truncated checkpoint integer");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    at += 8;
    return v;
}

template <class T>
void put_tensor(std::string& out, const Tensor<T>& t) {
    put_u32le(out, static_cast<std::uint32_t>(t.shape.size()));
    for (i64 d : t.shape) put_u64le(out, static_cast<std::uint64_t>(d));
    for (i64 i = 0; i < t.numel(); ++i) put_f32le(out, static_cast<float>(t[i]));
}

template <class T>
Tensor<T> get_tensor(const std::string& in, size_t& at) {
    const std::uint32_t rank = take_u32le(in, at);
    std::vector<i64> shape(rank);
    for (auto& d : shape) d = static_cast<i64>(get_u64le(in, at));
    Tensor<T> t(shape);
    for (i64 i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(take_f32le(in, at));
    return t;
}

template <class T>
void put_adam(std::string& out, Adam<T>& opt, const ParamStore<T>& ps) {
    put_u64le(out, static_cast<std::uint64_t>(opt.steps()));
    std::vector<std::string> names;
    for (const auto& name : ps.param_names())
        if (opt.state().count(name)) names.push_back(name);
    put_u32le(out, static_cast<std::uint32_t>(names.size()));
    for (const auto& name : names) {
        put_str(out, name);
        put_tensor(out, opt.state().at(name).m);
        put_tensor(out, opt.state().at(name).v);
    }
}

template <class T>
void get_adam(const std::string& in, size_t& at, Adam<T>& opt) {
    opt.set_steps(static_cast<i64>(get_u64le(in, at)));
    const std::uint32_t n = take_u32le(in, at);
    opt.state().clear();
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::string name = get_str(in, at);
        auto& st = opt.state()[name];
        st.m = get_tensor<T>(in, at);
        st.v = get_tensor<T>(in, at);
    }
}

}  // namespace detail

// Whole training state in one binary file: config snapshot, variant, vocab,
// every named parameter and buffer, both optimizers, RNG streams and the
// step counter.
template <class T>
void save_checkpoint(const std::string& path, Trainer<T>& trainer) {
    Model<T>& m = trainer.model();
    std::string out(detail::kCkptMagic, sizeof(detail::kCkptMagic));
    detail::put_str(out, dump_config(m.cfg));
    detail::put_str(out, variant_name(m.variant));
    detail::put_u64le(out, m.ps.seed());
    detail::put_u64le(out, trainer.seed());
    detail::put_u64le(out, static_cast<std::uint64_t>(trainer.step()));
    detail::put_str(out, trainer.noise_rng().state());
    detail::put_str(out, trainer.shuffle_rng().state());
    detail::put_u32le(out, static_cast<std::uint32_t>(m.vocab.size()));
    for (i64 i = 0; i < m.vocab.size(); ++i) detail::put_str(out, m.vocab.token_of(i));
    detail::put_u32le(out, static_cast<std::uint32_t>(m.ps.param_names().size()));
    for (const auto& name : m.ps.param_names()) {
        detail::put_str(out, name);
        detail::put_tensor(out, m.ps.at(name).value());
    }
    detail::put_u32le(out, static_cast<std::uint32_t>(m.ps.buffer_names().size()));
    for (const auto& name : m.ps.buffer_names()) {
        detail::put_str(out, name);
        detail::put_tensor(out, m.ps.buffer_at(name));
    }
    detail::put_adam(out, trainer.opt_critic(), m.ps);
    detail::put_adam(out, trainer.opt_gen(), m.ps);
    detail::write_file_bytes(path, out);
}

template <class T>
struct LoadedTrainer {
    std::unique_ptr<Model<T>> model;
    std::unique_ptr<Trainer<T>> trainer;
};

template <class T>
LoadedTrainer<T> load_checkpoint(const std::string& path) {
    const std::string in = detail::read_file_bytes(path);
    if (in.size() < sizeof(detail::kCkptMagic) ||
        std::memcmp(in.data(), detail::kCkptMagic, sizeof(detail::kCkptMagic)) != 0)
        throw std::invalid_argument("not a checkpoint file: " + path);
    size_t at = sizeof(detail::kCkptMagic);
    RunConfig cfg = parse_config_text(detail::get_str(in, at));
    validate_config(cfg);
    const Variant variant = parse_variant(detail::get_str(in, at));
    const std::uint64_t ps_seed = detail::get_u64le(in, at);
    const std::uint64_t train_seed = detail::get_u64le(in, at);
    const i64 step = static_cast<i64>(detail::get_u64le(in, at));
    const std::string noise_state = detail::get_str(in, at);
    const std::string shuffle_state = detail::get_str(in, at);
    const std::uint32_t vocab_n = detail::take_u32le(in, at);
    std::vector<std::string> tokens;
    tokens.reserve(vocab_n);
    for (std::uint32_t i = 0; i < vocab_n; ++i) tokens.push_back(detail::get_str(in, at));

    LoadedTrainer<T> out;
    out.model = std::make_unique<Model<T>>(cfg, variant, Vocabulary::from_tokens(std::move(tokens)),
                                           ps_seed);
    out.trainer = std::make_unique<Trainer<T>>(*out.model, train_seed);
    out.trainer->set_step(step);
    out.trainer->noise_rng().restore(out.trainer->noise_rng().seed(), noise_state);
    out.trainer->shuffle_rng().restore(out.trainer->shuffle_rng().seed(), shuffle_state);

    ParamStore<T>& ps = out.model->ps;
    const std::uint32_t n_params = detail::take_u32le(in, at);
    for (std::uint32_t i = 0; i < n_params; ++i) {
        const std::string name = detail::get_str(in, at);
        Tensor<T> t = detail::get_tensor<T>(in, at);
        Tensor<T>& dst = ps.at(name).value();
        check_shape(t, dst.shape, name.c_str());
        std::copy_n(t.data(), t.numel(), dst.data());
    }
    const std::uint32_t n_buffers = detail::take_u32le(in, at);
    for (std::uint32_t i = 0; i < n_buffers; ++i) {
        const std::string name = detail::get_str(in, at);
        Tensor<T> t = detail::get_tensor<T>(in, at);
        Tensor<T>& dst = ps.buffer_at(name);
        check_shape(t, dst.shape, name.c_str());
        std::copy_n(t.data(), t.numel(), dst.data());
    }
    detail::get_adam(in, at, out.trainer->opt_critic());
    detail::get_adam(in, at, out.trainer->opt_gen());
    if (at != in.size()) throw std::invalid_argument("trailing bytes in checkpoint: " + path);
    return out;
}

}  // namespace t2v
