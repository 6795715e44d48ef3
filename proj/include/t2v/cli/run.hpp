#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "t2v/config.hpp"
#include "t2v/data/clips.hpp"
#include "t2v/data/gif.hpp"
#include "t2v/data/metadata.hpp"
#include "t2v/data/png.hpp"
#include "t2v/data/split.hpp"
#include "t2v/data/toy.hpp"
#include "t2v/errors.hpp"
#include "t2v/eval/classifier.hpp"
#include "t2v/eval/metrics.hpp"
#include "t2v/train/checkpoint.hpp"
#include "t2v/train/trainer.hpp"

namespace t2v {
namespace detail {

// "3" -> the first three entries of `universe`; "red,blue" -> those names.
inline std::vector<std::string> pick_names(const std::string& arg,
                                           const std::vector<std::string>& universe,
                                           const std::string& what) {
    if (arg.empty()) throw std::invalid_argument(what + ": empty selection");
    if (std::all_of(arg.begin(), arg.end(),
                    [](unsigned char c) { return std::isdigit(c) != 0; })) {
        const i64 n = std::stoll(arg);
        if (n < 1 || n > static_cast<i64>(universe.size()))
            throw std::invalid_argument(what + ": count must be in [1, " +
                                        std::to_string(universe.size()) + "], got " + arg);
        return {universe.begin(), universe.begin() + n};
    }
    std::vector<std::string> names;
    std::istringstream is(arg);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (std::find(universe.begin(), universe.end(), tok) == universe.end())
            throw std::invalid_argument(what + ": unknown name `" + tok + "`");
        if (std::find(names.begin(), names.end(), tok) != names.end())
            throw std::invalid_argument(what + ": duplicate name `" + tok + "`");
        names.push_back(tok);
    }
    if (names.empty()) throw std::invalid_argument(what + ": empty selection");
    return names;
}

inline std::vector<std::string> split_list(const std::string& arg) {
    std::vector<std::string> out;
    std::istringstream is(arg);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

struct SourceEntry {
    std::string source_id, frames_path, caption;
};

// TSV manifest `source_id<TAB>frames_path<TAB>caption`; relative frame paths
// resolve against the manifest's directory.
inline std::vector<SourceEntry> read_sources_tsv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read sources manifest " + path);
    const auto base = std::filesystem::path(path).parent_path();
    std::vector<SourceEntry> entries;
    std::string line;
    i64 lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected source_id<TAB>frames_path<TAB>caption");
        SourceEntry e;
        e.source_id = line.substr(0, t1);
        e.frames_path = line.substr(t1 + 1, t2 - t1 - 1);
        e.caption = line.substr(t2 + 1);
        if (e.source_id.empty() || e.frames_path.empty() || e.caption.empty())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty field");
        if (std::filesystem::path(e.frames_path).is_relative())
            e.frames_path = (base / e.frames_path).string();
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::invalid_argument("sources manifest is empty: " + path);
    return entries;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write " + path);
    f << text;
}

template <class T>
void save_sample(const std::string& dir, const Sample<T>& sample, i64 fps) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const i64 H = sample.gist.dim(1), W = sample.gist.dim(2);
    write_png((fs::path(dir) / "gist.png").string(), to_rgb8(sample.gist), H, W);
    const i64 frames = sample.video.dim(0);
    std::vector<std::vector<unsigned char>> rgb;
    rgb.reserve(static_cast<size_t>(frames));
    const i64 fsz = sample.video.numel() / frames;
    for (i64 t = 0; t < frames; ++t) {
        Tensor<T> frame({sample.video.dim(1), sample.video.dim(2), sample.video.dim(3)});
        std::copy_n(sample.video.data() + t * fsz, fsz, frame.data());
        rgb.push_back(to_rgb8(frame));
    }
    const int delay_cs = std::max(2, static_cast<int>(std::lround(100.0 / static_cast<double>(fps))));
    write_gif((fs::path(dir) / "video.gif").string(), rgb, sample.video.dim(2),
              sample.video.dim(3), delay_cs);
    write_rawvid((fs::path(dir) / "video.rawvid").string(), sample.video);
}

// Grayscale heatmap of the confusion matrix, one 24x24 block per cell.
inline void confusion_png(const std::string& path, const EvalReport& report) {
    const i64 k = static_cast<i64>(report.classes.size());
    const i64 cell = 24, size = k * cell;
    i64 peak = 1;
    for (const auto& row : report.confusion)
        for (i64 v : row) peak = std::max(peak, v);
    std::vector<unsigned char> rgb(static_cast<size_t>(size * size * 3));
    for (i64 y = 0; y < size; ++y)
        for (i64 x = 0; x < size; ++x) {
            const i64 v = report.confusion[static_cast<size_t>(y / cell)]
                                          [static_cast<size_t>(x / cell)];
            const auto g = static_cast<unsigned char>(
                std::lround(255.0 * static_cast<double>(v) / static_cast<double>(peak)));
            const size_t at = static_cast<size_t>((y * size + x) * 3);
            rgb[at] = rgb[at + 1] = rgb[at + 2] = g;
        }
    write_png(path, rgb, size, size);
}

inline void check_corpus_matches(const std::vector<CorpusItem>& items, const RunConfig& cfg) {
    for (const auto& item : items)
        check_shape(item.video, {cfg.t, cfg.c, cfg.h, cfg.w}, "corpus clip");
}

}  // namespace detail

struct CurateArgs {
    std::string metadata, allowlist, stopwords, out, report;
    CurationRules rules;
};

inline void cmd_curate(const CurateArgs& args) {
    const auto records = read_metadata_jsonl(args.metadata);
    const auto allow = load_allowlist(args.allowlist);
    const auto stop = args.stopwords.empty() ? default_stopwords() : load_stopwords(args.stopwords);
    const auto result = curate_metadata(records, allow, args.rules, stop);
    std::ostringstream accepted;
    for (i64 i : result.accepted) {
        const auto& r = records[static_cast<size_t>(i)];
        nlohmann::json j{{"source_id", r.source_id}, {"title", r.title},
                         {"description", r.description}, {"duration_seconds", r.duration_seconds},
                         {"language", r.language},      {"tags", r.tags}};
        accepted << j.dump() << "\n";
    }
    detail::write_text_file(args.out, accepted.str());
    std::ostringstream report;
    report << "source_id\taccepted\treasons\n";
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& o = result.outcomes[i];
        report << records[i].source_id << "\t" << (o.accepted ? 1 : 0) << "\t";
        for (size_t r = 0; r < o.reasons.size(); ++r) report << (r ? "," : "") << o.reasons[r];
        report << "\n";
    }
    const std::string report_path = args.report.empty() ? args.out + ".report.tsv" : args.report;
    detail::write_text_file(report_path, report.str());
    std::ostringstream tags;
    for (size_t i = 0; i < result.selected_tags.size(); ++i)
        tags << (i ? "," : "") << result.selected_tags[i];
    std::cout << "selected tags: " << tags.str() << "\n";
    std::cout << "accepted " << result.accepted.size() << " of " << records.size()
              << " records -> " << args.out << "\n";
}

struct PreprocessArgs {
    std::string sources, out;
    ClipQualificationConfig qual;
    i64 workers = 1;
};

inline void cmd_preprocess(const PreprocessArgs& args) {
    if (args.workers < 1) throw std::invalid_argument("--workers must be >= 1");
    const auto sources = detail::read_sources_tsv(args.sources);
    std::vector<CorpusItem> items;
    for (const auto& src : sources) {
        const Tensor<float> stacked = read_rawvid(src.frames_path);
        if (stacked.rank() != 4 || stacked.dim(1) != 3)
            throw std::invalid_argument("frames file must be [N,3,H,W]: " + src.frames_path);
        std::vector<Tensor<float>> frames;
        const i64 fsz = stacked.numel() / stacked.dim(0);
        for (i64 t = 0; t < stacked.dim(0); ++t) {
            Tensor<float> f({3, stacked.dim(2), stacked.dim(3)});
            std::copy_n(stacked.data() + t * fsz, fsz, f.data());
            frames.push_back(std::move(f));
        }
        const auto clips = qualify_clips(frames, args.qual);
        for (size_t k = 0; k < clips.size(); ++k) {
            CorpusItem item;
            item.video = clips[k];
            item.meta = {src.source_id + "_clip" + std::to_string(k), src.source_id, src.caption};
            items.push_back(std::move(item));
        }
    }
    save_corpus(args.out, items);
    std::cout << "wrote " << items.size() << " clips from " << sources.size() << " sources -> "
              << args.out << "\n";
}

struct SynthArgs {
    std::string colors = "4", motions = "4", out;
    i64 per_combo = 10, t = 32, h = 64;
    double noise = 0.02;
    std::uint64_t seed = 0;
};

inline void cmd_synth_data(const SynthArgs& args) {
    std::vector<std::string> color_names;
    for (const auto& [name, rgb] : toy_palette()) color_names.push_back(name);
    const std::vector<std::string> motion_names = {"right",    "left",    "up",         "down",
                                                   "up-right", "up-left", "down-right", "down-left"};
    ToyCorpusSpec spec;
    spec.background_colors = detail::pick_names(args.colors, color_names, "--colors");
    spec.motions = detail::pick_names(args.motions, motion_names, "--motions");
    spec.clips_per_combination = args.per_combo;
    spec.noise_level = args.noise;
    spec.seed = args.seed;
    spec.t = args.t;
    spec.h = args.h;
    const auto clips = synthesize_toy_corpus(spec);
    save_corpus(args.out, clips);
    std::cout << "wrote " << clips.size() << " clips -> " << args.out << "\n";
}

struct TrainArgs {
    std::string variant = "t2v", config, data, out = "run", resume;
    i64 steps = 200, workers = 1;
    std::uint64_t seed = 0;
    bool variant_given = false;
};

inline void cmd_train(const TrainArgs& args) {
    namespace fs = std::filesystem;
    if (args.steps < 1) throw std::invalid_argument("--steps must be >= 1");
    if (args.workers < 1) throw std::invalid_argument("--workers must be >= 1");
    const auto items = load_corpus(args.data);
    fs::create_directories(args.out);

    std::unique_ptr<Model<float>> model;
    std::unique_ptr<Trainer<float>> trainer;
    LoadedTrainer<float> loaded;
    if (!args.resume.empty()) {
        loaded = load_checkpoint<float>(args.resume);
        if (args.variant_given && parse_variant(args.variant) != loaded.model->variant)
            throw std::invalid_argument("--variant conflicts with checkpoint variant " +
                                        std::string(variant_name(loaded.model->variant)));
        model = std::move(loaded.model);
        trainer = std::move(loaded.trainer);
    } else {
        const RunConfig cfg = load_config(args.config);
        std::vector<std::string> captions;
        for (const auto& item : items) captions.push_back(item.meta.caption);
        model = std::make_unique<Model<float>>(cfg, parse_variant(args.variant),
                                               Vocabulary::build(captions), args.seed);
        trainer = std::make_unique<Trainer<float>>(*model, args.seed);
    }
    detail::check_corpus_matches(items, model->cfg);

    const std::string loss_path = (fs::path(args.out) / "loss.csv").string();
    const bool fresh = !fs::exists(loss_path);
    std::ofstream csv(loss_path, std::ios::binary | std::ios::app);
    if (!csv) throw std::invalid_argument("cannot write " + loss_path);
    if (fresh) write_loss_csv_header(csv);

    try {
        const auto records = train_on_corpus(*trainer, items, args.steps, &csv);
        csv.flush();
        const std::string ckpt = (fs::path(args.out) / "checkpoint.ckpt").string();
        save_checkpoint(ckpt, *trainer);
        const auto& last = records.back();
        std::cout << "trained " << variant_name(model->variant) << " for " << args.steps
                  << " steps (total step " << trainer->step() << "), final total loss "
                  << last.total << "\n";
        std::cout << "checkpoint -> " << ckpt << "\nloss log -> " << loss_path << "\n";
    } catch (const training_diverged&) {
        csv.flush();
        save_checkpoint((fs::path(args.out) / "diverged.ckpt").string(), *trainer);
        throw;
    }
}

struct GenerateArgs {
    std::string checkpoint, caption, out = ".";
    std::uint64_t seed = 0;
};

inline void cmd_generate(const GenerateArgs& args) {
    auto loaded = load_checkpoint<float>(args.checkpoint);
    const auto sample = generate_sample(*loaded.model, args.caption, args.seed);
    detail::save_sample(args.out, sample, loaded.model->cfg.fps);
    namespace fs = std::filesystem;
    std::cout << "gist -> " << (fs::path(args.out) / "gist.png").string() << "\n"
              << "video -> " << (fs::path(args.out) / "video.gif").string() << "\n"
              << "tensor -> " << (fs::path(args.out) / "video.rawvid").string() << "\n";
}

struct EvaluateArgs {
    std::string data, variants, checkpoints, out = "eval";
    i64 n_per_class = 4, epochs = 20, batch = 8;
    std::uint64_t seed = 0;
};

inline void cmd_evaluate(const EvaluateArgs& args) {
    namespace fs = std::filesystem;
    const auto variant_names = detail::split_list(args.variants);
    const auto ckpt_paths = detail::split_list(args.checkpoints);
    if (variant_names.empty()) throw std::invalid_argument("--variants: empty list");
    if (variant_names.size() != ckpt_paths.size())
        throw std::invalid_argument("--variants and --checkpoints must list the same count");

    const auto items = load_corpus(args.data);
    std::vector<std::string> classes;
    for (const auto& item : items)
        if (std::find(classes.begin(), classes.end(), item.meta.caption) == classes.end())
            classes.push_back(item.meta.caption);
    std::sort(classes.begin(), classes.end());
    if (classes.size() < 2) throw std::invalid_argument("evaluate: corpus has fewer than 2 captions");

    RunConfig clf_cfg;
    clf_cfg.t = items.front().video.dim(0);
    clf_cfg.h = clf_cfg.w = items.front().video.dim(2);
    validate_config(clf_cfg);
    detail::check_corpus_matches(items, clf_cfg);

    auto to_labeled = [&](const std::vector<CorpusItem>& part) {
        std::vector<LabeledClip> out;
        for (const auto& item : part) {
            const auto at = std::find(classes.begin(), classes.end(), item.meta.caption);
            out.push_back({item.video, static_cast<i64>(at - classes.begin())});
        }
        return out;
    };
    const auto split = split_dataset(items, {0.7, 0.1, 0.2}, args.seed);
    VideoClassifier<float> clf(clf_cfg, classes, Rng(args.seed).child("clf/init").next_u64());
    const double val_acc = train_classifier(clf, to_labeled(split[0]), to_labeled(split[1]),
                                            args.epochs, args.batch, args.seed);
    const auto in_set = evaluate_clips(clf, to_labeled(split[2]));

    fs::create_directories(args.out);
    std::ostringstream report;
    report << "classes " << classes.size() << ", classifier val accuracy " << val_acc << "\n";
    report << "in_set accuracy " << in_set.accuracy << " n=" << in_set.sample_count << "\n";
    for (size_t i = 0; i < variant_names.size(); ++i) {
        auto loaded = load_checkpoint<float>(ckpt_paths[i]);
        const Variant want = parse_variant(variant_names[i]);
        if (loaded.model->variant != want)
            throw std::invalid_argument("checkpoint " + ckpt_paths[i] + " holds variant " +
                                        std::string(variant_name(loaded.model->variant)) +
                                        ", not " + variant_names[i]);
        if (loaded.model->cfg.t != clf_cfg.t || loaded.model->cfg.h != clf_cfg.h)
            throw std::invalid_argument("checkpoint " + ckpt_paths[i] +
                                        " clip size does not match the corpus");
        const auto rep = evaluate_generated(clf, *loaded.model, classes, args.n_per_class,
                                            Rng(args.seed).child("gen/" + variant_names[i]).next_u64());
        const std::string tag = variant_name(want);
        detail::write_text_file((fs::path(args.out) / ("confusion_" + tag + ".csv")).string(),
                                confusion_csv(rep));
        detail::confusion_png((fs::path(args.out) / ("confusion_" + tag + ".png")).string(), rep);
        report << tag << " accuracy " << rep.accuracy << " n=" << rep.sample_count << "\n";
    }
    detail::write_text_file((fs::path(args.out) / "report.txt").string(), report.str());
    std::cout << report.str();
    std::cout << "report -> " << (fs::path(args.out) / "report.txt").string() << "\n";
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"text-conditioned video generation toolkit"};
    app.require_subcommand(1);

    CurateArgs cu;
    auto* curate = app.add_subcommand("curate", "filter raw metadata records into a study set");
    curate->add_option("--metadata", cu.metadata, "metadata records, one JSON object per line")
        ->required()->capture_default_str();
    curate->add_option("--allowlist", cu.allowlist, "file of allowed tags, one per line")
        ->required()->capture_default_str();
    curate->add_option("--stopwords", cu.stopwords, "stopword list file (default: built-in)")
        ->capture_default_str();
    curate->add_option("--out", cu.out, "accepted records output (JSONL)")
        ->required()->capture_default_str();
    curate->add_option("--report", cu.report, "per-record report TSV (default: <out>.report.tsv)")
        ->capture_default_str();
    curate->add_option("--top-tags", cu.rules.top_tags, "size of the selected tag set")
        ->capture_default_str();
    curate->add_option("--min-tag-matches", cu.rules.min_tag_matches,
                       "selected tags a record must carry")->capture_default_str();
    curate->add_option("--min-duration", cu.rules.min_duration, "minimum duration, seconds")
        ->capture_default_str();
    curate->add_option("--max-duration", cu.rules.max_duration, "maximum duration, seconds")
        ->capture_default_str();
    curate->add_option("--min-words", cu.rules.min_meaningful_words,
                       "meaningful title words required")->capture_default_str();
    curate->callback([&] { cmd_curate(cu); });

    PreprocessArgs pp;
    auto* preprocess =
        app.add_subcommand("preprocess", "cut decoded frame dumps into qualified training clips");
    preprocess->add_option("--sources", pp.sources,
                           "TSV manifest: source_id<TAB>frames.rawvid<TAB>caption")
        ->required()->capture_default_str();
    preprocess->add_option("--out", pp.out, "corpus output directory")
        ->required()->capture_default_str();
    preprocess->add_option("--fps", pp.qual.fps, "frame rate of the sources")->capture_default_str();
    preprocess->add_option("--clip-length", pp.qual.clip_length, "frames per training clip")
        ->capture_default_str();
    preprocess->add_option("--resolution", pp.qual.resolution, "output clip resolution")
        ->capture_default_str();
    preprocess->add_option("--min-overlap", pp.qual.min_keypoint_overlap,
                           "keypoint inlier fraction below which a cut is declared")
        ->capture_default_str();
    preprocess->add_option("--workers", pp.workers, "worker count (output is identical for any)")
        ->capture_default_str();
    preprocess->callback([&] { cmd_preprocess(pp); });

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth-data", "render a synthetic moving-shape corpus");
    synth->add_option("--colors", sy.colors, "background colors: count or comma list")
        ->capture_default_str();
    synth->add_option("--motions", sy.motions, "motion directions: count or comma list")
        ->capture_default_str();
    synth->add_option("--per-combo", sy.per_combo, "clips per (color, motion) pair")
        ->capture_default_str();
    synth->add_option("--noise", sy.noise, "additive pixel noise level")->capture_default_str();
    synth->add_option("--clip-length", sy.t, "frames per clip")->capture_default_str();
    synth->add_option("--resolution", sy.h, "clip resolution")->capture_default_str();
    synth->add_option("--seed", sy.seed, "corpus random seed")->capture_default_str();
    synth->add_option("--out", sy.out, "corpus output directory")->required()->capture_default_str();
    synth->callback([&] { cmd_synth_data(sy); });

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "train a model variant on a corpus");
    auto* variant_opt =
        train->add_option("--variant", tr.variant, "one of dt2v, pt2v, gt2v, t2v")
            ->capture_default_str();
    train->add_option("--config", tr.config, "key = value config file (default config if absent)")
        ->capture_default_str();
    train->add_option("--data", tr.data, "corpus directory")->required()->capture_default_str();
    train->add_option("--steps", tr.steps, "training steps to run")->capture_default_str();
    train->add_option("--seed", tr.seed, "seed for init, noise and shuffling")
        ->capture_default_str();
    train->add_option("--out", tr.out, "run directory (checkpoint + loss log)")
        ->capture_default_str();
    train->add_option("--resume", tr.resume, "checkpoint to continue from")->capture_default_str();
    train->add_option("--workers", tr.workers, "worker count (output is identical for any)")
        ->capture_default_str();
    train->callback([&] {
        tr.variant_given = variant_opt->count() > 0;
        cmd_train(tr);
    });

    GenerateArgs ge;
    auto* generate = app.add_subcommand("generate", "sample a video for a caption");
    generate->add_option("--checkpoint", ge.checkpoint, "trained checkpoint")
        ->required()->capture_default_str();
    generate->add_option("--caption", ge.caption, "conditioning text")
        ->required()->capture_default_str();
    generate->add_option("--seed", ge.seed, "sampling seed")->capture_default_str();
    generate->add_option("--out", ge.out, "output directory")->capture_default_str();
    generate->callback([&] { cmd_generate(ge); });

    EvaluateArgs ev;
    auto* evaluate =
        app.add_subcommand("evaluate", "score checkpoints with a corpus-trained classifier");
    evaluate->add_option("--data", ev.data, "corpus directory")->required()->capture_default_str();
    evaluate->add_option("--variants", ev.variants, "comma list, e.g. dt2v,gt2v,t2v")
        ->required()->capture_default_str();
    evaluate->add_option("--checkpoints", ev.checkpoints, "comma list aligned with --variants")
        ->required()->capture_default_str();
    evaluate->add_option("--n-per-class", ev.n_per_class, "generated samples per class")
        ->capture_default_str();
    evaluate->add_option("--epochs", ev.epochs, "classifier training epochs")
        ->capture_default_str();
    evaluate->add_option("--batch", ev.batch, "classifier batch size")->capture_default_str();
    evaluate->add_option("--seed", ev.seed, "classifier and sampling seed")->capture_default_str();
    evaluate->add_option("--out", ev.out, "report output directory")->capture_default_str();
    evaluate->callback([&] { cmd_evaluate(ev); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    } catch (const training_diverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace t2v
