#include "actionimg/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "actionimg/checkpoint.hpp"
#include "actionimg/errors.hpp"
#include "actionimg/layout.hpp"

namespace actionimg {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "manifest", "synth",  "layout",     "mapping", "stats",      "mask",        "augment",  "net",
    "optimizer", "epochs", "batch_size", "seed",   "output_dir", "checkpoint", "eval_split", "gradcheck"};

template <typename T>
void read(const json& doc, const char* key, T& out) {
    if (doc.contains(key) && !doc[key].is_null()) out = doc[key].get<T>();
}

SynthSpec synth_from_json(const json& doc) {
    SynthSpec s;
    read(doc, "class_count", s.class_count);
    read(doc, "sequences_per_class", s.sequences_per_class);
    read(doc, "test_per_class", s.test_per_class);
    read(doc, "joint_count", s.joint_count);
    read(doc, "frames_min", s.frames_min);
    read(doc, "frames_max", s.frames_max);
    read(doc, "noise", s.noise);
    read(doc, "motion_amplitude", s.motion_amplitude);
    read(doc, "translation_max", s.translation_max);
    read(doc, "scale_min", s.scale_min);
    read(doc, "scale_max", s.scale_max);
    read(doc, "seed", s.seed);
    return s;
}

json synth_to_json(const SynthSpec& s) {
    return {{"class_count", s.class_count}, {"sequences_per_class", s.sequences_per_class},
            {"test_per_class", s.test_per_class}, {"joint_count", s.joint_count},
            {"frames_min", s.frames_min}, {"frames_max", s.frames_max}, {"noise", s.noise},
            {"motion_amplitude", s.motion_amplitude},
            {"translation_max", s.translation_max}, {"scale_min", s.scale_min},
            {"scale_max", s.scale_max}, {"seed", s.seed}};
}

AugmentationSpec augment_from_json(const json& doc) {
    AugmentationSpec a{.multiplicity = 0};
    read(doc, "rotation_deg", a.rotation_deg);
    read(doc, "noise_mean", a.noise_mean);
    read(doc, "noise_sigma", a.noise_sigma);
    read(doc, "crop_min", a.crop_min);
    read(doc, "crop_max", a.crop_max);
    read(doc, "multiplicity", a.multiplicity);
    read(doc, "seed", a.seed);
    return a;
}

json augment_to_json(const AugmentationSpec& a) {
    return {{"rotation_deg", a.rotation_deg}, {"noise_mean", a.noise_mean}, {"noise_sigma", a.noise_sigma},
            {"crop_min", a.crop_min}, {"crop_max", a.crop_max}, {"multiplicity", a.multiplicity},
            {"seed", a.seed}};
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::filesystem::path prepare_output(const RunConfig& config, const std::string& sub = {}) {
    auto dir = output_dir(config);
    if (!sub.empty()) dir /= sub;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void require_dataset(const RunConfig& config) {
    if (!config.manifest && !config.synth)
        throw ConfigError("no dataset configured: set \"manifest\" or \"synth\"");
}

void require_stats_if_baseline(const RunConfig& config) {
    if (config.mapping == MappingKind::Baseline && !config.stats_path)
        throw ConfigError("baseline mapping needs a stats file; run `actionimg stats` first and pass --stats");
}

SkeletonSequence arrange(const SkeletonSequence& seq, const RunConfig& config) {
    const auto layout = BodyPartLayout::resolve(config.layout, seq.joint_count());
    return merge_actors(reorder_joints(seq, layout));
}

struct EncodedSet {
    std::vector<ActionImage> images;
    std::vector<int> labels;
};

EncodedSet encode_all(const std::vector<SkeletonSequence>& seqs, const MappingMode& mode,
                      const RunConfig& config) {
    EncodedSet out;
    for (const auto& seq : seqs) {
        out.images.push_back(mode.encode(mask_channels(seq, config.mask)).image);
        out.labels.push_back(seq.label.value_or(0));
    }
    return out;
}

json preprocessing_json(const RunConfig& config) {
    return {{"layout", config.layout},
            {"mapping", config.mapping == MappingKind::Proposed ? "proposed" : "baseline"},
            {"mask", config.mask.to_string()}};
}

}  // namespace

// ------------------------------------------------------------------ config

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (!kConfigKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    RunConfig c;
    try {
        if (doc.contains("manifest") && !doc["manifest"].is_null())
            c.manifest = doc["manifest"].get<std::string>();
        if (doc.contains("synth") && !doc["synth"].is_null()) c.synth = synth_from_json(doc["synth"]);
        read(doc, "layout", c.layout);
        if (doc.contains("mapping")) {
            const auto m = doc["mapping"].get<std::string>();
            if (m == "proposed") c.mapping = MappingKind::Proposed;
            else if (m == "baseline") c.mapping = MappingKind::Baseline;
            else throw ConfigError("mapping must be \"proposed\" or \"baseline\"");
        }
        if (doc.contains("stats") && !doc["stats"].is_null()) c.stats_path = doc["stats"].get<std::string>();
        if (doc.contains("mask")) c.mask = ChannelMask::parse(doc["mask"].get<std::string>());
        if (doc.contains("augment")) c.augment = augment_from_json(doc["augment"]);
        if (doc.contains("net")) c.net = net_config_from_json(doc["net"]);
        if (doc.contains("optimizer")) c.optimizer = optimizer_config_from_json(doc["optimizer"]);
        read(doc, "epochs", c.epochs);
        read(doc, "batch_size", c.batch_size);
        read(doc, "seed", c.seed);
        if (doc.contains("output_dir") && !doc["output_dir"].is_null())
            c.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("checkpoint") && !doc["checkpoint"].is_null())
            c.checkpoint = doc["checkpoint"].get<std::string>();
        if (doc.contains("eval_split")) c.eval_split = parse_split(doc["eval_split"].get<std::string>());
        if (doc.contains("gradcheck")) {
            const auto& g = doc["gradcheck"];
            read(g, "h", c.gradcheck.h);
            read(g, "tolerance", c.gradcheck.tolerance);
            read(g, "samples", c.gradcheck.samples);
            read(g, "class_count", c.gradcheck.class_count);
            read(g, "label", c.gradcheck.label);
            if (g.contains("precision")) {
                const auto p = g["precision"].get<std::string>();
                if (p != "double" && p != "single") throw ConfigError("gradcheck precision must be double or single");
                c.gradcheck.double_precision = p == "double";
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json RunConfig::to_json() const {
    json doc;
    doc["manifest"] = manifest ? json(manifest->string()) : json(nullptr);
    doc["synth"] = synth ? synth_to_json(*synth) : json(nullptr);
    doc["layout"] = layout;
    doc["mapping"] = mapping == MappingKind::Proposed ? "proposed" : "baseline";
    doc["stats"] = stats_path ? json(stats_path->string()) : json(nullptr);
    doc["mask"] = mask.to_string();
    doc["augment"] = augment_to_json(augment);
    json net_doc = actionimg::to_json(net);
    net_doc.erase("class_count");
    doc["net"] = net_doc;
    doc["optimizer"] = actionimg::to_json(optimizer);
    doc["epochs"] = epochs;
    doc["batch_size"] = batch_size;
    doc["seed"] = seed;
    doc["output_dir"] = output_dir.string();
    doc["checkpoint"] = checkpoint ? json(checkpoint->string()) : json(nullptr);
    doc["eval_split"] = to_string(eval_split);
    doc["gradcheck"] = {{"h", gradcheck.h}, {"tolerance", gradcheck.tolerance}, {"samples", gradcheck.samples},
                        {"class_count", gradcheck.class_count}, {"label", gradcheck.label},
                        {"precision", gradcheck.double_precision ? "double" : "single"}};
    return doc;
}

void RunConfig::validate() const {
    if (manifest && synth) throw ConfigError("set only one of \"manifest\" and \"synth\"");
    if (synth) synth->validate();
    if (!mask.any()) throw ConfigError("channel mask must keep at least one channel");
    augment.validate();
    optimizer.validate();
    NetConfig probe = net;
    probe.class_count = std::max(2, probe.class_count);
    probe.validate();
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(gradcheck.h > 0.0)) throw ConfigError("gradcheck h must be > 0");
    if (!(gradcheck.tolerance >= 0.0)) throw ConfigError("gradcheck tolerance must be >= 0");
    if (gradcheck.class_count < 2) throw ConfigError("gradcheck class_count must be >= 2");
    if (gradcheck.label < 0 || gradcheck.label >= gradcheck.class_count)
        throw ConfigError("gradcheck label out of range");
}

json load_config_json(const std::filesystem::path& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::filesystem::path output_dir(const RunConfig& config) {
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "actionimg_out";
}

// ------------------------------------------------------------------ data

LoadedDataset load_dataset(const RunConfig& config) {
    require_dataset(config);
    LoadedDataset out;
    if (config.synth) {
        auto synth = generate_synthetic(*config.synth);
        out.class_names = synth.manifest.class_names;
        for (std::size_t i = 0; i < synth.sequences.size(); ++i) {
            auto& bucket = synth.manifest.entries[i].split == Split::Train ? out.train : out.test;
            bucket.push_back(std::move(synth.sequences[i]));
        }
        return out;
    }
    const auto manifest = DatasetManifest::load(*config.manifest);
    const auto base = config.manifest->parent_path();
    out.class_names = manifest.class_names;
    for (const auto& entry : manifest.entries) {
        std::filesystem::path path = entry.path;
        if (path.is_relative()) path = base / path;
        try {
            auto parsed = load_sequence(path);
            parsed.sequence.label = entry.label;
            for (const auto& w : parsed.warnings) out.warnings.push_back(path.string() + ": " + w);
            auto& bucket = entry.split == Split::Train ? out.train : out.test;
            bucket.push_back(std::move(parsed.sequence));
        } catch (const DataError& e) {
            out.failures.push_back(e.what());
        }
    }
    return out;
}

SkeletonSequence preprocess(const SkeletonSequence& seq, const RunConfig& config) {
    return mask_channels(arrange(seq, config), config.mask);
}

MappingMode mapping_mode(const RunConfig& config) {
    MappingMode mode{config.mapping, std::nullopt};
    if (config.mapping == MappingKind::Baseline) {
        require_stats_if_baseline(config);
        mode.stats = GlobalStats::load(*config.stats_path);
    }
    return mode;
}

// ------------------------------------------------------------------ reports

json EvalReport::to_json() const {
    return {{"accuracy", accuracy},
            {"per_class_accuracy", per_class_accuracy},
            {"confusion", confusion},
            {"class_names", class_names},
            {"metadata", metadata}};
}

EvalReport make_report(const std::vector<int>& truth, const std::vector<int>& predicted,
                       std::vector<std::string> class_names) {
    if (truth.size() != predicted.size()) throw ConfigError("report: truth and prediction lengths differ");
    const int m = static_cast<int>(class_names.size());
    EvalReport r;
    r.class_names = std::move(class_names);
    r.confusion.assign(m, std::vector<int>(m, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= m || predicted[i] < 0 || predicted[i] >= m)
            throw DataError("report: label outside class range");
        ++r.confusion[truth[i]][predicted[i]];
    }
    int trace = 0;
    for (int c = 0; c < m; ++c) {
        int row = 0;
        for (int v : r.confusion[c]) row += v;
        trace += r.confusion[c][c];
        r.per_class_accuracy.push_back(row ? static_cast<double>(r.confusion[c][c]) / row : 0.0);
    }
    r.accuracy = truth.empty() ? 0.0 : static_cast<double>(trace) / truth.size();
    return r;
}

ActionImage render_confusion(const std::vector<std::vector<int>>& confusion, int cell) {
    const int m = static_cast<int>(confusion.size());
    const int side = std::max(1, m * cell);
    ActionImage img(side, side);
    for (int r = 0; r < m; ++r) {
        int total = 0;
        for (int v : confusion[r]) total += v;
        for (int c = 0; c < m; ++c) {
            const double v = total ? static_cast<double>(confusion[r][c]) / total : 0.0;
            const auto red = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
            const auto green = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - 0.6 * v)));
            for (int y = 0; y < cell; ++y)
                for (int x = 0; x < cell; ++x) {
                    const bool border = y == 0 || x == 0;
                    img(r * cell + y, c * cell + x, 0) = border ? 160 : red;
                    img(r * cell + y, c * cell + x, 1) = border ? 160 : green;
                    img(r * cell + y, c * cell + x, 2) = border ? 160 : 255;
                }
        }
    }
    return img;
}

// ------------------------------------------------------------------ commands

std::filesystem::path cmd_synth(const RunConfig& config) {
    config.validate();
    if (!config.synth) throw ConfigError("synth needs a \"synth\" section");
    const auto data = generate_synthetic(*config.synth);
    const auto dir = prepare_output(config, "dataset");
    for (std::size_t i = 0; i < data.sequences.size(); ++i) {
        std::ofstream out(dir / data.manifest.entries[i].path);
        if (!out) throw DataError("cannot write " + (dir / data.manifest.entries[i].path).string());
        write_jsonl(out, data.sequences[i]);
    }
    data.manifest.save(dir / "manifest.json");
    return dir / "manifest.json";
}

GlobalStats cmd_stats(const RunConfig& config) {
    config.validate();
    require_dataset(config);
    const auto data = load_dataset(config);
    std::vector<SkeletonSequence> train;
    for (const auto& seq : data.train) train.push_back(preprocess(seq, config));
    const auto stats = compute_global_stats(train);
    stats.save(prepare_output(config) / "stats.json");
    return stats;
}

EncodeSummary cmd_encode(const RunConfig& config) {
    config.validate();
    require_dataset(config);
    require_stats_if_baseline(config);
    const auto mode = mapping_mode(config);
    const auto data = load_dataset(config);
    const auto root = prepare_output(config);
    const auto images = prepare_output(config, "images");

    EncodeSummary summary;
    summary.failures = data.failures;
    json index = json::array();
    auto emit = [&](const std::vector<SkeletonSequence>& seqs, Split split) {
        for (const auto& seq : seqs) {
            try {
                const auto encoded = mode.encode(preprocess(seq, config));
                const std::string name = seq.source_id + ".png";
                export_png(encoded.image, images / name);
                index.push_back({{"path", "images/" + name},
                                 {"label", seq.label ? json(*seq.label) : json(nullptr)},
                                 {"split", to_string(split)},
                                 {"degenerate", encoded.degenerate}});
                ++summary.written;
                summary.degenerate += encoded.degenerate;
            } catch (const std::exception& e) {
                summary.failures.push_back(seq.source_id + ": " + e.what());
            }
        }
    };
    emit(data.train, Split::Train);
    emit(data.test, Split::Test);
    summary.index_path = root / "index.json";
    write_text(summary.index_path,
               json{{"images", index}, {"class_names", data.class_names}, {"failures", summary.failures}}.dump(2) + "\n");
    return summary;
}

std::filesystem::path cmd_augment(const RunConfig& config) {
    config.validate();
    require_dataset(config);
    const auto data = load_dataset(config);
    const auto expanded = expand(Dataset{data.train, Split::Train}, config.augment);
    const auto dir = prepare_output(config, "augmented");
    DatasetManifest manifest;
    manifest.class_names = data.class_names;
    auto emit = [&](const std::vector<SkeletonSequence>& seqs, Split split) {
        for (const auto& seq : seqs) {
            const std::string name = seq.source_id + ".jsonl";
            std::ofstream out(dir / name);
            if (!out) throw DataError("cannot write " + (dir / name).string());
            write_jsonl(out, seq);
            manifest.entries.push_back(ManifestEntry{name, seq.label.value_or(0), split});
        }
    };
    emit(expanded.sequences, Split::Train);
    emit(data.test, Split::Test);
    manifest.validate();
    manifest.save(dir / "manifest.json");
    return dir / "manifest.json";
}

TrainSummary cmd_train(const RunConfig& config) {
    config.validate();
    require_dataset(config);
    require_stats_if_baseline(config);
    const auto mode = mapping_mode(config);
    std::optional<Checkpoint<float>> resume;
    if (config.checkpoint) resume = load_checkpoint<float>(*config.checkpoint);

    const auto data = load_dataset(config);
    if (data.train.empty()) throw DataError("training split is empty");
    for (const auto& f : data.failures) std::cerr << "warning: skipped " << f << '\n';

    Dataset arranged{{}, Split::Train};
    for (const auto& seq : data.train) arranged.sequences.push_back(arrange(seq, config));
    if (config.augment.multiplicity > 0) arranged = expand(arranged, config.augment);
    std::vector<SkeletonSequence> test;
    for (const auto& seq : data.test) test.push_back(arrange(seq, config));
    const auto train_set = encode_all(arranged.sequences, mode, config);
    const auto test_set = encode_all(test, mode, config);

    NetConfig net_config = config.net;
    net_config.class_count = static_cast<int>(data.class_names.size());
    MultiScaleNet<float> net(net_config, config.seed);
    OptimizerState<float> state;
    if (resume) {
        if (resume->net.class_count != net_config.class_count)
            throw DataError("checkpoint has " + std::to_string(resume->net.class_count) + " classes, dataset has " +
                            std::to_string(net_config.class_count));
        net = MultiScaleNet<float>(resume->net, resume->parameters);
        state = resume->state;
    }

    const auto train_inputs = prepare_inputs(net, std::span<const ActionImage>(train_set.images),
                                             std::span<const int>(train_set.labels));
    const auto test_inputs = prepare_inputs(net, std::span<const ActionImage>(test_set.images),
                                            std::span<const int>(test_set.labels));
    std::function<std::optional<double>(const MultiScaleNet<float>&)> evaluate;
    if (test_inputs.size() > 0)
        evaluate = [&](const MultiScaleNet<float>& n) -> std::optional<double> { return accuracy(n, test_inputs); };

    TrainSummary summary;
    summary.history = train(net, state, train_inputs, config.optimizer,
                            TrainOptions{config.epochs, config.batch_size, config.seed}, evaluate);
    if (!summary.history.empty() && summary.history.back().test_accuracy)
        summary.final_test_accuracy = *summary.history.back().test_accuracy;
    else if (test_inputs.size() > 0)
        summary.final_test_accuracy = accuracy(net, test_inputs);

    const auto dir = prepare_output(config);
    Checkpoint<float> ckpt{net.config(), config.optimizer, net.parameters(), state, json::object()};
    ckpt.metadata = {{"class_names", data.class_names},
                     {"preprocessing", preprocessing_json(config)},
                     {"seed", config.seed},
                     {"train_samples", train_inputs.size()}};
    summary.checkpoint_path = dir / "checkpoint.bin";
    save_checkpoint(summary.checkpoint_path, ckpt);

    std::ostringstream csv;
    csv << "epoch,learning_rate,loss,train_accuracy,test_accuracy\n";
    for (const auto& m : summary.history)
        csv << m.epoch << ',' << format_number(m.learning_rate) << ',' << format_number(m.loss) << ','
            << format_number(m.train_accuracy) << ',' << (m.test_accuracy ? format_number(*m.test_accuracy) : "")
            << '\n';
    summary.metrics_path = dir / "metrics.csv";
    write_text(summary.metrics_path, csv.str());
    write_text(dir / "run_config.json", config.to_json().dump(2) + "\n");
    return summary;
}

EvalReport cmd_eval(const RunConfig& config) {
    config.validate();
    require_dataset(config);
    require_stats_if_baseline(config);
    if (!config.checkpoint) throw ConfigError("eval needs --checkpoint");
    const auto mode = mapping_mode(config);
    const auto ckpt = load_checkpoint<float>(*config.checkpoint);
    const auto data = load_dataset(config);
    if (ckpt.net.class_count != static_cast<int>(data.class_names.size()))
        throw DataError("checkpoint has " + std::to_string(ckpt.net.class_count) + " classes but dataset has " +
                        std::to_string(data.class_names.size()));
    const MultiScaleNet<float> net(ckpt.net, ckpt.parameters);

    const auto& split = config.eval_split == Split::Test ? data.test : data.train;
    std::vector<int> truth;
    std::vector<int> predicted;
    for (const auto& seq : split) {
        const auto image = mode.encode(preprocess(seq, config)).image;
        truth.push_back(seq.label.value_or(0));
        predicted.push_back(net.predict(image).label);
    }
    auto report = make_report(truth, predicted, data.class_names);
    report.metadata = {{"checkpoint", config.checkpoint->string()},
                       {"split", to_string(config.eval_split)},
                       {"samples", truth.size()},
                       {"preprocessing", preprocessing_json(config)}};

    const auto dir = prepare_output(config, "eval");
    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    std::ostringstream csv;
    csv << "true\\predicted";
    for (const auto& name : report.class_names) csv << ',' << name;
    csv << '\n';
    for (std::size_t r = 0; r < report.confusion.size(); ++r) {
        csv << report.class_names[r];
        for (int v : report.confusion[r]) csv << ',' << v;
        csv << '\n';
    }
    write_text(dir / "confusion.csv", csv.str());
    export_png(render_confusion(report.confusion), dir / "confusion.png");
    return report;
}

namespace {

template <typename Scalar>
GradCheckReport run_gradcheck(const RunConfig& config, const ActionImage& image) {
    NetConfig net_config = config.net;
    net_config.class_count = config.gradcheck.class_count;
    const MultiScaleNet<Scalar> net(net_config, config.seed);
    const auto inputs = net.prepare(image);
    return grad_check(net, std::span<const Image<Scalar>>(inputs), config.gradcheck.label, config.gradcheck.h,
                      config.gradcheck.tolerance, config.gradcheck.samples, config.seed);
}

}  // namespace

GradCheckReport cmd_gradcheck(const RunConfig& config) {
    config.validate();
    SynthSpec fixture;
    fixture.class_count = config.gradcheck.class_count;
    RunConfig arrange_config = config;
    arrange_config.layout = "default";
    const auto seq = preprocess(synth_motion(fixture, config.gradcheck.label, 0), arrange_config);
    const auto image = encode_proposed(seq).image;
    return config.gradcheck.double_precision ? run_gradcheck<double>(config, image)
                                             : run_gradcheck<float>(config, image);
}

}  // namespace actionimg
