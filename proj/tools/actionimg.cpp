// actionimg: skeleton sequences -> action images -> multi-scale CNN.
//
//   actionimg synth     --config run.json
//   actionimg stats     --manifest data/manifest.json
//   actionimg encode    --config run.json [--mapping baseline --stats out/stats.json]
//   actionimg augment   --config run.json
//   actionimg train     --config run.json [--epochs N] [--checkpoint resume.bin]
//   actionimg eval      --config run.json --checkpoint out/checkpoint.bin
//   actionimg gradcheck [--precision single] [--tolerance 1e-4]
//
// Exit codes: 0 success, 1 invalid configuration, 2 data error, 3 numeric
// failure (including a failed gradient check).

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "actionimg/errors.hpp"
#include "actionimg/pipeline.hpp"

namespace {

using nlohmann::json;

struct Overrides {
    std::string config_path;
    std::string manifest, layout, mapping, stats, mask, output_dir, checkpoint, eval_split, precision;
    std::optional<int> epochs, batch_size, multiplicity;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance, h;

    void apply(json& doc) const {
        auto set = [&](const char* key, const std::string& v) {
            if (!v.empty()) doc[key] = v;
        };
        set("manifest", manifest);
        if (!manifest.empty()) doc.erase("synth");
        set("layout", layout);
        set("mapping", mapping);
        set("stats", stats);
        set("mask", mask);
        set("output_dir", output_dir);
        set("checkpoint", checkpoint);
        set("eval_split", eval_split);
        if (epochs) doc["epochs"] = *epochs;
        if (batch_size) doc["batch_size"] = *batch_size;
        if (seed) doc["seed"] = *seed;
        if (multiplicity) doc["augment"]["multiplicity"] = *multiplicity;
        if (tolerance) doc["gradcheck"]["tolerance"] = *tolerance;
        if (h) doc["gradcheck"]["h"] = *h;
        if (!precision.empty()) doc["gradcheck"]["precision"] = precision;
    }
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON run config");
    cmd->add_option("--manifest", o.manifest, "dataset manifest (replaces a synth section)");
    cmd->add_option("--layout", o.layout, "default | kinect25 | utd20 | identity | layout file");
    cmd->add_option("--mapping", o.mapping, "proposed | baseline");
    cmd->add_option("--stats", o.stats, "global stats file for the baseline mapping");
    cmd->add_option("--mask", o.mask, "kept channels, e.g. xyz, xy, z");
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
    cmd->add_option("--seed", o.seed, "run seed");
}

int run(int argc, char** argv) {
    CLI::App app{"Skeleton action images and multi-scale CNN classification"};
    app.require_subcommand(1);
    Overrides o;
    auto* synth = app.add_subcommand("synth", "generate a synthetic skeleton dataset");
    auto* stats = app.add_subcommand("stats", "global coordinate range of the training split");
    auto* encode = app.add_subcommand("encode", "encode sequences to PNG action images");
    auto* augment = app.add_subcommand("augment", "write an augmented training split");
    auto* train = app.add_subcommand("train", "train the multi-scale network");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    for (auto* cmd : {synth, stats, encode, augment, train, eval, gradcheck}) add_common(cmd, o);
    augment->add_option("--multiplicity", o.multiplicity, "augmented copies per sequence");
    train->add_option("--multiplicity", o.multiplicity, "augmented copies per sequence");
    train->add_option("--epochs", o.epochs, "epochs to train");
    train->add_option("--batch-size", o.batch_size, "minibatch size");
    train->add_option("--checkpoint", o.checkpoint, "resume from this checkpoint");
    eval->add_option("--checkpoint", o.checkpoint, "checkpoint to evaluate")->required();
    eval->add_option("--split", o.eval_split, "train | test");
    gradcheck->add_option("--tolerance", o.tolerance, "maximum relative error");
    gradcheck->add_option("--step", o.h, "central-difference step h");
    gradcheck->add_option("--precision", o.precision, "double | single");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        json doc = actionimg::load_config_json(o.config_path);
        o.apply(doc);
        const auto config = actionimg::RunConfig::from_json(doc);

        if (synth->parsed()) {
            std::cout << "wrote " << actionimg::cmd_synth(config).string() << '\n';
        } else if (stats->parsed()) {
            const auto s = actionimg::cmd_stats(config);
            std::cout << "c_min " << s.c_min << "  c_max " << s.c_max << '\n';
        } else if (encode->parsed()) {
            const auto s = actionimg::cmd_encode(config);
            std::cout << "encoded " << s.written << " sequences (" << s.degenerate << " degenerate), index "
                      << s.index_path.string() << '\n';
            for (const auto& f : s.failures) std::cout << "failed: " << f << '\n';
        } else if (augment->parsed()) {
            std::cout << "wrote " << actionimg::cmd_augment(config).string() << '\n';
        } else if (train->parsed()) {
            const auto s = actionimg::cmd_train(config);
            for (const auto& m : s.history) {
                std::cout << "epoch " << m.epoch << "  lr " << m.learning_rate << "  loss " << m.loss
                          << "  train " << m.train_accuracy;
                if (m.test_accuracy) std::cout << "  test " << *m.test_accuracy;
                std::cout << '\n';
            }
            std::cout << "checkpoint " << s.checkpoint_path.string() << '\n';
        } else if (eval->parsed()) {
            const auto r = actionimg::cmd_eval(config);
            std::cout << "accuracy " << r.accuracy << '\n';
            for (std::size_t c = 0; c < r.class_names.size(); ++c)
                std::cout << "  " << r.class_names[c] << ' ' << r.per_class_accuracy[c] << '\n';
        } else if (gradcheck->parsed()) {
            const auto r = actionimg::cmd_gradcheck(config);
            for (const auto& l : r.layers)
                std::cout << "  " << l.layer << "  checked " << l.checked << "  max rel err "
                          << l.max_relative_error << '\n';
            std::cout << (r.passed ? "PASS" : "FAIL") << "  max relative error " << r.max_relative_error
                      << " over " << r.checked << " parameters (tolerance " << r.tolerance << ")\n";
            return r.passed ? 0 : 3;
        }
    } catch (const actionimg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const actionimg::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const actionimg::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
