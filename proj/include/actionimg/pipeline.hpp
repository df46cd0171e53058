#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "actionimg/augment.hpp"
#include "actionimg/ingest.hpp"
#include "actionimg/mapping.hpp"
#include "actionimg/net.hpp"

namespace actionimg {

/// Environment variable consulted when no output directory is configured.
inline constexpr const char* kOutputDirEnv = "ACTIONIMG_OUTPUT_DIR";

struct GradCheckConfig {
    double h = 1e-5;
    double tolerance = 1e-4;
    std::size_t samples = 200;
    bool double_precision = true;
    int class_count = 3;
    int label = 1;
};

/// Everything a run needs; a run is reproducible from this value alone.
struct RunConfig {
    std::optional<std::filesystem::path> manifest;
    std::optional<SynthSpec> synth;
    std::string layout = "default";
    MappingKind mapping = MappingKind::Proposed;
    std::optional<std::filesystem::path> stats_path;
    ChannelMask mask;
    AugmentationSpec augment{.multiplicity = 0};
    NetConfig net;
    OptimizerConfig optimizer;
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> checkpoint;  // eval input / train resume
    Split eval_split = Split::Test;
    GradCheckConfig gradcheck;

    /// Missing keys take defaults; unknown keys are rejected.
    static RunConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    /// Checks everything a command needs before it touches the filesystem.
    void validate() const;
};

/// Reads a JSON config file; an empty path yields `{}`.
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Resolved output directory: configured value, else the environment
/// variable, else "actionimg_out".
std::filesystem::path output_dir(const RunConfig& config);

struct LoadedDataset {
    std::vector<SkeletonSequence> train;
    std::vector<SkeletonSequence> test;
    std::vector<std::string> class_names;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
};

/// Synthetic data or manifest files, split into train/test. Unreadable files
/// are recorded in `failures` and skipped.
LoadedDataset load_dataset(const RunConfig& config);

/// Layout reorder, actor merge and channel mask.
SkeletonSequence preprocess(const SkeletonSequence& seq, const RunConfig& config);

/// Mapping mode with stats loaded for the baseline.
MappingMode mapping_mode(const RunConfig& config);

struct EncodeSummary {
    std::size_t written = 0;
    std::size_t degenerate = 0;
    std::vector<std::string> failures;
    std::filesystem::path index_path;
};

struct TrainSummary {
    std::vector<EpochMetrics> history;
    std::filesystem::path checkpoint_path;
    std::filesystem::path metrics_path;
    double final_test_accuracy = 0.0;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<int>> confusion;  // rows = true class
    std::vector<std::string> class_names;
    nlohmann::json metadata;

    nlohmann::json to_json() const;
};

/// Confusion matrix and derived accuracies.
EvalReport make_report(const std::vector<int>& truth, const std::vector<int>& predicted,
                       std::vector<std::string> class_names);

/// Row-normalised confusion heatmap, one square block per cell.
ActionImage render_confusion(const std::vector<std::vector<int>>& confusion, int cell = 24);

std::filesystem::path cmd_synth(const RunConfig& config);
GlobalStats cmd_stats(const RunConfig& config);
EncodeSummary cmd_encode(const RunConfig& config);
std::filesystem::path cmd_augment(const RunConfig& config);
TrainSummary cmd_train(const RunConfig& config);
EvalReport cmd_eval(const RunConfig& config);
GradCheckReport cmd_gradcheck(const RunConfig& config);

}  // namespace actionimg
