#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlmc/estimators.hpp"
#include "vlmc/model.hpp"
#include "vlmc/seqio.hpp"

namespace vlmc {

/// Rounds to `digits` significant decimal digits; applied to every float
/// written to JSON so that emitted files are reproducible byte for byte.
double round_sig(double v, int digits = 10);

/// On-disk model: an alphabet plus per-context rows. `group` is -1 for
/// single-tree files and 0/1/2 for jointly fitted files; `theta` is absent
/// (null in JSON) for contexts with undefined empirical conditionals.
struct ModelFile {
    struct Entry {
        Context context;
        int group = -1;
        std::optional<std::vector<double>> theta;
    };
    Alphabet alphabet;
    std::vector<Entry> entries;

    bool joint() const;
};

nlohmann::ordered_json model_file_to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::ordered_json& j);

/// Single-tree model files only; requires every theta row to be defined.
ProbabilisticContextTree to_model(const ModelFile& file);

ModelFile to_model_file(const Alphabet& alphabet, const SingleFit& fit);
ModelFile to_model_file(const Alphabet& alphabet, const EstimationResult& result);

nlohmann::ordered_json score_table_to_json(const ScoreTable& table, const Alphabet& alphabet);

nlohmann::ordered_json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::ordered_json& j);

} // namespace vlmc
